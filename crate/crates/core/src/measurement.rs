//! Dichotomic outcomes and the two projector families.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::state::OffsetFunction;

/// Measurement outcome `s = +1` or `s = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl TryFrom<i32> for Sign {
    type Error = Error;

    fn try_from(v: i32) -> Result<Sign> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => domain(format!("outcome must be +1 or -1, got {v}")),
        }
    }
}

impl From<Sign> for i32 {
    fn from(s: Sign) -> i32 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Which dichotomic variable is measured.
///
/// `Sign` is `Q = sgn(x - xbar(t)/sqrt 2)`; `Window` is
/// `Q = sgn(x - L) + sgn(-x - L) + 1`, i.e. `+1` outside `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementSpec {
    Sign { offset: OffsetFunction },
    Window { half_width: f64 },
}

impl MeasurementSpec {
    pub fn sign() -> Self {
        MeasurementSpec::Sign {
            offset: OffsetFunction::zero(),
        }
    }

    pub fn window(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return domain(format!("window half-width must be positive, got {half_width}"));
        }
        Ok(MeasurementSpec::Window { half_width })
    }

    pub fn is_window(&self) -> bool {
        matches!(self, MeasurementSpec::Window { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_round_trip() {
        for s in Sign::BOTH {
            assert_eq!(Sign::try_from(i32::from(s)).unwrap(), s);
            assert_eq!(s.flip().value(), -s.value());
        }
        assert!(Sign::try_from(0).is_err());
        let parsed: Sign = serde_json::from_str("-1").unwrap();
        assert_eq!(parsed, Sign::Minus);
    }

    #[test]
    fn window_needs_positive_width() {
        assert!(MeasurementSpec::window(0.0).is_err());
        assert!(MeasurementSpec::window(1.02).unwrap().is_window());
    }
}
