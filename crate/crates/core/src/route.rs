//! One query type for all three evaluators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::fock::{qpd_oracle, OracleConfig};
use crate::integral::{qpd_integral, IntegralConfig};
use crate::measurement::{MeasurementSpec, Sign};
use crate::series::{qpd_series, TruncationConfig};
use crate::state::{StateSpec, UnitsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Integral,
    Series,
    Oracle,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Integral, Route::Series, Route::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Route::Integral => "integral",
            Route::Series => "series",
            Route::Oracle => "oracle",
        }
    }

    /// Whether the route can evaluate this state/projector pair.
    pub fn supports(self, state: &StateSpec, meas: &MeasurementSpec) -> bool {
        match (self, meas) {
            (Route::Integral, MeasurementSpec::Sign { .. }) => state.n_th == 0.0,
            (Route::Integral, MeasurementSpec::Window { .. }) => false,
            (Route::Series, MeasurementSpec::Sign { .. }) => true,
            (Route::Series, MeasurementSpec::Window { .. }) => {
                state.xi.norm() == 0.0 && state.n_th == 0.0
            }
            (Route::Oracle, _) => true,
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Route> {
        match s {
            "integral" => Ok(Route::Integral),
            "series" => Ok(Route::Series),
            "oracle" => Ok(Route::Oracle),
            _ => Err(Error::Domain(format!("unknown route {s:?}"))),
        }
    }
}

/// Numerical controls for every route; only the chosen one is consulted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Controls {
    pub truncation: TruncationConfig,
    pub integral: IntegralConfig,
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpdQuery {
    pub state: StateSpec,
    pub meas: MeasurementSpec,
    pub s1: Sign,
    pub s2: Sign,
    pub t1: f64,
    pub t2: f64,
    pub route: Route,
    pub units: UnitsConfig,
    pub controls: Controls,
}

impl QpdQuery {
    pub fn evaluate(&self) -> Result<Estimate> {
        evaluate(
            self.route,
            &self.state,
            &self.meas,
            self.s1,
            self.s2,
            self.t1,
            self.t2,
            self.units,
            &self.controls,
        )
    }
}

/// `q_{s1 s2}(t1, t2)` by the given route.
pub fn evaluate(
    route: Route,
    state: &StateSpec,
    meas: &MeasurementSpec,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    controls: &Controls,
) -> Result<Estimate> {
    if !route.supports(state, meas) {
        return Err(Error::Unsupported(format!(
            "route {route} does not cover this state and projector"
        )));
    }
    match route {
        Route::Integral => {
            let MeasurementSpec::Sign { offset } = meas else {
                unreachable!("checked by supports")
            };
            qpd_integral(state, offset, s1, s2, t1, t2, units, &controls.integral)
        }
        Route::Series => qpd_series(state, meas, s1, s2, t1, t2, units, &controls.truncation),
        Route::Oracle => qpd_oracle(state, meas, s1, s2, t1, t2, units, &controls.oracle),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn route_names_round_trip() {
        for r in Route::ALL {
            assert_eq!(r.name().parse::<Route>().unwrap(), r);
        }
        assert!("fock".parse::<Route>().is_err());
    }

    #[test]
    fn coverage() {
        let hot = StateSpec::from_x0p0(0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let win = MeasurementSpec::window(1.0).unwrap();
        assert!(!Route::Integral.supports(&hot, &MeasurementSpec::sign()));
        assert!(!Route::Integral.supports(&StateSpec::ground(), &win));
        assert!(Route::Series.supports(&StateSpec::ground(), &win));
        assert!(!Route::Series.supports(&hot, &win));
        assert!(Route::Oracle.supports(&hot, &win));
    }
}
