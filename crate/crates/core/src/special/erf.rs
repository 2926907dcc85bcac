//! Real and complex error functions built on the Faddeeva function
//! `w(z) = exp(-z^2) erfc(-iz)`.
//!
//! Inside `|z| <= FADDEEVA_SWITCH_RADIUS` the upper-half-plane value comes from
//! Weideman's rational expansion in `Z = (L + iz)/(L - iz)`; outside it the
//! Laplace continued fraction is used. The lower half plane follows from
//! `w(z) = 2 exp(-z^2) - w(-z)`.
//!
//! Accuracy is normwise: roughly 1e-14 relative to `|w(z)|` in the upper half
//! plane. Components that are many orders smaller than `|w|` (e.g. `Re w` on
//! the real axis far from the origin) are only accurate in that absolute sense.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Radius separating the rational expansion from the continued fraction.
pub const FADDEEVA_SWITCH_RADIUS: f64 = 6.0;

const WEIDEMAN_TERMS: usize = 40;
const CF_TERMS: usize = 40;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const SQRT_PI: f64 = 1.772_453_850_905_516;

struct Weideman {
    scale: f64,
    // coefficients of Z^0 .. Z^(N-1)
    coeffs: Vec<f64>,
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_TERMS;
        let m = 2 * n;
        let m2 = 2 * m;
        let scale = (n as f64 / 2f64.sqrt()).sqrt();
        // samples at k = -m+1 ..= m-1, prefixed with a zero
        let mut f = vec![0.0; m2];
        for (slot, k) in (-(m as i64) + 1..m as i64).enumerate() {
            let theta = k as f64 * PI / m as f64;
            let t = scale * (theta / 2.0).tan();
            f[slot + 1] = (-t * t).exp() * (scale * scale + t * t);
        }
        // fftshift followed by a direct DFT; only the real part is needed
        let shifted: Vec<f64> = (0..m2).map(|i| f[(i + m2 / 2) % m2]).collect();
        let coeffs = (1..=n)
            .map(|j| {
                let s: f64 = shifted
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v * (2.0 * PI * (i * j % m2) as f64 / m2 as f64).cos())
                    .sum();
                s / m2 as f64
            })
            .collect();
        Weideman { scale, coeffs }
    })
}

fn faddeeva_upper(z: Complex64) -> Complex64 {
    if z.norm() > FADDEEVA_SWITCH_RADIUS {
        let mut r = Complex64::new(0.0, 0.0);
        for k in (1..=CF_TERMS).rev() {
            r = (k as f64 / 2.0) / (z - r);
        }
        return Complex64::i() * FRAC_1_SQRT_PI / (z - r);
    }
    let tab = weideman();
    let iz = Complex64::i() * z;
    let denom = tab.scale - iz;
    let big_z = (tab.scale + iz) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for c in tab.coeffs.iter().rev() {
        p = p * big_z + c;
    }
    2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom
}

/// Faddeeva function `w(z)`.
///
/// In the lower half plane the reflection formula can overflow for large
/// `|Im z|`; the result is then non-finite.
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        faddeeva_upper(z)
    } else {
        2.0 * (-z * z).exp() - faddeeva_upper(-z)
    }
}

/// Scaled complementary error function `exp(z^2) erfc(z) = w(iz)`.
pub fn erfcx_complex(z: Complex64) -> Complex64 {
    faddeeva(Complex64::i() * z)
}

/// Complementary error function of a complex argument.
///
/// Returns [`Error::Overflow`] where `erfc(z)` itself is not representable
/// (large `|Im z|` with `|Im z| > |Re z|`, or large negative `Re z^2` in the
/// left half plane).
pub fn erfc_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("erfc of non-finite argument {z}")));
    }
    let value = if z.re >= 0.0 {
        (-z * z).exp() * faddeeva_upper(Complex64::i() * z)
    } else {
        2.0 - (-z * z).exp() * faddeeva_upper(-Complex64::i() * z)
    };
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(z))
    }
}

/// `1 - sqrt(pi) z erfcx(z)` for `Re z >= 0`, evaluated without the
/// cancellation that the direct form suffers for large `|z|`.
pub(crate) fn one_minus_z_erfcx(z: Complex64) -> Complex64 {
    debug_assert!(z.re >= 0.0);
    if z.norm() >= 8.0 {
        // sqrt(pi) erfcx(z) = 1/(z + R), R = (1/2)/(z + 1/(z + (3/2)/(z + ...)))
        let mut r = Complex64::new(0.0, 0.0);
        for k in (1..=60).rev() {
            r = (k as f64 / 2.0) / (z + r);
        }
        r / (z + r)
    } else {
        1.0 - SQRT_PI * z * erfcx_complex(z)
    }
}

/// Scaled complementary error function on the real line, `exp(x^2) erfc(x)`.
pub fn erfcx_real(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x >= 0.0 {
        faddeeva_upper(Complex64::new(0.0, x)).re
    } else {
        2.0 * (x * x).exp() - faddeeva_upper(Complex64::new(0.0, -x)).re
    }
}

/// Complementary error function on the real line.
pub fn erfc_real(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x >= 0.0 {
        (-x * x).exp() * faddeeva_upper(Complex64::new(0.0, x)).re
    } else {
        2.0 - erfc_real(-x)
    }
}

/// Error function on the real line; odd and monotone.
pub fn erf_real(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < 0.5 {
        // Maclaurin series keeps full relative accuracy near the origin.
        let x2 = ax * ax;
        let mut term = ax;
        let mut sum = ax;
        for n in 1..40 {
            let n = n as f64;
            term *= -x2 / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        2.0 * FRAC_1_SQRT_PI * sum
    } else {
        1.0 - erfc_real(ax)
    };
    v.copysign(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn erf_basic_values() {
        assert_eq!(erf_real(0.0), 0.0);
        assert_eq!(erf_real(0.7), -erf_real(-0.7));
        assert!(erf_real(30.0) <= 1.0);
    }

    #[test]
    fn erfc_at_origin_is_one() {
        let v = erfc_complex(c(0.0, 0.0)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn erfc_reflection() {
        for &(x, y) in &[(0.3, 0.2), (-1.2, 2.5), (4.0, -3.0), (0.01, 5.5)] {
            let z = c(x, y);
            let s = erfc_complex(z).unwrap() + erfc_complex(-z).unwrap();
            assert!((s - c(2.0, 0.0)).norm() < 1e-12, "{z}: {s}");
        }
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(erfc_complex(c(0.1, 40.0)), Err(Error::Overflow(_))));
        assert!(erfc_complex(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn scaled_forms_agree_on_both_sides_of_the_switch() {
        for &z in &[c(5.9, 0.3), c(6.1, 0.3), c(0.0, 7.9), c(3.0, 8.1)] {
            let lhs = one_minus_z_erfcx(z);
            let rhs = 1.0 - SQRT_PI * z * erfcx_complex(z);
            assert!((lhs - rhs).norm() < 1e-12, "{z}");
        }
    }
}
