//! State parameters and the squeezing algebra behind the mode functions.
//!
//! Conventions: `S(zeta)^dag a S(zeta) = a cosh r + a^dag e^{i theta0} sinh r`,
//! states are `D(xi) S(zeta) |m>`, and `x0 = sqrt(2) Re xi`, `p0 = sqrt(2) Im xi`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Angular frequency of the oscillator. Times only ever enter as `omega * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitsConfig {
    pub omega: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        UnitsConfig { omega: 1.0 }
    }
}

impl UnitsConfig {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return domain(format!("omega must be positive and finite, got {omega}"));
        }
        Ok(UnitsConfig { omega })
    }
}

/// Thermal squeezed coherent state `sum_m w_m D S |m><m| S^dag D^dag`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub xi: Complex64,
    pub r: f64,
    pub theta0: f64,
    pub n_th: f64,
}

impl StateSpec {
    pub fn new(xi: Complex64, r: f64, theta0: f64, n_th: f64) -> Result<Self> {
        if !(xi.re.is_finite() && xi.im.is_finite() && theta0.is_finite()) {
            return domain("state parameters must be finite");
        }
        if !(r.is_finite() && r >= 0.0) {
            return domain(format!("squeeze magnitude must be >= 0, got {r}"));
        }
        if !(n_th.is_finite() && n_th >= 0.0) {
            return domain(format!("thermal occupation must be >= 0, got {n_th}"));
        }
        Ok(StateSpec { xi, r, theta0, n_th })
    }

    /// From the phase-space centre `(x0, p0)`.
    pub fn from_x0p0(x0: f64, p0: f64, r: f64, theta0: f64, n_th: f64) -> Result<Self> {
        Self::new(Complex64::new(x0, p0) / SQRT_2, r, theta0, n_th)
    }

    pub fn ground() -> Self {
        StateSpec {
            xi: Complex64::new(0.0, 0.0),
            r: 0.0,
            theta0: 0.0,
            n_th: 0.0,
        }
    }

    pub fn coherent(x0: f64, p0: f64) -> Result<Self> {
        Self::from_x0p0(x0, p0, 0.0, 0.0, 0.0)
    }

    pub fn x0(&self) -> f64 {
        SQRT_2 * self.xi.re
    }

    pub fn p0(&self) -> f64 {
        SQRT_2 * self.xi.im
    }

    pub fn is_pure(&self) -> bool {
        self.n_th == 0.0
    }
}

/// Harmonic offset `xbar(t) = X cos(omega t - Phi) + C`.
///
/// `xbar` is measured in the quadrature units of `a + a^dag`, so the sign
/// projector `theta(s(xhat - xbar(t)/sqrt 2))` cuts position at `xbar/sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OffsetFunction {
    pub amplitude: f64,
    pub phase: f64,
    pub constant: f64,
}

impl OffsetFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(amplitude: f64, phase: f64, constant: f64) -> Result<Self> {
        if !(amplitude.is_finite() && phase.is_finite() && constant.is_finite()) {
            return domain("offset parameters must be finite");
        }
        Ok(OffsetFunction {
            amplitude,
            phase,
            constant,
        })
    }

    /// The offset under which the ground state mimics the coherent state `xi`:
    /// `xbar(t) = -2|xi| cos(omega t - arg xi)`.
    pub fn coherent_equivalent(xi: Complex64) -> Self {
        OffsetFunction {
            amplitude: -2.0 * xi.norm(),
            phase: xi.arg(),
            constant: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0 && self.constant == 0.0
    }

    pub fn value_at(&self, t: f64, units: UnitsConfig) -> f64 {
        self.amplitude * (units.omega * t - self.phase).cos() + self.constant
    }

    /// Position of the sign cut at time `t`.
    pub fn position_cut(&self, t: f64, units: UnitsConfig) -> f64 {
        self.value_at(t, units) / SQRT_2
    }
}

/// Mean occupation from `k_B T / (hbar omega)`.
pub fn n_th_from_temp_ratio(ratio: f64) -> Result<f64> {
    if !(ratio.is_finite() && ratio >= 0.0) {
        return domain(format!("temperature ratio must be >= 0, got {ratio}"));
    }
    if ratio == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 / ratio).exp_m1())
}

/// `gamma = xi cosh r - xi^* e^{i theta0} sinh r`, the amplitude with
/// `D(xi) S(zeta) = S(zeta) D(gamma)`.
pub fn gamma_from(xi: Complex64, r: f64, theta0: f64) -> Complex64 {
    if r == 0.0 {
        return xi;
    }
    xi * r.cosh() - xi.conj() * Complex64::from_polar(1.0, theta0) * r.sinh()
}

/// `E(t) = e^{-i omega t} cosh r + e^{i omega t} e^{-i theta0} sinh r`.
pub fn mode_e(t: f64, r: f64, theta0: f64, units: UnitsConfig) -> Complex64 {
    let wt = units.omega * t;
    Complex64::from_polar(r.cosh(), -wt) + Complex64::from_polar(r.sinh(), wt - theta0)
}

/// `(A(t), B(t))` with `A = cosh r + cos(theta0 - 2 omega t) sinh r` and
/// `B = sin(theta0 - 2 omega t) sinh r`.
pub fn squeeze_quadratures(t: f64, r: f64, theta0: f64, units: UnitsConfig) -> (f64, f64) {
    let arg = theta0 - 2.0 * units.omega * t;
    let (s, c) = arg.sin_cos();
    (r.cosh() + c * r.sinh(), s * r.sinh())
}

/// `lambda(t) = |E(t)|`, never below `e^{-r}`.
pub fn lambda_of(t: f64, r: f64, theta0: f64, units: UnitsConfig) -> f64 {
    let (a, b) = squeeze_quadratures(t, r, theta0, units);
    a.hypot(b)
}

/// `beta(t) = atan2(B, A)`.
///
/// `A >= cosh r - sinh r > 0`, so the principal branch lies in
/// `(-pi/2, pi/2)` and is already continuous in `t`; no unwrapping is needed.
pub fn phase_beta_of(t: f64, r: f64, theta0: f64, units: UnitsConfig) -> f64 {
    let (a, b) = squeeze_quadratures(t, r, theta0, units);
    b.atan2(a)
}

/// `x_xi(t) = sqrt(2) Re(xi e^{-i omega t}) = x0 cos(omega t) + p0 sin(omega t)`.
pub fn x_xi_of(t: f64, xi: Complex64, units: UnitsConfig) -> f64 {
    let (s, c) = (units.omega * t).sin_cos();
    SQRT_2 * (xi.re * c + xi.im * s)
}

/// The linear map `(x0, p0) -> (x0', p0')` of the squeezed/coherent
/// correspondence:
/// `x0' = x0 (cosh r + sinh r cos theta0) + p0 sinh r sin theta0`,
/// `p0' = x0 sinh r sin theta0 + p0 (cosh r - sinh r cos theta0)`.
///
/// The squeezed state with centre `xi'` evaluated at `t` equals the coherent
/// state with centre `xi` evaluated at `t + beta(t)/omega`. The map has unit
/// determinant and its inverse is the same map with `r -> -r`.
pub fn squeezed_centre_for(xi: Complex64, r: f64, theta0: f64) -> Complex64 {
    if r == 0.0 {
        return xi;
    }
    let (ch, sh) = (r.cosh(), r.sinh());
    let (s0, c0) = theta0.sin_cos();
    Complex64::new(
        xi.re * (ch + sh * c0) + xi.im * sh * s0,
        xi.re * sh * s0 + xi.im * (ch - sh * c0),
    )
}

/// Coherent-state description of a squeezed state on reparameterized times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub xi_prime: Complex64,
    pub r: f64,
    pub theta0: f64,
}

impl Reduction {
    /// `t -> t + beta(t)/omega`; the identity when `r = 0`.
    pub fn map_time(&self, t: f64, units: UnitsConfig) -> f64 {
        if self.r == 0.0 {
            return t;
        }
        t + phase_beta_of(t, self.r, self.theta0, units) / units.omega
    }

    /// The coherent state (same thermal occupation) that reproduces `spec`.
    pub fn coherent_state(&self, n_th: f64) -> StateSpec {
        StateSpec {
            xi: self.xi_prime,
            r: 0.0,
            theta0: 0.0,
            n_th,
        }
    }
}

/// Coherent amplitude `xi'` and time map such that
/// `q_squeezed(spec; t1, t2) = q_coherent(xi'; t1 + beta(t1)/omega, t2 + beta(t2)/omega)`.
///
/// This is the inverse of [`squeezed_centre_for`]. Holds for thermal states too.
pub fn reduce_squeezed_to_coherent(spec: &StateSpec) -> Reduction {
    let xi_prime = if spec.r == 0.0 {
        spec.xi
    } else {
        squeezed_centre_for(spec.xi, -spec.r, spec.theta0)
    };
    Reduction {
        xi_prime,
        r: spec.r,
        theta0: spec.theta0,
    }
}

/// `rho = N/(1+N)`, the ratio of successive thermal weights.
pub fn thermal_ratio(n_th: f64) -> f64 {
    n_th / (1.0 + n_th)
}

/// `w_m = (1/(1+N)) (N/(1+N))^m`.
pub fn thermal_weight(m: usize, n_th: f64) -> f64 {
    if n_th == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let rho = thermal_ratio(n_th);
    (1.0 - rho) * rho.powi(m as i32)
}

/// Weight left out by stopping at `m_max`: `rho^{m_max + 1}`.
pub fn thermal_tail(m_max: usize, n_th: f64) -> f64 {
    if n_th == 0.0 {
        return 0.0;
    }
    thermal_ratio(n_th).powi(m_max as i32 + 1)
}

/// Smallest `m_max` with `thermal_tail(m_max, n_th) < tol`.
pub fn thermal_cutoff(n_th: f64, tol: f64) -> usize {
    if n_th == 0.0 {
        return 0;
    }
    let rho = thermal_ratio(n_th);
    let m = (tol.ln() / rho.ln()).ceil() as i64 - 1;
    let mut m = m.max(0) as usize;
    while thermal_tail(m, n_th) >= tol {
        m += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_3, PI};

    const U: UnitsConfig = UnitsConfig { omega: 1.0 };

    #[test]
    fn gamma_closed_forms() {
        let xi = Complex64::new(1.0, 2.0);
        assert_eq!(gamma_from(xi, 0.0, 0.7), xi);
        let g = gamma_from(Complex64::new(1.0, 0.0), 1.0, 0.0);
        assert!((g.re - (-1f64).exp()).abs() < 1e-15 && g.im == 0.0);
    }

    #[test]
    fn mode_function_closed_forms() {
        assert!((mode_e(0.0, 0.0, 0.0, U) - 1.0).norm() < 1e-15);
        assert!((mode_e(0.0, 1.0, 0.0, U) - E).norm() < 1e-15);
        let v = mode_e(FRAC_PI_2, 1.0, 0.0, U);
        assert!((v - Complex64::new(0.0, -(-1f64).exp())).norm() < 1e-15);
    }

    #[test]
    fn lambda_and_beta() {
        assert_eq!(lambda_of(0.3, 0.0, 0.2, U), 1.0);
        assert_eq!(phase_beta_of(0.3, 0.0, 0.2, U), 0.0);
        assert!((lambda_of(0.0, 1.0, 0.0, U) - E).abs() < 1e-14);
        for k in 1..=4 {
            let b = phase_beta_of(k as f64 * FRAC_PI_2, 1.0, 0.0, U);
            assert!(b.abs() < 1e-14, "{k}: {b}");
        }
    }

    #[test]
    fn lambda_squared_matches_the_closed_form() {
        for &r in &[0.0, 0.5, 1.0, 2.0] {
            for &th in &[0.0, FRAC_PI_3, PI] {
                for i in 0..200 {
                    let t = i as f64 * 0.0371;
                    let l = lambda_of(t, r, th, U);
                    let closed = ((2.0 * r).sinh() * (2.0 * t - th).cos() + (2.0 * r).cosh()).sqrt();
                    assert!((l - closed).abs() < 1e-12 * closed);
                    assert!((mode_e(t, r, th, U).norm_sqr() - l * l).abs() < 1e-12 * l * l);
                    assert!(l >= (-r).exp() * (1.0 - 1e-14));
                }
            }
        }
    }

    #[test]
    fn x_xi_closed_forms() {
        let xi = Complex64::new(0.55, 1.925) / SQRT_2;
        assert!((x_xi_of(0.0, xi, U) - 0.55).abs() < 1e-15);
        assert!((x_xi_of(FRAC_PI_2, xi, U) - 1.925).abs() < 1e-15);
        assert!((x_xi_of(PI / 4.0, xi, U) - 2.475 / SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn squeezed_centre_example() {
        let xi = Complex64::new(1.0, 0.0) / SQRT_2;
        let v = squeezed_centre_for(xi, 0.5, 0.0) * SQRT_2;
        assert!((v.re - 0.5f64.exp()).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
        let back = reduce_squeezed_to_coherent(&StateSpec::new(v / SQRT_2, 0.5, 0.0, 0.0).unwrap());
        assert!((back.xi_prime - xi).norm() < 1e-15);
    }

    #[test]
    fn reduction_is_exact_identity_without_squeezing() {
        let spec = StateSpec::from_x0p0(0.3, -1.7, 0.0, 1.1, 0.4).unwrap();
        let red = reduce_squeezed_to_coherent(&spec);
        assert_eq!(red.xi_prime, spec.xi);
        assert_eq!(red.map_time(0.917, U), 0.917);
    }

    #[test]
    fn thermal_weights() {
        assert_eq!(thermal_weight(0, 0.0), 1.0);
        assert_eq!(thermal_weight(1, 0.0), 0.0);
        assert!((thermal_weight(2, 1.0) - 0.125).abs() < 1e-16);
        let n = 0.7;
        let partial: f64 = (0..=30).map(|m| thermal_weight(m, n)).sum();
        assert!((1.0 - partial - thermal_tail(30, n)).abs() < 1e-15);
        let m = thermal_cutoff(n, 1e-12);
        assert!(thermal_tail(m, n) < 1e-12 && thermal_tail(m - 1, n) >= 1e-12);
    }

    #[test]
    fn temperature_conversion() {
        assert_eq!(n_th_from_temp_ratio(0.0).unwrap(), 0.0);
        assert!((n_th_from_temp_ratio(1.0).unwrap() - 1.0 / (E - 1.0)).abs() < 1e-15);
        assert!(n_th_from_temp_ratio(-1.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(StateSpec::from_x0p0(0.0, 0.0, -0.1, 0.0, 0.0).is_err());
        assert!(StateSpec::from_x0p0(0.0, 0.0, 0.1, 0.0, -1.0).is_err());
        assert!(StateSpec::from_x0p0(f64::NAN, 0.0, 0.1, 0.0, 0.0).is_err());
        assert!(UnitsConfig::new(0.0).is_err());
    }
}
