//! Heaviside-integral route for pure squeezed coherent states measured with
//! (offset) sign projectors.
//!
//! Writing `theta(x) = int dp e^{ipx}/(2 pi i (p - i0))` for both projectors
//! and doing the Gaussian state average leaves a two-dimensional integral.
//! In polar coordinates `(c, u)` the radial part is done in closed form, so
//!
//! `q = Re[ 1/(2 pi sqrt(B)) int_0^{pi/2} du I(sigma(u), beta(u), delta) ]`
//!
//! with `I(sigma, beta, delta) = int_0^inf c exp(-(sigma c^2 + 2 beta c + delta)/2) dc`.
//! At times with `B = 0` the two positions are proportional and `q` is an
//! ordinary Gaussian probability; that case is handled separately.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimate::Estimate;
use crate::measurement::Sign;
use crate::special::{adaptive_complex, erfc_real, faddeeva, one_minus_z_erfcx, unit_rule};
use crate::state::{gamma_from, mode_e, OffsetFunction, StateSpec, UnitsConfig};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// `I = int_0^inf c exp(-(sigma c^2 + 2 beta c + delta)/2) dc` for `Re sigma > 0`.
///
/// With `z = beta / sqrt(2 sigma)`,
/// `I = e^{-delta/2} (1 - sqrt(pi) z e^{z^2} erfc(z)) / sigma`.
pub fn c_integral_closed(sigma: Complex64, beta: Complex64, delta: Complex64) -> Result<Complex64> {
    if !(sigma.re > 0.0) {
        return domain(format!("Re(sigma) must be positive, got {sigma}"));
    }
    let z = beta / (2.0 * sigma).sqrt();
    let damp = (-0.5 * delta).exp();
    let v = if z.re >= 0.0 {
        damp * one_minus_z_erfcx(z) / sigma
    } else {
        // e^{z^2} erfc(z) = 2 e^{z^2} - w(-iz)
        let w = faddeeva(-Complex64::i() * z);
        (damp * (1.0 + SQRT_PI * z * w) - 2.0 * SQRT_PI * z * (z * z - 0.5 * delta).exp()) / sigma
    };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(z))
    }
}

/// Quantities of the Gaussian form at a pair of times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadForm {
    /// `|E(t1)|^2`, `|E(t2)|^2`
    pub a1: f64,
    pub a2: f64,
    /// `E(t2) E(t1)^*`
    pub k: Complex64,
    /// `B = a1 a2 - k^2`
    pub b: Complex64,
    /// `E(t) gamma + c.c. - xbar(t)` at both times
    pub cal_e1: f64,
    pub cal_e2: f64,
    pub e1: Complex64,
    pub e2: Complex64,
    pub s1: f64,
    pub s2: f64,
}

impl QuadForm {
    pub fn new(
        state: &StateSpec,
        offset: &OffsetFunction,
        s1: Sign,
        s2: Sign,
        t1: f64,
        t2: f64,
        units: UnitsConfig,
    ) -> Self {
        let gamma = gamma_from(state.xi, state.r, state.theta0);
        let e1 = mode_e(t1, state.r, state.theta0, units);
        let e2 = mode_e(t2, state.r, state.theta0, units);
        let cal_e1 = 2.0 * (e1 * gamma).re - offset.value_at(t1, units);
        let cal_e2 = 2.0 * (e2 * gamma).re - offset.value_at(t2, units);
        let a1 = e1.norm_sqr();
        let a2 = e2.norm_sqr();
        let k = e2 * e1.conj();
        QuadForm {
            a1,
            a2,
            k,
            b: a1 * a2 - k * k,
            cal_e1,
            cal_e2,
            e1,
            e2,
            s1: s1.value(),
            s2: s2.value(),
        }
    }

    /// `|B| / (a1 a2) = 2 |sin(arg k)|`, zero when the positions commute.
    pub fn b_relative(&self) -> f64 {
        self.b.norm() / (self.a1 * self.a2)
    }

    pub fn sigma(&self, u: f64) -> Complex64 {
        let (s, c) = u.sin_cos();
        (self.a2 * c * c + self.a1 * s * s - 2.0 * self.s1 * self.s2 * self.k * s * c) / self.b
    }

    pub fn beta_quad(&self, u: f64) -> Complex64 {
        let (s, c) = u.sin_cos();
        let (s1, s2, e1, e2) = (self.s1, self.s2, self.cal_e1, self.cal_e2);
        (-self.a2 * s1 * e1 * c - self.a1 * s2 * e2 * s + self.k * (s1 * e2 * c + s2 * e1 * s))
            / self.b
    }

    pub fn delta(&self) -> Complex64 {
        let (e1, e2) = (self.cal_e1, self.cal_e2);
        (self.a2 * e1 * e1 + self.a1 * e2 * e2 - 2.0 * self.k * e1 * e2) / self.b
    }

    fn integrand(&self, u: f64, delta: Complex64) -> Result<Complex64> {
        let sigma = self.sigma(u);
        if !(sigma.re > 0.0) {
            return Err(Error::NonPositiveSigma { u, re: sigma.re });
        }
        c_integral_closed(sigma, self.beta_quad(u), delta)
    }

    fn prefactor(&self) -> Complex64 {
        1.0 / (2.0 * PI * self.b.sqrt())
    }

    /// The commuting limit `E(t2) = kappa E(t1)`, `kappa` real: the positions
    /// are `cal_e1 + lambda1 g` and `cal_e2 + kappa lambda1 g`, `g ~ N(0, 1)`.
    pub fn degenerate_probability(&self) -> f64 {
        let l1 = self.a1.sqrt();
        let kappa = if self.k.re >= 0.0 {
            (self.a2 / self.a1).sqrt()
        } else {
            -(self.a2 / self.a1).sqrt()
        };
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        // s (c0 + c1 g) > 0
        let mut clip = |s: f64, c0: f64, c1: f64| {
            let root = -c0 / c1;
            if s * c1 > 0.0 {
                lo = lo.max(root);
            } else {
                hi = hi.min(root);
            }
        };
        clip(self.s1, self.cal_e1, l1);
        clip(self.s2, self.cal_e2, kappa * l1);
        if lo >= hi {
            return 0.0;
        }
        gaussian_mass(lo, hi)
    }
}

/// `P(lo < g < hi)` for a standard normal `g`, without cancellation in the tails.
/// Standard normal probability of `[lo, hi]`.
pub(crate) fn gaussian_mass(lo: f64, hi: f64) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let upper = |x: f64| 0.5 * erfc_real(x * s);
    if lo >= 0.0 {
        upper(lo) - upper(hi)
    } else if hi <= 0.0 {
        upper(-hi) - upper(-lo)
    } else {
        1.0 - upper(hi) - upper(-lo)
    }
}

/// Controls for the `u` quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegralConfig {
    /// starting Gauss-Legendre order, doubled until self-consistent
    pub quad_order: usize,
    pub max_order: usize,
    /// accepted change between successive orders
    pub tol: f64,
    /// bisection fallback when the fixed orders do not settle
    pub adaptive_fallback: bool,
    /// below this `|B|/(a1 a2)` the commuting-limit formula is used
    pub degenerate_below: f64,
}

impl Default for IntegralConfig {
    fn default() -> Self {
        IntegralConfig {
            quad_order: 32,
            max_order: 512,
            tol: 1e-8,
            adaptive_fallback: true,
            degenerate_below: 1e-15,
        }
    }
}

fn fixed_order(form: &QuadForm, delta: Complex64, order: usize) -> Result<Complex64> {
    let rule = unit_rule(order);
    let half = 0.25 * PI;
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let u = half * (1.0 + x);
        acc += half * w * form.integrand(u, delta)?;
    }
    Ok(acc)
}

fn check_pure(state: &StateSpec) -> Result<()> {
    if state.n_th != 0.0 {
        return Err(Error::Unsupported(
            "the integral route covers pure states only".into(),
        ));
    }
    Ok(())
}

/// `q_{s1 s2}(t1, t2)` by the integral route.
pub fn qpd_integral(
    state: &StateSpec,
    offset: &OffsetFunction,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    cfg: &IntegralConfig,
) -> Result<Estimate> {
    check_pure(state)?;
    if cfg.quad_order < 8 {
        return domain(format!("quad_order must be >= 8, got {}", cfg.quad_order));
    }
    if !(t1.is_finite() && t2.is_finite()) {
        return domain("times must be finite");
    }
    let form = QuadForm::new(state, offset, s1, s2, t1, t2, units);
    if form.b_relative() < cfg.degenerate_below {
        return Ok(Estimate::exact(form.degenerate_probability()));
    }
    let delta = form.delta();
    let pre = form.prefactor();
    let mut order = cfg.quad_order;
    let mut prev = (pre * fixed_order(&form, delta, order)?).re;
    let mut work = order;
    while order < cfg.max_order {
        order = (2 * order).min(cfg.max_order);
        let cur = (pre * fixed_order(&form, delta, order)?).re;
        work += order;
        let diff = (cur - prev).abs();
        if diff <= cfg.tol {
            return Ok(Estimate {
                value: cur,
                error: diff,
                converged: true,
                work,
            });
        }
        prev = cur;
    }
    if !cfg.adaptive_fallback {
        return Ok(Estimate {
            value: prev,
            error: f64::INFINITY,
            converged: false,
            work,
        });
    }
    // Near-commuting times: the integrand is a narrow spike in u.
    let failure = std::cell::Cell::new(None);
    let f = |u: f64| match form.integrand(u, delta) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            Complex64::new(0.0, 0.0)
        }
    };
    let abs_tol = 0.1 * cfg.tol / pre.norm();
    let out = adaptive_complex(&f, 0.0, FRAC_PI_2, 16, abs_tol, 64);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(Estimate {
        value: (pre * out.value).re,
        error: pre.norm() * out.error,
        converged: out.converged,
        work: work + out.evaluations,
    })
}

/// Orders for [`qpd_integral_2d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2d {
    pub u_order: usize,
    pub u_panels: usize,
    pub c_order: usize,
    pub c_panels: usize,
}

impl Default for Grid2d {
    fn default() -> Self {
        Grid2d {
            u_order: 32,
            u_panels: 16,
            c_order: 32,
            c_panels: 64,
        }
    }
}

/// Same quantity as [`qpd_integral`] with the radial integral done by
/// quadrature instead of the closed form. Meant as a cross-check.
pub fn qpd_integral_2d(
    state: &StateSpec,
    offset: &OffsetFunction,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    grid: Grid2d,
) -> Result<f64> {
    check_pure(state)?;
    let form = QuadForm::new(state, offset, s1, s2, t1, t2, units);
    if form.b_relative() < 1e-15 {
        return Ok(form.degenerate_probability());
    }
    let delta = form.delta();
    let urule = crate::special::composite_gauss_legendre(grid.u_order, grid.u_panels, 0.0, FRAC_PI_2)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&u, &wu) in urule.nodes.iter().zip(&urule.weights) {
        let sigma = form.sigma(u);
        if !(sigma.re > 0.0) {
            return Err(Error::NonPositiveSigma { u, re: sigma.re });
        }
        let beta = form.beta_quad(u);
        // the modulus of the integrand peaks near -Re(beta)/Re(sigma)
        let centre = (-beta.re / sigma.re).max(0.0);
        let reach = centre + 14.0 / sigma.re.sqrt();
        let crule = crate::special::composite_gauss_legendre(grid.c_order, grid.c_panels, 0.0, reach)?;
        let inner: Complex64 = crule.integrate_complex(|c| {
            c * (-(sigma * c * c + 2.0 * beta * c + delta) * 0.5).exp()
        });
        acc += wu * inner;
    }
    Ok((form.prefactor() * acc).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::composite_gauss_legendre;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn c_integral_quad(sigma: Complex64, beta: Complex64, delta: Complex64) -> Complex64 {
        let rule = composite_gauss_legendre(30, 200, 0.0, 40.0).unwrap();
        rule.integrate_complex(|x| x * (-(sigma * x * x + 2.0 * beta * x + delta) * 0.5).exp())
    }

    #[test]
    fn c_integral_gaussian_moment() {
        let v = c_integral_closed(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
    }

    #[test]
    fn c_integral_against_quadrature() {
        let cases = [
            (c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            (c(1.0, 0.3), c(0.5, -0.2), c(0.0, 0.1)),
            (c(0.7, -1.1), c(-1.3, 0.4), c(0.2, -0.3)),
            (c(3.0, 2.0), c(-0.2, -2.5), c(-0.4, 0.0)),
        ];
        for (s, b, d) in cases {
            let closed = c_integral_closed(s, b, d).unwrap();
            let quad = c_integral_quad(s, b, d);
            assert!((closed - quad).norm() <= 1e-9 * quad.norm().max(1e-3), "{s} {b} {d}");
        }
    }

    #[test]
    fn c_integral_far_right_half_plane() {
        // large z uses the continued fraction; compare with quadrature
        let (s, b, d) = (c(0.05, 0.01), c(4.0, 0.3), c(0.0, 0.0));
        let closed = c_integral_closed(s, b, d).unwrap();
        let rule = composite_gauss_legendre(30, 400, 0.0, 60.0).unwrap();
        let quad = rule.integrate_complex(|x| x * (-(s * x * x + 2.0 * b * x + d) * 0.5).exp());
        assert!((closed - quad).norm() < 1e-9 * quad.norm(), "{closed} {quad}");
    }

    #[test]
    fn c_integral_rejects_nonpositive_sigma() {
        assert!(c_integral_closed(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(c_integral_closed(c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn degenerate_gaussian_mass() {
        assert!((gaussian_mass(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!((gaussian_mass(0.0, f64::INFINITY) - 0.5).abs() < 1e-15);
        assert!((gaussian_mass(-1.0, 1.0) - 0.682_689_492_137_085_9).abs() < 1e-14);
    }
}
