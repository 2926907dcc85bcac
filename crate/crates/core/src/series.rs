//! Eigenbasis series route.
//!
//! In the frame `S^dag D^dag ... D S` the projector at time `t` becomes a
//! half-line (or window) indicator of the rotated quadrature
//! `x_phi = U(phi)^dag x U(phi)`, `phi = omega t + beta(t)`, cut at
//! `(x_xi(t) - xbar(t)/sqrt 2) / lambda(t)`. Its Fock matrix elements are
//! `e^{i(k-l)phi}` times `J_kl`, which gives
//!
//! `q = sum_m w_m sum_n cos((m - n) Delta phi) T2_mn T1_nm`
//!
//! with `T_mn = s J_mn(-c, inf)` off the diagonal, `J_mm(-c, inf)` on it for
//! `s = +1` and `1 - J_mm(-c, inf)` for `s = -1`. For pure states only `m = 0`
//! survives and the `n = 0` term is `(1 + s1 erf c1)(1 + s2 erf c2)/4`.
//!
//! The terms fall off like `n^{-3/2}`, so plain partial sums converge slowly.
//! By default they are summed with a smooth cutoff `f(n/N)` that is `1` up to
//! `N/2` and decays to `0` at `N` with all derivatives continuous, and `N`
//! is doubled until successive sums agree.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimate::Estimate;
use crate::integral::gaussian_mass;
use crate::jmatrix::{build_jtable_with_cap, j0_row};
use crate::measurement::{MeasurementSpec, Sign};
use crate::special::{erf_real, psi_sequence};
use crate::state::{
    lambda_of, phase_beta_of, thermal_cutoff, thermal_weight, x_xi_of, OffsetFunction, StateSpec,
    UnitsConfig,
};

/// How partial sums are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    /// smooth cutoff, flat up to `n_max/2`
    Smooth,
    /// plain partial sum up to `n_max`
    Sharp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub n_max: usize,
    pub tail_tol: f64,
    /// thermal rows; `None` picks the smallest with weight tail below `weight_tol`
    pub m_max: Option<usize>,
    pub weight_tol: f64,
    pub summation: Summation,
    /// double `n_max` until the error indicator is below `tail_tol`
    pub adaptive: bool,
    pub n_cap: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            n_max: 200,
            tail_tol: 1e-8,
            m_max: None,
            weight_tol: 1e-12,
            summation: Summation::Smooth,
            adaptive: true,
            n_cap: 1 << 15,
        }
    }
}

impl TruncationConfig {
    /// Fixed plain partial sum to `n_max`.
    pub fn sharp(n_max: usize) -> Self {
        TruncationConfig {
            n_max,
            summation: Summation::Sharp,
            adaptive: false,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return domain("n_max must be at least 1");
        }
        if !(self.tail_tol > 0.0) {
            return domain("tail_tol must be positive");
        }
        if self.n_max > self.n_cap {
            return Err(Error::IndexCap {
                index: self.n_max,
                cap: self.n_cap,
            });
        }
        Ok(())
    }
}

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Weight of term `n` in a smooth sum of order `n_max`.
pub fn smooth_cutoff(n: usize, n_max: usize) -> f64 {
    let x = n as f64 / n_max as f64;
    if x <= 0.5 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let y = 2.0 * x - 1.0;
    let a = bump(1.0 - y);
    a / (a + bump(y))
}

/// Conservative bound on `sum_{n > N} |term_n|` from a geometric fit to the
/// running envelope `max_{k >= n} |term_k|` of the last half of `terms`.
///
/// Returns infinity when the envelope does not decay.
pub fn series_tail_estimate(terms: &[f64]) -> Result<f64> {
    if terms.len() < 8 {
        return domain(format!("need at least 8 terms, got {}", terms.len()));
    }
    let mut env = vec![0.0; terms.len()];
    let mut run: f64 = 0.0;
    for i in (0..terms.len()).rev() {
        run = run.max(terms[i].abs());
        env[i] = run;
    }
    let last = env[terms.len() - 1];
    if last == 0.0 {
        return Ok(0.0);
    }
    let start = terms.len() / 2;
    let pts: Vec<(f64, f64)> = (start..terms.len())
        .filter(|&i| env[i] > 0.0)
        .map(|i| (i as f64, env[i].ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let ratio = (sxy / sxx).exp();
    if !(ratio < 1.0) {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * last * ratio / (1.0 - ratio))
}

/// Sums `terms(N)` (indices `0 ..= N`) under `trunc`.
fn run_series(trunc: &TruncationConfig, terms: &dyn Fn(usize) -> Result<Vec<f64>>) -> Result<Estimate> {
    trunc.validate()?;
    let sum_at = |n_max: usize| -> Result<(f64, Vec<f64>)> {
        let t = terms(n_max)?;
        let s = match trunc.summation {
            Summation::Sharp => t.iter().sum(),
            Summation::Smooth => t
                .iter()
                .enumerate()
                .map(|(n, v)| smooth_cutoff(n, n_max) * v)
                .sum(),
        };
        Ok((s, t))
    };
    let mut n = trunc.n_max;
    let (mut value, t) = sum_at(n)?;
    let mut work = n + 1;
    let mut error = match trunc.summation {
        Summation::Sharp => series_tail_estimate(&t[1..]).unwrap_or(f64::INFINITY),
        Summation::Smooth => f64::INFINITY,
    };
    if !trunc.adaptive {
        return Ok(Estimate {
            value,
            error,
            converged: error <= trunc.tail_tol,
            work,
        });
    }
    while error > trunc.tail_tol && 2 * n <= trunc.n_cap {
        n *= 2;
        let (next, t) = sum_at(n)?;
        work += n + 1;
        error = match trunc.summation {
            Summation::Sharp => series_tail_estimate(&t[1..]).unwrap_or(f64::INFINITY),
            Summation::Smooth => (next - value).abs(),
        };
        value = next;
    }
    Ok(Estimate {
        value,
        error,
        converged: error <= trunc.tail_tol,
        work,
    })
}

/// Cut and rotation phase of the sign projector at time `t`.
fn sign_frame(state: &StateSpec, offset: &OffsetFunction, t: f64, units: UnitsConfig) -> (f64, f64) {
    let lam = lambda_of(t, state.r, state.theta0, units);
    let cut = (x_xi_of(t, state.xi, units) - offset.position_cut(t, units)) / lam;
    let phase = units.omega * t + phase_beta_of(t, state.r, state.theta0, units);
    (cut, phase)
}

/// Below this distance of `dphi` from a multiple of `pi` the two projectors
/// commute and the series is replaced by the exact interval mass.
const COMMUTING_TOL: f64 = 1e-14;

/// `Some(odd)` when `dphi` is a multiple `k pi` of `pi`, with `odd = k % 2 == 1`.
fn commuting_parity(dphi: f64) -> Option<bool> {
    let k = (dphi / PI).round();
    ((dphi - k * PI).abs() <= COMMUTING_TOL).then(|| k.rem_euclid(2.0) == 1.0)
}

type Intervals = Vec<(f64, f64)>;

fn sign_region(s: f64, c: f64, flipped: bool) -> Intervals {
    let inf = f64::INFINITY;
    match (s > 0.0, flipped) {
        (true, false) => vec![(-c, inf)],
        (false, false) => vec![(-inf, -c)],
        (true, true) => vec![(-inf, c)],
        (false, true) => vec![(c, inf)],
    }
}

fn window_region(s: f64, c: f64) -> Intervals {
    if s > 0.0 {
        vec![(f64::NEG_INFINITY, -c), (c, f64::INFINITY)]
    } else {
        vec![(-c, c)]
    }
}

/// Mass of `a ∩ b` under the density `exp(-y^2/v)/sqrt(pi v)`.
fn overlap_mass(a: &Intervals, b: &Intervals, v: f64) -> f64 {
    let scale = (2.0 / v).sqrt();
    let mut total = 0.0;
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if lo < hi {
                total += gaussian_mass(lo * scale, hi * scale);
            }
        }
    }
    total
}

fn pure_sign_series(
    state: &StateSpec,
    offset: &OffsetFunction,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    trunc: &TruncationConfig,
) -> Result<Estimate> {
    let (c1, p1) = sign_frame(state, offset, t1, units);
    let (c2, p2) = sign_frame(state, offset, t2, units);
    let (s1, s2) = (s1.value(), s2.value());
    let dphi = p2 - p1;
    if let Some(odd) = commuting_parity(dphi) {
        let q = overlap_mass(&sign_region(s1, c1, false), &sign_region(s2, c2, odd), 1.0);
        return Ok(Estimate::exact(q));
    }
    let head = 0.25 * (1.0 + s1 * erf_real(c1)) * (1.0 + s2 * erf_real(c2));
    let terms = |n_max: usize| -> Result<Vec<f64>> {
        let j1 = j0_row(-c1, n_max);
        let j2 = j0_row(-c2, n_max);
        let mut t = vec![0.0; n_max + 1];
        t[0] = head;
        for n in 1..=n_max {
            t[n] = s1 * s2 * (n as f64 * dphi).cos() * j1[n] * j2[n];
        }
        Ok(t)
    };
    run_series(trunc, &terms)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Unsupported(msg.into()))
    }
}

/// Coherent state (`r = 0`, `n_th = 0`), sign projector without offset.
pub fn qpd_series_coherent(
    state: &StateSpec,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    trunc: &TruncationConfig,
) -> Result<Estimate> {
    require(state.r == 0.0 && state.n_th == 0.0, "coherent series needs r = 0 and n_th = 0")?;
    pure_sign_series(state, &OffsetFunction::zero(), s1, s2, t1, t2, units, trunc)
}

/// Pure squeezed coherent state, sign projector with optional offset.
pub fn qpd_series_squeezed(
    state: &StateSpec,
    offset: &OffsetFunction,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    trunc: &TruncationConfig,
) -> Result<Estimate> {
    require(state.n_th == 0.0, "squeezed series needs n_th = 0; use the thermal series")?;
    pure_sign_series(state, offset, s1, s2, t1, t2, units, trunc)
}

/// Thermal squeezed coherent state, sign projector with optional offset.
///
/// The `m` sum stops where the thermal weight left out drops below
/// `trunc.weight_tol` (or at `trunc.m_max`); that remainder is added to the
/// reported error.
pub fn qpd_series_thermal(
    state: &StateSpec,
    offset: &OffsetFunction,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    trunc: &TruncationConfig,
) -> Result<Estimate> {
    let m_max = trunc
        .m_max
        .unwrap_or_else(|| thermal_cutoff(state.n_th, trunc.weight_tol));
    let weights: Vec<f64> = (0..=m_max).map(|m| thermal_weight(m, state.n_th)).collect();
    let dropped = 1.0 - weights.iter().sum::<f64>();
    let (c1, p1) = sign_frame(state, offset, t1, units);
    let (c2, p2) = sign_frame(state, offset, t2, units);
    let dphi = p2 - p1;
    let (v1, v2) = (s1.value(), s2.value());
    if let Some(odd) = commuting_parity(dphi) {
        let var = 2.0 * state.n_th + 1.0;
        let q = overlap_mass(&sign_region(v1, c1, false), &sign_region(v2, c2, odd), var);
        return Ok(Estimate::exact(q));
    }
    let rows = m_max + 1;
    // keep every diagonal inside the flat part of the cutoff
    let mut cfg = *trunc;
    cfg.n_max = cfg.n_max.max(4 * rows).min(cfg.n_cap);
    let terms = |n_max: usize| -> Result<Vec<f64>> {
        let j1 = build_jtable_with_cap(-c1, rows, n_max, trunc.n_cap)?;
        let j2 = build_jtable_with_cap(-c2, rows, n_max, trunc.n_cap)?;
        let entry = |s: f64, j: &crate::jmatrix::JTable, m: usize, n: usize| {
            if m != n {
                s * j.get(m, n)
            } else if s > 0.0 {
                j.get(m, m)
            } else {
                1.0 - j.get(m, m)
            }
        };
        let mut t = vec![0.0; n_max + 1];
        for (m, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (n, slot) in t.iter_mut().enumerate() {
                let phase = ((m as f64 - n as f64) * dphi).cos();
                *slot += w * phase * entry(v2, &j2, m, n) * entry(v1, &j1, n, m);
            }
        }
        Ok(t)
    };
    let mut est = run_series(&cfg, &terms)?;
    est.error += dropped.max(0.0);
    est.converged = est.error <= trunc.tail_tol.max(trunc.weight_tol);
    Ok(est)
}

/// Squeezed vacuum measured with the window projector `|x| > L` (`s = +1`).
pub fn qpd_series_window(
    state: &StateSpec,
    half_width: f64,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    trunc: &TruncationConfig,
) -> Result<Estimate> {
    require(
        state.xi.norm() == 0.0 && state.n_th == 0.0,
        "window series covers squeezed vacuum only",
    )?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return domain(format!("window half-width must be positive, got {half_width}"));
    }
    let lam1 = lambda_of(t1, state.r, state.theta0, units);
    let lam2 = lambda_of(t2, state.r, state.theta0, units);
    let (c1, c2) = (half_width / lam1, half_width / lam2);
    let dphi = units.omega * (t2 - t1) + phase_beta_of(t2, state.r, state.theta0, units)
        - phase_beta_of(t1, state.r, state.theta0, units);
    let (v1, v2) = (s1.value(), s2.value());
    if commuting_parity(dphi).is_some() {
        let q = overlap_mass(&window_region(v1, c1), &window_region(v2, c2), 1.0);
        return Ok(Estimate::exact(q));
    }
    let head = 0.25 * (1.0 + v1 * (1.0 - 2.0 * erf_real(c1))) * (1.0 + v2 * (1.0 - 2.0 * erf_real(c2)));
    // J_0n(c) - J_0n(-c) = 2 psi_0(c) psi_{n-1}(c) / sqrt(2n) for even n, 0 for odd n
    let g = |c: f64, n_max: usize| {
        let mut psi = vec![0.0; n_max];
        psi_sequence(c, &mut psi);
        let mut out = vec![0.0; n_max + 1];
        for n in (2..=n_max).step_by(2) {
            out[n] = SQRT_2 * psi[0] * psi[n - 1] / (n as f64).sqrt();
        }
        out
    };
    let terms = |n_max: usize| -> Result<Vec<f64>> {
        let g1 = g(c1, n_max);
        let g2 = g(c2, n_max);
        let mut t = vec![0.0; n_max + 1];
        t[0] = head;
        for n in (2..=n_max).step_by(2) {
            t[n] = v1 * v2 * (n as f64 * dphi).cos() * g1[n] * g2[n];
        }
        Ok(t)
    };
    run_series(trunc, &terms)
}

/// Picks the series evaluator that matches the state and projector.
pub fn qpd_series(
    state: &StateSpec,
    meas: &MeasurementSpec,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    trunc: &TruncationConfig,
) -> Result<Estimate> {
    if !(t1.is_finite() && t2.is_finite()) {
        return domain("times must be finite");
    }
    match meas {
        MeasurementSpec::Window { half_width } => {
            qpd_series_window(state, *half_width, s1, s2, t1, t2, units, trunc)
        }
        MeasurementSpec::Sign { offset } => {
            if state.n_th > 0.0 {
                qpd_series_thermal(state, offset, s1, s2, t1, t2, units, trunc)
            } else {
                qpd_series_squeezed(state, offset, s1, s2, t1, t2, units, trunc)
            }
        }
    }
}
