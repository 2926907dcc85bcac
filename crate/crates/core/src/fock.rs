//! Brute-force evaluation in a truncated Fock basis.
//!
//! `q = Re sum_m w_m <P2(t2) psi_m | P1(t1) psi_m>` with `psi_m = D(xi) S(zeta) |m>`
//! and Heisenberg projectors `P(t) = e^{iHt} P e^{-iHt}`, applied as diagonal
//! phases around the position-space projector. Projector matrix elements
//! come from quadrature of `psi_m psi_n` over the region, never from the
//! closed forms used by the series route.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimate::Estimate;
use crate::measurement::{MeasurementSpec, Sign};
use crate::series::{smooth_cutoff, Summation};
use crate::special::{psi_sequence, unit_rule};
use crate::state::{thermal_cutoff, thermal_weight, StateSpec, UnitsConfig};

/// Largest basis accepted.
pub const MAX_DIM: usize = 600;

const REGION_ORDER: usize = 16;
const REGION_REACH: f64 = 12.0;

/// Dense operator on the first `dim` Fock states.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub dim: usize,
    pub entries: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Largest `|A_mn - conj(A_nm)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let a = &self.entries;
        let mut worst: f64 = 0.0;
        for m in 0..self.dim {
            for n in 0..self.dim {
                worst = worst.max((a[(m, n)] - a[(n, m)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues, assuming the operator is Hermitian.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let e = self.entries.clone().symmetric_eigenvalues();
        let mut v: Vec<f64> = e.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub dim: usize,
    /// extra basis states used while preparing the state
    pub pad: usize,
    /// how the final inner product over the basis is cut off
    pub summation: Summation,
    pub weight_tol: f64,
    pub deficit_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            dim: 400,
            pad: 200,
            summation: Summation::Smooth,
            weight_tol: 1e-12,
            deficit_tol: 1e-8,
        }
    }
}

impl OracleConfig {
    pub fn with_dim(dim: usize) -> Self {
        OracleConfig {
            dim,
            ..Self::default()
        }
    }
}

/// Position-space region as a union of intervals, sampled by Gauss-Legendre.
struct Region {
    dim: usize,
    // the nodes cover the complement; `P = 1 - P_complement`
    complement: bool,
    weights: Vec<f64>,
    // psi_n(x_k) for node k, row-major by node
    psi: Vec<f64>,
}

impl Region {
    fn new(intervals: &[(f64, f64)], dim: usize) -> Region {
        let turning = (2.0 * dim as f64 + 1.0).sqrt();
        let reach = turning + REGION_REACH;
        let width = (std::f64::consts::PI / turning).min(0.5);
        let mut clipped: Vec<(f64, f64)> = intervals
            .iter()
            .map(|&(lo, hi)| (lo.max(-reach), hi.min(reach)))
            .filter(|(lo, hi)| lo < hi)
            .collect();
        clipped.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut gaps = Vec::new();
        let mut edge = -reach;
        for &(lo, hi) in &clipped {
            if lo > edge {
                gaps.push((edge, lo));
            }
            edge = edge.max(hi);
        }
        if edge < reach {
            gaps.push((edge, reach));
        }
        let length = |v: &[(f64, f64)]| v.iter().map(|(lo, hi)| hi - lo).sum::<f64>();
        let complement = length(&gaps) < length(&clipped);
        let sampled = if complement { gaps } else { clipped };
        let rule = unit_rule(REGION_ORDER);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (lo, hi) in sampled {
            let panels = ((hi - lo) / width).ceil() as usize;
            let h = (hi - lo) / panels as f64;
            for p in 0..panels {
                let mid = lo + h * (p as f64 + 0.5);
                for (u, w) in rule.nodes.iter().zip(&rule.weights) {
                    nodes.push(mid + 0.5 * h * u);
                    weights.push(0.5 * h * w);
                }
            }
        }
        let mut psi = vec![0.0; nodes.len() * dim];
        for (k, &x) in nodes.iter().enumerate() {
            psi_sequence(x, &mut psi[k * dim..(k + 1) * dim]);
        }
        Region {
            dim,
            complement,
            weights,
            psi,
        }
    }

    /// `P v` with `P_mn = int_region psi_m psi_n`.
    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for (k, &w) in self.weights.iter().enumerate() {
            let row = &self.psi[k * d..(k + 1) * d];
            let mut at = Complex64::new(0.0, 0.0);
            for (p, c) in row.iter().zip(v) {
                at += c * p;
            }
            at *= w;
            for (o, p) in out.iter_mut().zip(row) {
                *o += at * p;
            }
        }
        if self.complement {
            for (o, c) in out.iter_mut().zip(v) {
                *o = c - *o;
            }
        }
        out
    }

    fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim;
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (k, &w) in self.weights.iter().enumerate() {
            let row = &self.psi[k * d..(k + 1) * d];
            for a in 0..d {
                let wa = w * row[a];
                for b in 0..d {
                    m[(a, b)] += wa * row[b];
                }
            }
        }
        if self.complement {
            m = DMatrix::identity(d, d) - m;
        }
        m
    }
}

fn region_for(meas: &MeasurementSpec, s: Sign, t: f64, units: UnitsConfig) -> Vec<(f64, f64)> {
    let inf = f64::INFINITY;
    match (meas, s) {
        (MeasurementSpec::Sign { offset }, Sign::Plus) => vec![(offset.position_cut(t, units), inf)],
        (MeasurementSpec::Sign { offset }, Sign::Minus) => vec![(-inf, offset.position_cut(t, units))],
        (MeasurementSpec::Window { half_width }, Sign::Plus) => {
            vec![(-inf, -half_width), (*half_width, inf)]
        }
        (MeasurementSpec::Window { half_width }, Sign::Minus) => vec![(-half_width, *half_width)],
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return domain("basis dimension must be positive");
    }
    if dim > MAX_DIM {
        return Err(Error::IndexCap {
            index: dim,
            cap: MAX_DIM,
        });
    }
    Ok(())
}

/// Heisenberg-picture projector `P_s(t)` on the first `dim` states.
pub fn projector_matrix(
    meas: &MeasurementSpec,
    s: Sign,
    t: f64,
    dim: usize,
    units: UnitsConfig,
) -> Result<FockOperator> {
    check_dim(dim)?;
    let region = Region::new(&region_for(meas, s, t, units), dim);
    let real = region.matrix();
    let wt = units.omega * t;
    let entries = DMatrix::from_fn(dim, dim, |m, n| {
        Complex64::from_polar(real[(m, n)], (m as f64 - n as f64) * wt)
    });
    Ok(FockOperator { dim, entries })
}

/// `exp(A) v` for a generator given as a matrix-free map, by repeated short
/// Taylor steps. `norm` bounds the generator on the vectors it meets.
fn expv(apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>, norm: f64, v: &[Complex64]) -> Vec<Complex64> {
    // each step has generator norm <= 4, where 60 terms leave < 1e-40
    let steps = (norm / 4.0).ceil().max(1.0) as usize;
    let scale = 1.0 / steps as f64;
    let mut cur = v.to_vec();
    for _ in 0..steps {
        let mut term = cur.clone();
        let mut acc = cur.clone();
        for k in 1..60 {
            let next = apply(&term);
            let f = scale / k as f64;
            let mut size: f64 = 0.0;
            for (t, n) in term.iter_mut().zip(next) {
                *t = n * f;
                size = size.max(t.norm());
            }
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            if size < 1e-18 {
                break;
            }
        }
        cur = acc;
    }
    cur
}

/// `a v`, `a^dag v` on a truncated basis.
fn lower(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 1 {
        out[k] = v[k + 1] * ((k + 1) as f64).sqrt();
    }
    out
}

fn raise(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n {
        out[k] = v[k - 1] * (k as f64).sqrt();
    }
    out
}

/// `D(xi) S(zeta) |m>` on `n` basis states, with
/// `S = exp((zeta a^dag^2 - zeta^* a^2)/2)` and `D = exp(xi a^dag - xi^* a)`.
fn displaced_squeezed_number(state: &StateSpec, m: usize, n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[m] = Complex64::new(1.0, 0.0);
    let zeta = Complex64::from_polar(state.r, state.theta0);
    let nf = n as f64;
    if state.r > 0.0 {
        let gen = |x: &[Complex64]| -> Vec<Complex64> {
            let up = raise(&raise(x));
            let down = lower(&lower(x));
            up.iter()
                .zip(&down)
                .map(|(u, d)| 0.5 * (zeta * u - zeta.conj() * d))
                .collect()
        };
        v = expv(&gen, state.r * nf, &v);
    }
    let xi = state.xi;
    if xi.norm() > 0.0 {
        let gen = |x: &[Complex64]| -> Vec<Complex64> {
            let up = raise(x);
            let down = lower(x);
            up.iter()
                .zip(&down)
                .map(|(u, d)| xi * u - xi.conj() * d)
                .collect()
        };
        v = expv(&gen, 2.0 * xi.norm() * nf.sqrt(), &v);
    }
    v
}

/// `(w_m, D S |m>)` truncated to `cfg.dim`, for every retained thermal row.
pub fn state_vectors(state: &StateSpec, cfg: &OracleConfig) -> Result<Vec<(f64, Vec<Complex64>)>> {
    check_dim(cfg.dim)?;
    let n = cfg.dim + cfg.pad;
    let m_max = thermal_cutoff(state.n_th, cfg.weight_tol);
    let mut out = Vec::with_capacity(m_max + 1);
    let mut deficit = 0.0;
    // Raising D S |0> with D S a^dag S^dag D^dag is cheaper but amplifies
    // rounding at high indices without bound, so every row is built directly.
    for m in 0..=m_max {
        let cur = displaced_squeezed_number(state, m, n);
        let w = thermal_weight(m, state.n_th);
        let kept: f64 = cur[..cfg.dim].iter().map(|c| c.norm_sqr()).sum();
        deficit += w * (1.0 - kept).max(0.0);
        out.push((w, cur[..cfg.dim].to_vec()));
    }
    if deficit > cfg.deficit_tol {
        return Err(Error::TraceDeficit {
            dim: cfg.dim,
            deficit,
        });
    }
    Ok(out)
}

/// Density matrix on the first `dim` states.
pub fn rho_fock(state: &StateSpec, cfg: &OracleConfig) -> Result<FockOperator> {
    let dim = cfg.dim;
    let mut entries = DMatrix::<Complex64>::zeros(dim, dim);
    for (w, v) in state_vectors(state, cfg)? {
        for a in 0..dim {
            let wa = w * v[a];
            for b in 0..dim {
                entries[(a, b)] += wa * v[b].conj();
            }
        }
    }
    Ok(FockOperator { dim, entries })
}

/// `q_{s1 s2}(t1, t2) = Re Tr[P2(t2) P1(t1) rho]` in the truncated basis.
///
/// `error` is the trace deficit of the state plus the thermal weight dropped.
pub fn qpd_oracle(
    state: &StateSpec,
    meas: &MeasurementSpec,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    units: UnitsConfig,
    cfg: &OracleConfig,
) -> Result<Estimate> {
    if !(t1.is_finite() && t2.is_finite()) {
        return domain("times must be finite");
    }
    let vectors = state_vectors(state, cfg)?;
    let dim = cfg.dim;
    let r1 = Region::new(&region_for(meas, s1, t1, units), dim);
    let r2 = Region::new(&region_for(meas, s2, t2, units), dim);
    let cutoff: Vec<f64> = (0..dim)
        .map(|n| match cfg.summation {
            Summation::Smooth => smooth_cutoff(n, dim - 1),
            Summation::Sharp => 1.0,
        })
        .collect();
    let heisenberg = |region: &Region, t: f64, v: &[Complex64]| -> Vec<Complex64> {
        let wt = units.omega * t;
        let u: Vec<Complex64> = v
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, -(n as f64) * wt))
            .collect();
        region
            .apply(&u)
            .into_iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * wt))
            .collect()
    };
    let mut value = 0.0;
    let mut deficit = 0.0;
    let mut total = 0.0;
    for (w, v) in &vectors {
        let a = heisenberg(&r1, t1, v);
        let b = heisenberg(&r2, t2, v);
        let inner: f64 = (0..dim).map(|n| cutoff[n] * (b[n].conj() * a[n]).re).sum();
        value += w * inner;
        total += w;
        deficit += w * (1.0 - v.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(0.0);
    }
    Ok(Estimate {
        value,
        error: deficit + (1.0 - total).max(0.0),
        converged: true,
        work: vectors.len() * dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{gamma_from, OffsetFunction};

    const U: UnitsConfig = UnitsConfig { omega: 1.0 };

    fn mean_a(v: &[Complex64]) -> Complex64 {
        let l = lower(v);
        v.iter().zip(&l).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn ground_state_is_vacuum() {
        let cfg = OracleConfig::with_dim(20);
        let rho = rho_fock(&StateSpec::ground(), &cfg).unwrap();
        assert!((rho.entries[(0, 0)] - 1.0).norm() < 1e-15);
        assert!(rho.entries.iter().skip(1).all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn coherent_mean() {
        let s = StateSpec::new(Complex64::new(1.0, 0.0), 0.0, 0.0, 0.0).unwrap();
        let v = &state_vectors(&s, &OracleConfig::with_dim(60)).unwrap()[0].1;
        assert!((mean_a(v) - 1.0).norm() < 1e-9);
    }

    #[test]
    fn squeezed_mean_is_xi() {
        // <a> in D(xi) S |0> is xi; gamma is the amplitude in the other order
        let xi = Complex64::new(0.389, 1.361);
        let s = StateSpec::new(xi, 1.0, std::f64::consts::FRAC_PI_3, 0.0).unwrap();
        let v = displaced_squeezed_number(&s, 0, 200);
        assert!((mean_a(&v) - xi).norm() < 1e-9);
        // S D(gamma) |0> has the same mean
        let g = gamma_from(xi, s.r, s.theta0);
        let zeta = Complex64::from_polar(s.r, s.theta0);
        let mut w = vec![Complex64::new(0.0, 0.0); 200];
        w[0] = Complex64::new(1.0, 0.0);
        let disp = |x: &[Complex64]| -> Vec<Complex64> {
            let up = raise(x);
            let down = lower(x);
            up.iter().zip(&down).map(|(u, d)| g * u - g.conj() * d).collect()
        };
        w = expv(&disp, 2.0 * g.norm() * 200f64.sqrt(), &w);
        let sq = |x: &[Complex64]| -> Vec<Complex64> {
            let up = raise(&raise(x));
            let down = lower(&lower(x));
            up.iter().zip(&down).map(|(u, d)| 0.5 * (zeta * u - zeta.conj() * d)).collect()
        };
        w = expv(&sq, s.r * 200.0, &w);
        let overlap: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn thermal_state_is_a_density_matrix() {
        let s = StateSpec::from_x0p0(0.5, -0.3, 0.4, 0.9, 0.5).unwrap();
        let rho = rho_fock(&s, &OracleConfig::with_dim(80)).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-8);
        assert!(rho.hermiticity_defect() < 1e-12);
        assert!(rho.hermitian_eigenvalues()[0] > -1e-10);
    }

    #[test]
    fn small_basis_reports_deficit() {
        let s = StateSpec::from_x0p0(6.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let cfg = OracleConfig {
            dim: 10,
            ..OracleConfig::default()
        };
        assert!(matches!(state_vectors(&s, &cfg), Err(Error::TraceDeficit { .. })));
    }

    #[test]
    fn projector_examples() {
        let whole = MeasurementSpec::Sign {
            offset: OffsetFunction::new(0.0, 0.0, -200.0).unwrap(),
        };
        let p = projector_matrix(&whole, Sign::Plus, 0.3, 30, U).unwrap();
        for m in 0..30 {
            for n in 0..30 {
                let id = if m == n { 1.0 } else { 0.0 };
                assert!((p.entries[(m, n)] - id).norm() < 1e-9);
            }
        }
        let win = MeasurementSpec::window(1.02).unwrap();
        let a = projector_matrix(&win, Sign::Plus, 0.7, 40, U).unwrap();
        let b = projector_matrix(&win, Sign::Minus, 0.7, 40, U).unwrap();
        let sum = &a.entries + &b.entries;
        for m in 0..40 {
            for n in 0..40 {
                let id = if m == n { 1.0 } else { 0.0 };
                assert!((sum[(m, n)] - id).norm() < 1e-9);
            }
        }
        let sign = projector_matrix(&MeasurementSpec::sign(), Sign::Plus, 0.0, 50, U).unwrap();
        let expect = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((sign.entries[(0, 1)].re - expect).abs() < 1e-9);
        assert!(sign.hermiticity_defect() < 1e-12);
        assert!(projector_matrix(&win, Sign::Plus, 0.0, 601, U).is_err());
    }

    #[test]
    fn ground_state_quarter_period() {
        // time reversal makes Re<sgn p sgn x> vanish in the vacuum
        let g = StateSpec::ground();
        let cfg = OracleConfig::with_dim(100);
        let meas = MeasurementSpec::sign();
        let t2 = std::f64::consts::FRAC_PI_2;
        let pp = qpd_oracle(&g, &meas, Sign::Plus, Sign::Plus, 0.0, t2, U, &cfg).unwrap();
        assert!((pp.value - 0.25).abs() < 1e-9, "{pp:?}");
    }
}
