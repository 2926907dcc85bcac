//! Grid scans and minimization over `t2` and the state parameters.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measurement::{MeasurementSpec, Sign};
use crate::route::{evaluate, Controls, Route};
use crate::state::{n_th_from_temp_ratio, OffsetFunction, StateSpec, UnitsConfig};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct T2Search {
    pub t2_min: f64,
    pub t2_max: f64,
    pub coarse_steps: usize,
    pub refine_iters: usize,
}

impl Default for T2Search {
    fn default() -> Self {
        T2Search {
            t2_min: 0.0,
            t2_max: TAU,
            coarse_steps: 200,
            refine_iters: 40,
        }
    }
}

impl T2Search {
    fn validate(&self) -> Result<()> {
        if !(self.t2_min.is_finite() && self.t2_max.is_finite() && self.t2_max > self.t2_min) {
            return domain("t2_search needs finite t2_min < t2_max");
        }
        if self.coarse_steps < 2 {
            return domain("t2_search.coarse_steps must be at least 2");
        }
        Ok(())
    }
}

/// Coarse scan of `f` on the `t2` grid, then golden-section refinement in the
/// bracket around the best grid point. Failed evaluations count as `+inf`;
/// the call fails only when every grid point fails.
pub fn minimize_over_t2(f: &dyn Fn(f64) -> Result<f64>, search: &T2Search) -> Result<(f64, f64)> {
    search.validate()?;
    let n = search.coarse_steps;
    let h = (search.t2_max - search.t2_min) / (n - 1) as f64;
    let grid = |i: usize| search.t2_min + h * i as f64;
    let mut best = (f64::INFINITY, f64::NAN);
    let mut best_i = 0;
    let mut last_err = None;
    for i in 0..n {
        match f(grid(i)) {
            Ok(v) if v < best.0 => {
                best = (v, grid(i));
                best_i = i;
            }
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    if !best.0.is_finite() {
        return Err(last_err.unwrap_or_else(|| Error::Domain("objective not finite".into())));
    }
    let mut a = grid(best_i.saturating_sub(1));
    let mut b = grid((best_i + 1).min(n - 1));
    let eval = |t: f64| f(t).unwrap_or(f64::INFINITY);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..search.refine_iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    for (v, t) in [(fc, c), (fd, d)] {
        if v < best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// Options for [`global_minimize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalOptions {
    /// coarse grid points per dimension
    pub grid_steps: Vec<usize>,
    /// number of best grid points refined locally
    pub starts: usize,
    /// budget per local search
    pub max_evals: usize,
    /// stop when the simplex values spread less than this
    pub ftol: f64,
}

impl GlobalOptions {
    pub fn uniform(dims: usize, steps: usize) -> Self {
        GlobalOptions {
            grid_steps: vec![steps; dims],
            starts: 4,
            max_evals: 400,
            ftol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: Vec<f64>,
    pub start_value: f64,
    pub arg: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalResult {
    pub value: f64,
    pub arg: Vec<f64>,
    pub starts: Vec<StartOutcome>,
    pub grid_evaluations: usize,
}

fn grid_points(bounds: &[(f64, f64)], steps: &[usize]) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::new()];
    for (&(lo, hi), &n) in bounds.iter().zip(steps) {
        let axis: Vec<f64> = if n <= 1 || lo == hi {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    pts
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Nelder-Mead restricted to the box by clamping trial points.
fn nelder_mead(
    f: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    start: &[f64],
    step: &[f64],
    bounds: &[(f64, f64)],
    max_evals: usize,
    ftol: f64,
) -> (Vec<f64>, f64, usize) {
    let dim = start.len();
    let eval = |x: &[f64]| f(x).ok().filter(|v| v.is_finite()).unwrap_or(f64::INFINITY);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), eval(start)));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += step[i];
        if x[i] > bounds[i].1 {
            x[i] = start[i] - step[i];
        }
        clamp(&mut x, bounds);
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut evals = dim + 1;
    let point = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        let mut x: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
        clamp(&mut x, bounds);
        x
    };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (simplex[0].1, simplex[dim].1);
        if (hi - lo).abs() <= ftol {
            break;
        }
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let worst = simplex[dim].0.clone();
        let refl = point(&worst, &centroid, 2.0);
        let fr = eval(&refl);
        evals += 1;
        if fr < simplex[0].1 {
            let exp = point(&worst, &centroid, 3.0);
            let fe = eval(&exp);
            evals += 1;
            simplex[dim] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (refl, fr);
        } else {
            let (con, fcon) = if fr < simplex[dim].1 {
                let x = point(&worst, &centroid, 1.5);
                let v = eval(&x);
                (x, v)
            } else {
                let x = point(&worst, &centroid, 0.5);
                let v = eval(&x);
                (x, v)
            };
            evals += 1;
            if fcon < simplex[dim].1.min(fr) {
                simplex[dim] = (con, fcon);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = point(&best, &entry.0, 0.5);
                    let v = eval(&x);
                    *entry = (x, v);
                }
                evals += dim;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v, evals)
}

/// Multi-start minimization over a box: coarse grid, then Nelder-Mead from
/// the best `opts.starts` grid points. Every start is reported.
pub fn global_minimize(
    f: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    bounds: &[(f64, f64)],
    opts: &GlobalOptions,
) -> Result<GlobalResult> {
    if bounds.is_empty() || bounds.len() != opts.grid_steps.len() {
        return domain("bounds and grid_steps must have the same nonzero length");
    }
    if bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return domain("each bound needs finite lo <= hi");
    }
    let pts = grid_points(bounds, &opts.grid_steps);
    let values: Vec<f64> = pts
        .par_iter()
        .map(|p| f(p).ok().filter(|v| v.is_finite()).unwrap_or(f64::INFINITY))
        .collect();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    if !values[order[0]].is_finite() {
        return domain("objective failed on every grid point");
    }
    let step: Vec<f64> = bounds
        .iter()
        .zip(&opts.grid_steps)
        .map(|(&(lo, hi), &n)| if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 })
        .collect();
    let degenerate = step.iter().all(|&s| s == 0.0);
    let starts: Vec<StartOutcome> = order
        .iter()
        .take(opts.starts.max(1))
        .filter(|&&i| values[i].is_finite())
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&i| {
            if degenerate {
                return StartOutcome {
                    start: pts[i].clone(),
                    start_value: values[i],
                    arg: pts[i].clone(),
                    value: values[i],
                    evaluations: 0,
                };
            }
            let (arg, value, evaluations) =
                nelder_mead(f, &pts[i], &step, bounds, opts.max_evals, opts.ftol);
            let (arg, value) = if value <= values[i] {
                (arg, value)
            } else {
                (pts[i].clone(), values[i])
            };
            StartOutcome {
                start: pts[i].clone(),
                start_value: values[i],
                arg,
                value,
                evaluations,
            }
        })
        .collect();
    let best = starts
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");
    Ok(GlobalResult {
        value: best.value,
        arg: best.arg.clone(),
        grid_evaluations: pts.len(),
        starts: starts.clone(),
    })
}

/// Which pair of parameters spans the scan plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    /// phase-space centre `(x0, p0)`, sign projector
    #[serde(rename = "x0p0")]
    X0P0,
    /// squeeze magnitude `r` and window half-width `L`
    #[serde(rename = "rL")]
    RL,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.min];
        }
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.steps == 0 || !(self.min.is_finite() && self.max.is_finite()) {
            return domain(format!("{name}: need finite bounds and steps >= 1"));
        }
        if self.steps > 1 && !(self.max > self.min) {
            return domain(format!("{name}: need max > min when steps > 1"));
        }
        Ok(())
    }
}

fn default_omega() -> f64 {
    1.0
}

/// Everything a plane scan needs. Field names are the config-file keys.
///
/// Times (`t1` and the `t2_search` bounds) are given and reported as `omega t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub plane: Plane,
    pub axis1: Axis,
    pub axis2: Axis,
    pub s1: Sign,
    pub s2: Sign,
    #[serde(default)]
    pub t1: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default)]
    pub n_th: Option<f64>,
    /// `k_B T / (hbar omega)`; converted to `n_th`
    #[serde(default)]
    pub temp_ratio: Option<f64>,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub p0: f64,
    #[serde(default)]
    pub offset: Option<OffsetFunction>,
    #[serde(default)]
    pub t2_search: T2Search,
    pub route: Route,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default)]
    pub controls: Controls,
}

impl ScanConfig {
    pub fn n_th(&self) -> Result<f64> {
        match (self.n_th, self.temp_ratio) {
            (Some(_), Some(_)) => domain("give n_th or temp_ratio, not both"),
            (Some(n), None) => Ok(n),
            (None, Some(t)) => n_th_from_temp_ratio(t),
            (None, None) => Ok(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate("axis1")?;
        self.axis2.validate("axis2")?;
        self.t2_search.validate()?;
        UnitsConfig::new(self.omega)?;
        let n_th = self.n_th()?;
        let (a1, a2) = (self.axis1, self.axis2);
        let probe = self.cell(a1.min, a2.min, n_th)?;
        self.cell(a1.max, a2.max, n_th)?;
        if !self.route.supports(&probe.0, &probe.1) {
            return Err(Error::Unsupported(format!(
                "route {} cannot evaluate this scan",
                self.route
            )));
        }
        Ok(())
    }

    fn cell(&self, v1: f64, v2: f64, n_th: f64) -> Result<(StateSpec, MeasurementSpec)> {
        match self.plane {
            Plane::X0P0 => {
                let state = StateSpec::from_x0p0(v1, v2, self.r, self.theta0, n_th)?;
                let meas = MeasurementSpec::Sign {
                    offset: self.offset.unwrap_or_default(),
                };
                Ok((state, meas))
            }
            Plane::RL => {
                let state = StateSpec::from_x0p0(self.x0, self.p0, v1, self.theta0, n_th)?;
                Ok((state, MeasurementSpec::window(v2)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub axis1: f64,
    pub axis2: f64,
    /// `NaN` when the cell failed
    pub q_min: f64,
    pub t2_argmin: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalPoint {
    pub axis1: f64,
    pub axis2: f64,
    pub q_min: f64,
    pub t2_argmin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// row-major: `axis1` outer, `axis2` inner
    pub cells: Vec<CellResult>,
    pub global: Option<GlobalPoint>,
    pub failed: usize,
}

impl ScanResult {
    /// `axis1,axis2,q_min,t2_argmin` with 17 significant digits; failures are `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis1,axis2,q_min,t2_argmin\n");
        let fmt = |v: f64| {
            if v.is_nan() {
                "nan".to_string()
            } else {
                format!("{v:.16e}")
            }
        };
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt(c.axis1),
                fmt(c.axis2),
                fmt(c.q_min),
                fmt(c.t2_argmin)
            );
        }
        out
    }
}

fn scan_cell(config: &ScanConfig, n_th: f64, v1: f64, v2: f64) -> CellResult {
    let units = UnitsConfig { omega: config.omega };
    let run = || -> Result<(f64, f64)> {
        let (state, meas) = config.cell(v1, v2, n_th)?;
        let f = |wt2: f64| -> Result<f64> {
            Ok(evaluate(
                config.route,
                &state,
                &meas,
                config.s1,
                config.s2,
                config.t1 / config.omega,
                wt2 / config.omega,
                units,
                &config.controls,
            )?
            .value)
        };
        minimize_over_t2(&f, &config.t2_search)
    };
    match run() {
        Ok((q, t)) => CellResult {
            axis1: v1,
            axis2: v2,
            q_min: q,
            t2_argmin: t,
            error: None,
        },
        Err(e) => CellResult {
            axis1: v1,
            axis2: v2,
            q_min: f64::NAN,
            t2_argmin: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// Evaluates every grid cell (in parallel on the current rayon pool) and
/// reduces in grid order, so the result does not depend on scheduling.
pub fn scan_plane(config: &ScanConfig) -> Result<ScanResult> {
    config.validate()?;
    let n_th = config.n_th()?;
    let coords: Vec<(f64, f64)> = config
        .axis1
        .values()
        .into_iter()
        .flat_map(|a| config.axis2.values().into_iter().map(move |b| (a, b)))
        .collect();
    let cells: Vec<CellResult> = coords
        .par_iter()
        .map(|&(a, b)| scan_cell(config, n_th, a, b))
        .collect();
    let mut global: Option<GlobalPoint> = None;
    let mut failed = 0;
    for c in &cells {
        if c.q_min.is_nan() {
            failed += 1;
            continue;
        }
        if global.as_ref().map_or(true, |g| c.q_min < g.q_min) {
            global = Some(GlobalPoint {
                axis1: c.axis1,
                axis2: c.axis2,
                q_min: c.q_min,
                t2_argmin: c.t2_argmin,
            });
        }
    }
    Ok(ScanResult {
        cells,
        global,
        failed,
    })
}

/// [`scan_plane`] on a private pool of `threads` workers.
pub fn scan_plane_with_threads(config: &ScanConfig, threads: usize) -> Result<ScanResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    pool.install(|| scan_plane(config))
}
