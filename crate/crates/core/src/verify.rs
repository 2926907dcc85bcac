//! Canned reproduction and consistency checks with fixed tolerances.

use std::f64::consts::{FRAC_PI_3, PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integral::IntegralConfig;
use crate::measurement::{MeasurementSpec, Sign};
use crate::route::{evaluate, Controls, Route};
use crate::scan::{
    global_minimize, minimize_over_t2, scan_plane_with_threads, Axis, GlobalOptions, Plane,
    ScanConfig, T2Search,
};
use crate::series::TruncationConfig;
use crate::special::erf_real;
use crate::state::{
    lambda_of, n_th_from_temp_ratio, phase_beta_of, reduce_squeezed_to_coherent, x_xi_of,
    OffsetFunction, StateSpec, UnitsConfig,
};

const U: UnitsConfig = UnitsConfig { omega: 1.0 };

/// Lowest value the two-time quasi-probability can take in quantum mechanics.
pub const LUDERS_FLOOR: f64 = -0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    Fig1,
    Table1,
    Fig2min,
    WindowMin,
    ThermalOrder,
    Normalization,
    Marginals,
    SameTime,
    Reduction,
    OffsetEquiv,
    Luders,
    WindowPeriod,
    Battery,
    Determinism,
}

impl Case {
    pub const ALL: [Case; 14] = [
        Case::Fig1,
        Case::Table1,
        Case::Fig2min,
        Case::WindowMin,
        Case::ThermalOrder,
        Case::Normalization,
        Case::Marginals,
        Case::SameTime,
        Case::Reduction,
        Case::OffsetEquiv,
        Case::Luders,
        Case::WindowPeriod,
        Case::Battery,
        Case::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Case::Fig1 => "fig1",
            Case::Table1 => "table1",
            Case::Fig2min => "fig2min",
            Case::WindowMin => "window-min",
            Case::ThermalOrder => "thermal-order",
            Case::Normalization => "normalization",
            Case::Marginals => "marginals",
            Case::SameTime => "same-time",
            Case::Reduction => "reduction",
            Case::OffsetEquiv => "offset-equiv",
            Case::Luders => "luders",
            Case::WindowPeriod => "window-period",
            Case::Battery => "battery",
            Case::Determinism => "determinism",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Case::Fig1 => "series partial sums converge to the integral route",
            Case::Table1 => "tabulated parameters reach 4q = -0.113",
            Case::Fig2min => "global minimum of each sign panel at r = 1/2",
            Case::WindowMin => "window projector minimum at r = 0",
            Case::ThermalOrder => "violation weakens with temperature",
            Case::Normalization => "the four sign pairs sum to one",
            Case::Marginals => "marginals equal the single-time probabilities",
            Case::SameTime => "opposite signs at equal times have zero weight",
            Case::Reduction => "squeezed states map onto coherent states",
            Case::OffsetEquiv => "ground state with a moving cut equals a coherent state",
            Case::Luders => "no value below the Luders bound",
            Case::WindowPeriod => "window projector results repeat after half a period",
            Case::Battery => "all applicable routes agree on random states",
            Case::Determinism => "scan output does not depend on the worker count",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Case> {
        Case::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown verify case {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured - expected| <= tolerance`
    Within,
    /// `measured <= expected`
    AtMost,
    /// `measured >= expected`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            measured,
            expected,
            tolerance,
            relation: Relation::Within,
            pass: (measured - expected).abs() <= tolerance,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            measured,
            expected: bound,
            tolerance: 0.0,
            relation: Relation::AtMost,
            pass: measured <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            measured,
            expected: bound,
            tolerance: 0.0,
            relation: Relation::AtLeast,
            pass: measured >= bound,
        }
    }

    /// `lo <= measured <= hi`
    pub fn in_range(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            measured,
            expected: 0.5 * (lo + hi),
            tolerance: 0.5 * (hi - lo),
            relation: Relation::Within,
            pass: (lo..=hi).contains(&measured),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match self.relation {
            Relation::Within => write!(
                f,
                "{verdict} {}: measured {:.6e}, expected {:.6e} +/- {:.1e}",
                self.name, self.measured, self.expected, self.tolerance
            ),
            Relation::AtMost => write!(
                f,
                "{verdict} {}: measured {:.6e}, required <= {:.6e}",
                self.name, self.measured, self.expected
            ),
            Relation::AtLeast => write!(
                f,
                "{verdict} {}: measured {:.6e}, required >= {:.6e}",
                self.name, self.measured, self.expected
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub case: Case,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

pub fn run(case: Case) -> Result<Report> {
    let start = Instant::now();
    let mut checks = match case {
        Case::Fig1 => fig1()?,
        Case::Table1 => table1()?,
        Case::Fig2min => fig2min()?.0,
        Case::WindowMin => window_min()?,
        Case::ThermalOrder => thermal_order()?,
        Case::Normalization => normalization()?,
        Case::Marginals => marginals()?,
        Case::SameTime => same_time()?,
        Case::Reduction => reduction()?,
        Case::OffsetEquiv => offset_equiv()?,
        Case::Luders => luders()?,
        Case::WindowPeriod => window_period()?,
        Case::Battery => battery_agreement()?,
        Case::Determinism => determinism()?,
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget = match case {
        Case::Fig1 => Some(60.0),
        Case::Table1 => Some(120.0),
        Case::Battery => Some(600.0),
        _ => None,
    };
    if let Some(limit) = budget {
        checks.push(Check::at_most("runtime [s]", seconds, limit));
    }
    Ok(Report {
        case,
        checks,
        seconds,
    })
}

fn tight() -> Controls {
    Controls {
        truncation: TruncationConfig {
            tail_tol: 1e-12,
            ..TruncationConfig::default()
        },
        integral: IntegralConfig {
            tol: 1e-11,
            max_order: 1024,
            ..IntegralConfig::default()
        },
        ..Controls::default()
    }
}

fn q(
    route: Route,
    state: &StateSpec,
    meas: &MeasurementSpec,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
    controls: &Controls,
) -> Result<f64> {
    Ok(evaluate(route, state, meas, s1, s2, t1, t2, U, controls)?.value)
}

/// `q_{s1 s2}(t1, t2)` through the signs in the order `(+,+), (+,-), (-,+), (-,-)`.
fn sign_pairs() -> [(Sign, Sign); 4] {
    [
        (Sign::Plus, Sign::Plus),
        (Sign::Plus, Sign::Minus),
        (Sign::Minus, Sign::Plus),
        (Sign::Minus, Sign::Minus),
    ]
}

fn fig1() -> Result<Vec<Check>> {
    let state = StateSpec::from_x0p0(0.550, 1.925, 1.0, FRAC_PI_3, 0.0)?;
    let meas = MeasurementSpec::sign();
    let (s1, s2) = (Sign::Plus, Sign::Minus);
    let sharp = |n: usize| Controls {
        truncation: TruncationConfig::sharp(n),
        ..Controls::default()
    };
    let (c5, c50, c500) = (sharp(5), sharp(50), sharp(500));
    let reference = Controls::default();
    let (mut worst, mut late, mut early) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..=125 {
        let t2 = 0.05 * k as f64;
        let exact = q(Route::Integral, &state, &meas, s1, s2, 0.0, t2, &reference)?;
        let q5 = q(Route::Series, &state, &meas, s1, s2, 0.0, t2, &c5)?;
        let q50 = q(Route::Series, &state, &meas, s1, s2, 0.0, t2, &c50)?;
        let q500 = q(Route::Series, &state, &meas, s1, s2, 0.0, t2, &c500)?;
        worst = worst.max((q500 - exact).abs());
        late = late.max((q500 - q50).abs());
        early = early.max((q50 - q5).abs());
    }
    Ok(vec![
        Check::at_most("max |series(500) - integral|", worst, 1e-3),
        Check::at_most("max|q500 - q50| / max|q50 - q5|", late / early, 0.5),
    ])
}

/// `(s1, s2, r, x0, p0)` with `theta0 = 0`.
pub const TABLE1: [(i32, i32, f64, f64, f64); 14] = [
    (1, -1, 0.0, -0.554, 1.95),
    (1, -1, 0.5, -0.896, 1.18),
    (1, -1, 0.6, -0.991, 1.07),
    (1, -1, 0.7, -1.09, 0.968),
    (1, -1, 0.8, -1.21, 0.875),
    (1, -1, 0.9, -1.34, 0.792),
    (1, -1, 1.0, -1.48, 0.717),
    (-1, 1, 0.0, 0.550, 1.93),
    (-1, 1, 0.5, 0.904, 1.17),
    (-1, 1, 0.6, 1.00, 1.06),
    (-1, 1, 0.7, 1.09, 0.968),
    (-1, 1, 0.8, 1.22, 0.866),
    (-1, 1, 0.9, 1.34, 0.792),
    (-1, 1, 1.0, 1.48, 0.717),
];

/// Smallest `4 q` in the tabulated parameter sets.
pub const TABLE1_MIN_4Q: f64 = -0.113;

fn table1() -> Result<Vec<Check>> {
    let meas = MeasurementSpec::sign();
    let controls = Controls::default();
    let mut checks = Vec::new();
    for (s1, s2, r, x0, p0) in TABLE1 {
        let state = StateSpec::from_x0p0(x0, p0, r, 0.0, 0.0)?;
        let (s1, s2) = (Sign::try_from(s1)?, Sign::try_from(s2)?);
        let f = |t2: f64| q(Route::Integral, &state, &meas, s1, s2, 0.0, t2, &controls);
        let (v, _) = minimize_over_t2(&f, &T2Search::default())?;
        checks.push(Check::within(
            format!("4 min q ({s1},{s2}) r={r} x0={x0} p0={p0}"),
            4.0 * v,
            TABLE1_MIN_4Q,
            0.003,
        ));
    }
    Ok(checks)
}

fn plane_options() -> GlobalOptions {
    GlobalOptions {
        grid_steps: vec![13, 13, 25],
        starts: 6,
        max_evals: 600,
        ftol: 1e-12,
    }
}

const PLANE_BOUNDS: [(f64, f64); 3] = [(-3.0, 3.0), (-3.0, 3.0), (0.0, TAU)];

/// Global minimum of `q_{s1 s2}(0, t2)` over `(x0, p0, omega t2)`.
pub fn plane_minimum(
    route: Route,
    s1: Sign,
    s2: Sign,
    r: f64,
    theta0: f64,
    n_th: f64,
) -> Result<(f64, Vec<f64>)> {
    let meas = MeasurementSpec::sign();
    let controls = Controls::default();
    let f = |p: &[f64]| -> Result<f64> {
        let state = StateSpec::from_x0p0(p[0], p[1], r, theta0, n_th)?;
        q(route, &state, &meas, s1, s2, 0.0, p[2], &controls)
    };
    let res = global_minimize(&f, &PLANE_BOUNDS, &plane_options())?;
    Ok((res.value, res.arg))
}

/// Returns the checks and the four panel minima.
fn fig2min() -> Result<(Vec<Check>, Vec<f64>)> {
    let mut checks = Vec::new();
    let mut values = Vec::new();
    for (s1, s2) in [
        (Sign::Plus, Sign::Minus),
        (Sign::Minus, Sign::Plus),
        (Sign::Plus, Sign::Plus),
        (Sign::Minus, Sign::Minus),
    ] {
        let (v, arg) = plane_minimum(Route::Integral, s1, s2, 0.5, 0.0, 0.0)?;
        checks.push(Check::within(
            format!(
                "min q ({s1},{s2}) at x0={:.3} p0={:.3} wt2={:.3}",
                arg[0], arg[1], arg[2]
            ),
            v,
            TABLE1_MIN_4Q / 4.0,
            0.001,
        ));
        values.push(v);
    }
    Ok((checks, values))
}

fn window_min() -> Result<Vec<Check>> {
    let state = StateSpec::ground();
    let controls = Controls::default();
    let f = |p: &[f64]| -> Result<f64> {
        let meas = MeasurementSpec::window(p[0])?;
        q(Route::Series, &state, &meas, Sign::Plus, Sign::Plus, 0.0, p[1], &controls)
    };
    let opts = GlobalOptions {
        grid_steps: vec![31, 64],
        starts: 4,
        max_evals: 400,
        ftol: 1e-13,
    };
    let res = global_minimize(&f, &[(0.2, 2.5), (0.0, PI)], &opts)?;
    Ok(vec![
        Check::within("min q window", res.value, -0.0538, 0.001),
        Check::in_range("argmin L", res.arg[0], 1.00, 1.05),
        Check::in_range("argmin wt2", res.arg[1], 1.50, 1.60),
    ])
}

fn thermal_order() -> Result<Vec<Check>> {
    let (s1, s2) = (Sign::Minus, Sign::Plus);
    let mut checks = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for ratio in [0.0, 0.5, 1.0, 2.0] {
        let n_th = n_th_from_temp_ratio(ratio)?;
        let (v, _) = plane_minimum(Route::Series, s1, s2, 0.5, 0.0, n_th)?;
        match prev {
            None => {
                let (panel, _) = plane_minimum(Route::Integral, s1, s2, 0.5, 0.0, 0.0)?;
                checks.push(Check::within("T=0 min vs sign panel (-,+)", v, panel, 0.001));
            }
            Some((t, p)) => checks.push(Check::at_least(
                format!("min q at kT={ratio} vs kT={t}"),
                v,
                p,
            )),
        }
        prev = Some((ratio, v));
    }
    Ok(checks)
}

/// One random configuration of the route battery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryPoint {
    pub state: StateSpec,
    pub meas: MeasurementSpec,
    pub s1: Sign,
    pub s2: Sign,
    pub t1: f64,
    pub t2: f64,
}

/// Reproducible random states with `|xi| <= 2`, `r <= 1`, `n_th` in
/// `{0, 0.5, 1}`; every fourth point uses the window projector on a squeezed
/// vacuum, a third of the others carry a cut offset.
///
/// Times whose Heisenberg phases nearly coincide modulo `pi` are redrawn:
/// there every Fock-space truncation converges too slowly to resolve the
/// nearly commuting projectors.
pub fn battery(count: usize, seed: u64) -> Vec<BatteryPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sign = |rng: &mut ChaCha8Rng| if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let window = i % 4 == 3;
        let r: f64 = rng.random_range(0.0..1.0);
        let theta0 = rng.random_range(0.0..TAU);
        let (xi, n_th) = if window {
            (Complex64::new(0.0, 0.0), 0.0)
        } else {
            let rho = 2.0 * rng.random::<f64>().sqrt();
            let xi = Complex64::from_polar(rho, rng.random_range(0.0..TAU));
            (xi, [0.0, 0.5, 1.0][rng.random_range(0..3)])
        };
        let state = StateSpec::new(xi, r, theta0, n_th).expect("sampled inside the domain");
        let meas = if window {
            MeasurementSpec::window(rng.random_range(0.3..2.0)).expect("positive width")
        } else if i % 3 == 0 {
            let offset = OffsetFunction::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..TAU),
                rng.random_range(-0.5..0.5),
            )
            .expect("finite offset");
            MeasurementSpec::Sign { offset }
        } else {
            MeasurementSpec::sign()
        };
        let (s1, s2) = (sign(&mut rng), sign(&mut rng));
        let (t1, t2) = loop {
            let t1 = rng.random_range(0.0..TAU);
            let t2 = rng.random_range(0.0..TAU);
            let dphi = t2 - t1 + phase_beta_of(t2, r, theta0, U) - phase_beta_of(t1, r, theta0, U);
            if dphi.sin().abs() >= 0.2 {
                break (t1, t2);
            }
        };
        out.push(BatteryPoint {
            state,
            meas,
            s1,
            s2,
            t1,
            t2,
        });
    }
    out
}

pub const BATTERY_SEED: u64 = 0x5eed_1e66;

fn battery_agreement() -> Result<Vec<Check>> {
    let controls = Controls {
        oracle: crate::fock::OracleConfig::with_dim(400),
        ..tight()
    };
    let mut worst = 0.0_f64;
    let mut pairs = 0usize;
    let mut at = String::new();
    for (i, p) in battery(200, BATTERY_SEED).iter().enumerate() {
        let routes: Vec<Route> = Route::ALL
            .into_iter()
            .filter(|r| r.supports(&p.state, &p.meas))
            .collect();
        let values = routes
            .iter()
            .map(|&r| q(r, &p.state, &p.meas, p.s1, p.s2, p.t1, p.t2, &controls))
            .collect::<Result<Vec<f64>>>()?;
        for a in 0..values.len() {
            for b in a + 1..values.len() {
                pairs += 1;
                let d = (values[a] - values[b]).abs();
                if d > worst {
                    worst = d;
                    at = format!("point {i} {} vs {}", routes[a], routes[b]);
                }
            }
        }
    }
    Ok(vec![
        Check::at_least("route pairs compared", pairs as f64, 200.0),
        Check::at_most(format!("max route disagreement ({at})"), worst, 1e-5),
    ])
}

fn property_points() -> Vec<BatteryPoint> {
    battery(60, BATTERY_SEED ^ 0xa5a5)
}

fn series_routes(p: &BatteryPoint) -> Vec<Route> {
    [Route::Integral, Route::Series]
        .into_iter()
        .filter(|r| r.supports(&p.state, &p.meas))
        .collect()
}

fn normalization() -> Result<Vec<Check>> {
    let controls = tight();
    let mut worst = 0.0_f64;
    for p in property_points() {
        for route in series_routes(&p) {
            let total = sign_pairs()
                .into_iter()
                .map(|(a, b)| q(route, &p.state, &p.meas, a, b, p.t1, p.t2, &controls))
                .sum::<Result<f64>>()?;
            worst = worst.max((total - 1.0).abs());
        }
    }
    Ok(vec![Check::at_most("max |sum_s q - 1|", worst, 1e-8)])
}

/// Single-time probability of outcome `s` from the Gaussian marginal.
pub fn single_time_probability(state: &StateSpec, meas: &MeasurementSpec, s: Sign, t: f64) -> f64 {
    let width = lambda_of(t, state.r, state.theta0, U) * (2.0 * state.n_th + 1.0).sqrt();
    let mean = x_xi_of(t, state.xi, U);
    let plus = match meas {
        MeasurementSpec::Sign { offset } => {
            0.5 * (1.0 + erf_real((mean - offset.position_cut(t, U)) / width))
        }
        MeasurementSpec::Window { half_width } => {
            let hi = erf_real((half_width - mean) / width);
            let lo = erf_real((-half_width - mean) / width);
            1.0 - 0.5 * (hi - lo)
        }
    };
    match s {
        Sign::Plus => plus,
        Sign::Minus => 1.0 - plus,
    }
}

fn marginals() -> Result<Vec<Check>> {
    let controls = tight();
    let mut worst = 0.0_f64;
    for p in property_points() {
        for route in series_routes(&p) {
            for s in Sign::BOTH {
                let first = q(route, &p.state, &p.meas, s, Sign::Plus, p.t1, p.t2, &controls)?
                    + q(route, &p.state, &p.meas, s, Sign::Minus, p.t1, p.t2, &controls)?;
                let second = q(route, &p.state, &p.meas, Sign::Plus, s, p.t1, p.t2, &controls)?
                    + q(route, &p.state, &p.meas, Sign::Minus, s, p.t1, p.t2, &controls)?;
                let p1 = single_time_probability(&p.state, &p.meas, s, p.t1);
                let p2 = single_time_probability(&p.state, &p.meas, s, p.t2);
                worst = worst.max((first - p1).abs()).max((second - p2).abs());
            }
        }
    }
    Ok(vec![Check::at_most("max marginal deviation", worst, 5e-8)])
}

fn same_time() -> Result<Vec<Check>> {
    let controls = tight();
    let mut worst = 0.0_f64;
    for p in property_points() {
        for route in series_routes(&p) {
            for s in Sign::BOTH {
                let v = q(route, &p.state, &p.meas, s, s.flip(), p.t1, p.t1, &controls)?;
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(vec![Check::at_most("max |q_(s,-s)(t,t)|", worst, 1e-10)])
}

fn luders() -> Result<Vec<Check>> {
    // near-commuting times make the adaptive series expensive; the floor
    // check does not need the last digits there
    let mut controls = tight();
    controls.truncation.n_cap = 1 << 12;
    let search = T2Search {
        coarse_steps: 64,
        refine_iters: 30,
        ..T2Search::default()
    };
    let mut lowest = f64::INFINITY;
    for p in property_points() {
        let route = series_routes(&p)[0];
        let f = |t2: f64| q(route, &p.state, &p.meas, p.s1, p.s2, p.t1, t2, &controls);
        lowest = lowest.min(minimize_over_t2(&f, &search)?.0);
    }
    Ok(vec![Check::at_least(
        "lowest q over states and t2",
        lowest,
        LUDERS_FLOOR - 1e-6,
    )])
}

fn reduction() -> Result<Vec<Check>> {
    let controls = tight();
    let mut worst = 0.0_f64;
    for p in property_points() {
        let MeasurementSpec::Sign { offset } = p.meas else {
            continue;
        };
        if !offset.is_zero() {
            continue;
        }
        let red = reduce_squeezed_to_coherent(&p.state);
        let coherent = red.coherent_state(p.state.n_th);
        let (m1, m2) = (red.map_time(p.t1, U), red.map_time(p.t2, U));
        for route in series_routes(&p) {
            let a = q(route, &p.state, &p.meas, p.s1, p.s2, p.t1, p.t2, &controls)?;
            let b = q(route, &coherent, &p.meas, p.s1, p.s2, m1, m2, &controls)?;
            worst = worst.max((a - b).abs());
        }
    }
    Ok(vec![Check::at_most("max |q_squeezed - q_coherent(mapped)|", worst, 1e-8)])
}

fn offset_equiv() -> Result<Vec<Check>> {
    let controls = tight();
    let mut worst = 0.0_f64;
    for p in property_points() {
        let coherent = StateSpec::new(p.state.xi, 0.0, 0.0, 0.0)?;
        let ground = StateSpec::ground();
        let moved = MeasurementSpec::Sign {
            offset: OffsetFunction::coherent_equivalent(p.state.xi),
        };
        let plain = MeasurementSpec::sign();
        for (a, b) in [(Route::Series, Route::Integral), (Route::Integral, Route::Series)] {
            let x = q(a, &ground, &moved, p.s1, p.s2, p.t1, p.t2, &controls)?;
            let y = q(b, &coherent, &plain, p.s1, p.s2, p.t1, p.t2, &controls)?;
            worst = worst.max((x - y).abs());
        }
    }
    Ok(vec![Check::at_most("max |q_ground+offset - q_coherent|", worst, 1e-8)])
}

fn window_period() -> Result<Vec<Check>> {
    let controls = Controls {
        oracle: crate::fock::OracleConfig::with_dim(200),
        ..tight()
    };
    let mut worst_series = 0.0_f64;
    let mut worst_oracle = 0.0_f64;
    for p in property_points().iter().filter(|p| p.meas.is_window()) {
        let shifts = [(0.0, PI), (PI, 0.0), (PI, PI), (0.0, -PI)];
        for route in [Route::Series, Route::Oracle] {
            let base = q(route, &p.state, &p.meas, p.s1, p.s2, p.t1, p.t2, &controls)?;
            for (d1, d2) in shifts {
                let v = q(route, &p.state, &p.meas, p.s1, p.s2, p.t1 + d1, p.t2 + d2, &controls)?;
                let slot = if route == Route::Series {
                    &mut worst_series
                } else {
                    &mut worst_oracle
                };
                *slot = slot.max((v - base).abs());
            }
        }
    }
    Ok(vec![
        Check::at_most("series: max |q(t + pi) - q(t)|", worst_series, 1e-8),
        Check::at_most("oracle: max |q(t + pi) - q(t)|", worst_oracle, 1e-8),
    ])
}

/// Small scan used for the worker-count comparison.
pub fn determinism_config() -> ScanConfig {
    ScanConfig {
        plane: Plane::X0P0,
        axis1: Axis {
            min: -1.5,
            max: 0.5,
            steps: 4,
        },
        axis2: Axis {
            min: 0.5,
            max: 2.0,
            steps: 3,
        },
        s1: Sign::Plus,
        s2: Sign::Minus,
        t1: 0.0,
        r: 0.5,
        theta0: 0.0,
        n_th: None,
        temp_ratio: None,
        x0: 0.0,
        p0: 0.0,
        offset: None,
        t2_search: T2Search {
            coarse_steps: 40,
            refine_iters: 20,
            ..T2Search::default()
        },
        route: Route::Integral,
        omega: 1.0,
        controls: Controls::default(),
    }
}

fn determinism() -> Result<Vec<Check>> {
    let config = determinism_config();
    let reference = scan_plane_with_threads(&config, 1)?.to_csv();
    let mut checks = Vec::new();
    for threads in [4, 16] {
        let csv = scan_plane_with_threads(&config, threads)?.to_csv();
        let differing = reference
            .lines()
            .zip(csv.lines())
            .filter(|(a, b)| a != b)
            .count()
            + reference.lines().count().abs_diff(csv.lines().count());
        checks.push(Check::at_most(
            format!("CSV lines differing, 1 vs {threads} workers"),
            differing as f64,
            0.0,
        ));
    }
    Ok(checks)
}
