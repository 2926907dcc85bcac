use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use lgqp::jmatrix::build_jtable;
use lgqp::series::smooth_cutoff;
use lgqp::special::{erf_real, erfc_real, faddeeva};
use lgqp::state::{phase_beta_of, reduce_squeezed_to_coherent};
use lgqp::verify::single_time_probability;
use lgqp::*;
use proptest::prelude::*;

const U: UnitsConfig = UnitsConfig { omega: 1.0 };

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn state(thermal: bool) -> impl Strategy<Value = StateSpec> {
    let n_th = if thermal { 0.0..1.0 } else { 0.0..f64::MIN_POSITIVE };
    (-1.4..1.4f64, -1.4..1.4f64, 0.0..1.0f64, 0.0..TAU, n_th).prop_map(|(x0, p0, r, th, n)| {
        let n = if n < 1e-300 { 0.0 } else { n };
        StateSpec::from_x0p0(x0, p0, r, th, n).unwrap()
    })
}

/// Times whose Heisenberg phases stay away from commuting configurations.
fn separated(state: &StateSpec, t1: f64, t2: f64) -> bool {
    let b = |t| phase_beta_of(t, state.r, state.theta0, U);
    (t2 - t1 + b(t2) - b(t1)).sin().abs() >= 0.2
}

fn series(st: &StateSpec, m: &MeasurementSpec, s1: Sign, s2: Sign, t1: f64, t2: f64) -> f64 {
    qpd_series(st, m, s1, s2, t1, t2, U, &TruncationConfig::default())
        .unwrap()
        .value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn erf_is_odd_and_complements(x in -8.0..8.0f64) {
        prop_assert_eq!(erf_real(-x), -erf_real(x));
        prop_assert!((erf_real(x) + erfc_real(x) - 1.0).abs() < 1e-15);
        prop_assert!(erf_real(x).abs() <= 1.0);
    }

    #[test]
    fn faddeeva_reflection(re in -6.0..6.0f64, im in -3.0..3.0f64) {
        let z = Complex::new(re, im);
        let lhs = faddeeva(-z);
        let rhs = 2.0 * (-z * z).exp() - faddeeva(z);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()), "{lhs} {rhs}");
    }

    #[test]
    fn jtable_is_symmetric(cut in -3.0..3.0f64) {
        let t = build_jtable(cut, 40).unwrap();
        for m in 0..=40 {
            for n in 0..=40 {
                prop_assert!((t.get(m, n) - t.get(n, m)).abs() < 1e-14);
            }
            prop_assert!((0.0..=1.0).contains(&t.get(m, m)));
        }
    }

    #[test]
    fn cutoff_is_monotone(n_max in 2usize..400) {
        let mut prev = 1.0;
        for n in 0..=n_max {
            let f = smooth_cutoff(n, n_max);
            prop_assert!((0.0..=1.0).contains(&f) && f <= prev);
            prev = f;
        }
    }

    #[test]
    fn four_outcomes_sum_to_one(st in state(true), t1 in 0.0..TAU, t2 in 0.0..TAU) {
        let m = MeasurementSpec::sign();
        let total: f64 = [Sign::Plus, Sign::Minus]
            .iter()
            .flat_map(|&a| [(a, Sign::Plus), (a, Sign::Minus)])
            .map(|(a, b)| series(&st, &m, a, b, t1, t2))
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn marginals_follow_the_gaussian(st in state(true), s in sign(), t1 in 0.0..TAU, t2 in 0.0..TAU) {
        let m = MeasurementSpec::sign();
        let first = series(&st, &m, s, Sign::Plus, t1, t2) + series(&st, &m, s, Sign::Minus, t1, t2);
        let p1 = single_time_probability(&st, &m, s, t1);
        prop_assert!((first - p1).abs() < 5e-8, "{first} {p1}");
    }

    #[test]
    fn opposite_outcomes_never_coincide(st in state(true), s in sign(), t in 0.0..TAU) {
        let m = MeasurementSpec::sign();
        prop_assert!(series(&st, &m, s, s.flip(), t, t).abs() < 1e-12);
    }

    #[test]
    fn luders_floor(st in state(false), s1 in sign(), s2 in sign(), t1 in 0.0..TAU, t2 in 0.0..TAU) {
        let cfg = IntegralConfig::default();
        let v = qpd_integral(&st, &OffsetFunction::zero(), s1, s2, t1, t2, U, &cfg).unwrap().value;
        prop_assert!(v >= -0.125 - 1e-6, "{v}");
    }

    #[test]
    fn integral_matches_series(st in state(false), s1 in sign(), s2 in sign(), t1 in 0.0..TAU, t2 in 0.0..TAU) {
        prop_assume!(separated(&st, t1, t2));
        let m = MeasurementSpec::sign();
        let a = qpd_integral(&st, &OffsetFunction::zero(), s1, s2, t1, t2, U, &IntegralConfig::default())
            .unwrap()
            .value;
        let b = series(&st, &m, s1, s2, t1, t2);
        prop_assert!((a - b).abs() < 1e-7, "{a} {b}");
    }

    #[test]
    fn squeezing_reduces_to_coherent(st in state(true), s1 in sign(), s2 in sign(), t1 in 0.0..TAU, t2 in 0.0..TAU) {
        let m = MeasurementSpec::sign();
        let red = reduce_squeezed_to_coherent(&st);
        let coherent = red.coherent_state(st.n_th);
        let a = series(&st, &m, s1, s2, t1, t2);
        let b = series(&coherent, &m, s1, s2, red.map_time(t1, U), red.map_time(t2, U));
        prop_assert!((a - b).abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn window_has_half_period(r in 0.0..1.0f64, th in 0.0..TAU, l in 0.2..2.5f64, t1 in 0.0..TAU, t2 in 0.0..TAU, s1 in sign(), s2 in sign()) {
        let st = StateSpec::new(Complex::new(0.0, 0.0), r, th, 0.0).unwrap();
        let m = MeasurementSpec::window(l).unwrap();
        let a = series(&st, &m, s1, s2, t1, t2);
        let b = series(&st, &m, s1, s2, t1, t2 + PI);
        prop_assert!((a - b).abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn t2_minimum_is_below_the_grid(shift in 0.0..TAU, depth in 0.1..2.0f64) {
        let f = |t: f64| Ok(-depth * (t - shift).cos() + 0.1 * (3.0 * t).sin());
        let search = T2Search { coarse_steps: 50, ..T2Search::default() };
        let (v, t) = minimize_over_t2(&f, &search).unwrap();
        for k in 0..50 {
            let g = search.t2_min + (search.t2_max - search.t2_min) * k as f64 / 49.0;
            prop_assert!(v <= f(g).unwrap() + 1e-15);
        }
        prop_assert!((f(t).unwrap() - v).abs() < 1e-15);
    }
}

#[test]
fn vacuum_sign_correlation_vanishes_at_quarter_period() {
    // time reversal kills Re<sgn x sgn p> in the ground state
    let g = StateSpec::ground();
    let m = MeasurementSpec::sign();
    for route in Route::ALL {
        let v = evaluate(route, &g, &m, Sign::Plus, Sign::Plus, 0.0, PI / 2.0, U, &Controls::default())
            .unwrap()
            .value;
        assert!((v - 0.25).abs() < 1e-9, "{route}: {v}");
    }
    assert!((erf_real(FRAC_1_SQRT_2) - 0.682_689_492_137_085_9).abs() < 1e-15);
}
