//! The three evaluators on shared inputs.

use std::f64::consts::FRAC_PI_3;

use lgqp::*;

const U: UnitsConfig = UnitsConfig { omega: 1.0 };

fn all_routes(
    state: &StateSpec,
    meas: &MeasurementSpec,
    s1: Sign,
    s2: Sign,
    t1: f64,
    t2: f64,
) -> Vec<(Route, f64)> {
    Route::ALL
        .into_iter()
        .filter(|r| r.supports(state, meas))
        .map(|r| {
            let e = evaluate(r, state, meas, s1, s2, t1, t2, U, &Controls::default()).unwrap();
            (r, e.value)
        })
        .collect()
}

fn assert_agree(values: &[(Route, f64)], tol: f64) {
    for (ra, a) in values {
        for (rb, b) in values {
            assert!((a - b).abs() <= tol, "{ra} {a} vs {rb} {b}");
        }
    }
}

#[test]
fn squeezed_coherent_state() {
    let st = StateSpec::from_x0p0(0.550, 1.925, 1.0, FRAC_PI_3, 0.0).unwrap();
    let v = all_routes(&st, &MeasurementSpec::sign(), Sign::Plus, Sign::Minus, 0.0, 3.0);
    assert_eq!(v.len(), 3);
    assert_agree(&v, 1e-5);
    // frozen from the integral route, confirmed by the Fock-space route
    assert!((v[0].1 - 0.568_960_370_660_406).abs() < 1e-10, "{}", v[0].1);
}

#[test]
fn thermal_state_with_offset() {
    let st = StateSpec::from_x0p0(0.5, -1.0, 0.7, 1.0, 1.0).unwrap();
    let offset = OffsetFunction::new(0.4, 0.3, -0.2).unwrap();
    let m = MeasurementSpec::Sign { offset };
    let v = all_routes(&st, &m, Sign::Minus, Sign::Plus, 0.3, 2.0);
    assert_eq!(v.len(), 2);
    assert_agree(&v, 1e-8);
}

#[test]
fn window_on_squeezed_vacuum() {
    let st = StateSpec::new(Complex::new(0.0, 0.0), 0.4, 0.9, 0.0).unwrap();
    let m = MeasurementSpec::window(1.02).unwrap();
    for (s1, s2) in [(Sign::Plus, Sign::Plus), (Sign::Minus, Sign::Plus)] {
        let v = all_routes(&st, &m, s1, s2, 0.0, 1.55);
        assert_eq!(v.len(), 2);
        assert_agree(&v, 1e-8);
    }
}

#[test]
fn window_minimum_on_the_ground_state() {
    let m = MeasurementSpec::window(1.02).unwrap();
    let v = all_routes(&StateSpec::ground(), &m, Sign::Plus, Sign::Plus, 0.0, 1.55);
    assert_agree(&v, 1e-8);
    assert!((v[0].1 + 0.0538).abs() < 1e-3, "{}", v[0].1);
}

#[test]
fn unsupported_combinations_are_refused() {
    let hot = StateSpec::from_x0p0(0.0, 1.0, 0.0, 0.0, 0.5).unwrap();
    let err = evaluate(
        Route::Integral,
        &hot,
        &MeasurementSpec::sign(),
        Sign::Plus,
        Sign::Plus,
        0.0,
        1.0,
        U,
        &Controls::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
}
