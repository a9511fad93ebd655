mod common;

use common::rng;
use predprey_core::*;
use proptest::prelude::*;
use rand::Rng;

/// Qualifying (delta1, X0, Y0) for the baseline set with X0 at most K.
fn qualifying_triples(count: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let p = ModelParameters::baseline();
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let delta1 = rng.gen_range(1e-4..9e-4);
            let crit = p.omega / (p.mating - delta1) - p.residual;
            let x0 = rng.gen_range(crit + 0.2 * (p.capacity - crit)..=p.capacity);
            let y_min = (p.omega / delta1) / (x0 / crit).ln();
            (delta1, x0, y_min * rng.gen_range(1.05..3.0))
        })
        .collect()
}

#[test]
fn certified_data_blows_up_within_bound() {
    let p = ModelParameters::baseline();
    for (delta1, x0, y0) in qualifying_triples(20, 5) {
        let cert = check_nondelayed_condition(&p, x0, y0, delta1).unwrap();
        assert!(cert.condition_holds, "{delta1} {x0} {y0}");
        let bound = cert.t_star_bound.unwrap();
        assert_eq!(bound, 1.0 / (delta1 * y0));
        let tr = integrate_ode(StateVector::new(x0, y0).unwrap(), &p, &StepControl::with_t_end(10.0 * bound)).unwrap();
        match tr.outcome {
            SimOutcome::BlowUp { t_high, .. } => assert!(t_high <= 1.01 * bound, "{t_high} > {bound}"),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn estimator_matches_closed_form() {
    let mut rng = rng(17);
    let ctl = StepControl::with_t_end(1e3);
    for _ in 0..20 {
        let c: f64 = rng.gen_range(0.1..2.0);
        let b: f64 = rng.gen_range(0.0..2.0);
        let y0 = (b / c).max(0.1) * rng.gen_range(1.2..5.0);
        let exact = comparison_blowup_time(c, b, y0).unwrap();
        let est = estimate_blowup_time(move |y: &[f64; 1]| [c * y[0] * y[0] - b * y[0]], [y0], &ctl).unwrap();
        let mid = 0.5 * (est.t_low + est.t_high);
        assert!((mid - exact).abs() <= 1e-5 * exact, "c={c} b={b} y0={y0}: {mid} vs {exact}");
    }
}

#[test]
fn prey_stays_above_envelope() {
    let mut rng = rng(23);
    for _ in 0..50 {
        let p = common::random_params(&mut rng);
        let x0 = rng.gen_range(0.1..1.0) * p.capacity;
        let y0 = rng.gen_range(0.1..200.0);
        let ctl = StepControl { sample_dt: Some(0.1), ..StepControl::with_t_end(20.0) };
        let tr = integrate_dde(StateVector::new(x0, y0).unwrap(), &p, &ctl).unwrap();
        for (t, s) in &tr.samples {
            let env = lower_prey_envelope(x0, p.omega, *t);
            assert!(s.x >= env * (1.0 - 1e-9), "t={t}: {} < {env}", s.x);
        }
    }
}

#[test]
fn delayed_threshold_exists() {
    let p = ModelParameters::baseline().with_tau(1.0);
    let res = threshold_bisection(&p, &StepControl::with_t_end(100.0), (1.0, 50.0)).unwrap();
    assert!(res.critical_scale > 1.0 && res.critical_scale < 50.0);
    assert!(res.blowup_scale - res.completed_scale <= 0.01);
}

#[test]
fn nondelayed_threshold_exists() {
    let p = ModelParameters::baseline();
    let res = threshold_bisection(&p, &StepControl::with_t_end(100.0), (1.0, 100.0)).unwrap();
    assert!(res.critical_scale.is_finite() && res.critical_scale < 100.0);
}

#[test]
fn equal_endpoint_outcomes_rejected() {
    let p = ModelParameters::baseline();
    let err = threshold_bisection(&p, &StepControl::with_t_end(50.0), (1.0, 2.0));
    assert!(matches!(err, Err(Error::Precondition(_))));
}

proptest! {
    #[test]
    fn comparison_time_decreases(c in 0.01..5.0f64, b in 0.0..5.0f64, y0 in 0.01..100.0f64, bump in 1.001..2.0f64) {
        if let Some(t) = comparison_blowup_time(c, b, y0) {
            prop_assert!(comparison_blowup_time(c, b, y0 * bump).unwrap() <= t);
            prop_assert!(comparison_blowup_time(c * bump, b, y0).unwrap() <= t);
        }
    }

    #[test]
    fn certificate_bound_is_reciprocal(x0 in 1.0..1e4f64, y0 in 1.0..1e4f64, frac in 0.01..0.99f64) {
        let p = ModelParameters::baseline();
        let cert = check_nondelayed_condition(&p, x0, y0, frac * p.mating).unwrap();
        prop_assert_eq!(cert.t_star_bound.is_some(), cert.condition_holds);
        if let Some(b) = cert.t_star_bound {
            prop_assert_eq!(b, 1.0 / (frac * p.mating * y0));
        }
    }
}
