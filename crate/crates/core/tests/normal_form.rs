mod common;

use common::{random_params, rng};
use num_complex::Complex64;
use predprey_core::*;
use rand::Rng;

struct Case {
    p: ModelParameters,
    lc: LinearizationCoefficients,
    diff: Diffusivities,
    k: f64,
    cc: CharCoefficients,
    hp: HopfPoint,
}

fn random_cases(count: usize, seed: u64) -> Vec<Case> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let p = random_params(&mut rng);
        let eq = interior_equilibrium(&p).unwrap();
        let lc = linearization_coeffs(&eq, &p).unwrap();
        let diff = Diffusivities::new(rng.gen_range(0.0..0.05), rng.gen_range(0.0..0.5)).unwrap();
        let k = if out.len() % 3 == 0 { 0.0 } else { rng.gen_range(0.0..3.0) };
        let cc = char_coeffs(&p, &eq, &diff, k).unwrap();
        if let Some(hp) = hopf_point(&cc, 0).unwrap() {
            if hp.tau_star > 1e-6 {
                out.push(Case { p, lc, diff, k, cc, hp });
            }
        }
    }
    out
}

#[test]
fn pairing_relations_hold_on_random_points() {
    let one = Complex64::from(1.0);
    for c in random_cases(40, 1) {
        let pr = eigen_pairing(&c.lc, &c.diff, c.k, c.hp.omega0, c.hp.tau_star).unwrap();
        let scale = 1.0 + pr.alpha2.norm();
        assert!(pr.eigen_residual < 1e-10 * scale.max(c.lc.a12.abs()), "{}", pr.eigen_residual);
        let wt = c.hp.omega0 * c.hp.tau_star;
        let qs = [one, pr.alpha2_star];
        let ip = bilinear_form(&c.lc, c.hp.tau_star, pr.n_bar.conj(), qs, wt, [one, pr.alpha2], wt);
        let ip_bar = bilinear_form(&c.lc, c.hp.tau_star, pr.n_bar.conj(), qs, wt, [one, pr.alpha2.conj()], -wt);
        assert!((ip - 1.0).norm() < 1e-10, "{ip}");
        assert!(ip_bar.norm() < 1e-10, "{ip_bar}");
    }
}

#[test]
fn solves_are_accurate_and_outputs_finite() {
    for c in random_cases(40, 2) {
        for variant in [Variant::Standard, Variant::Literal] {
            let pr = eigen_pairing(&c.lc, &c.diff, c.k, c.hp.omega0, c.hp.tau_star).unwrap();
            let g = g_coefficients(&pr, &Nonlinearity::from_params(&c.p), &c.lc, &c.diff, c.k, c.hp.omega0, c.hp.tau_star, variant);
            match g {
                Ok(g) => {
                    assert!(g.e1_residual < 1e-12 && g.e2_residual < 1e-12);
                    assert!([g.g20, g.g11, g.g02, g.g21].iter().all(|z| z.is_finite()));
                }
                Err(Error::Resonance(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn baseline_pipeline_is_finite_and_repeatable() {
    let p = ModelParameters::baseline();
    let a = analyze_hopf(&p, &Diffusivities::zero(), 0.0, Variant::Standard).unwrap();
    let b = analyze_hopf(&p, &Diffusivities::zero(), 0.0, Variant::Standard).unwrap();
    assert_eq!(a, b);
    assert!(a.report.c1_0.is_finite() && a.report.mu2.is_finite() && a.report.t2.is_finite());
    assert_eq!(a.report.beta2, 2.0 * a.report.c1_0.re);
    assert_eq!(a.report.direction, Direction::Supercritical);
    assert_eq!(a.report.stability, OrbitStability::StablePeriodic);
    let literal = analyze_hopf(&p, &Diffusivities::zero(), 0.0, Variant::Literal).unwrap();
    assert_eq!(literal.g.g20, a.g.g20);
    assert_ne!(literal.g.g21, a.g.g21);
}

#[test]
fn zero_coupling_removes_quadratic_terms() {
    for c in random_cases(10, 3) {
        let pr = eigen_pairing(&c.lc, &c.diff, c.k, c.hp.omega0, c.hp.tau_star).unwrap();
        let g = g_coefficients(&pr, &Nonlinearity::zero(), &c.lc, &c.diff, c.k, c.hp.omega0, c.hp.tau_star, Variant::Standard)
            .unwrap();
        let zero = Complex64::from(0.0);
        assert_eq!((g.g20, g.g11, g.g02, g.g21), (zero, zero, zero, zero));
    }
}

#[test]
fn classification_follows_signs() {
    for c in random_cases(30, 4) {
        let Ok(a) = analyze_hopf(&c.p, &c.diff, c.k, Variant::Standard) else { continue };
        let r = a.report;
        assert_eq!(r.beta2, 2.0 * r.c1_0.re);
        assert_eq!(r.direction == Direction::Supercritical, r.mu2 > 0.0);
        assert_eq!(r.stability == OrbitStability::StablePeriodic, r.beta2 < 0.0);
        assert_eq!(r.period_trend == PeriodTrend::Increasing, r.t2 > 0.0);
        let flipped = hopf_quantities(
            &a.g,
            r.omega0,
            r.tau_star,
            Complex64::new(-r.lambda_prime.re, r.lambda_prime.im),
        )
        .unwrap();
        assert_eq!(flipped.mu2, -r.mu2);
        assert_eq!((flipped.beta2, flipped.c1_0), (r.beta2, r.c1_0));
        assert_ne!(flipped.direction, r.direction);
    }
}

#[test]
fn derivative_agrees_with_continuation() {
    for c in random_cases(30, 5) {
        let chk = lambda_prime_checked(&c.cc, &c.hp).unwrap();
        assert!(chk.relative_gap.unwrap() < 1e-6, "{chk:?}");
        if c.hp.transversal {
            assert!(chk.analytic.re > 0.0);
        }
    }
    let syn = CharCoefficients::from_raw(0.0, 3.0, 0.0, 1.0);
    let hp = hopf_point(&syn, 0).unwrap().unwrap();
    let lp = lambda_prime_numeric(&syn, &hp).unwrap();
    assert!((lp - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    assert!(lambda_prime_checked(&syn, &hp).unwrap().relative_gap.unwrap() < 1e-6);
}

#[test]
fn degenerate_inputs_are_errors() {
    let p = ModelParameters::baseline();
    let a = analyze_hopf(&p, &Diffusivities::zero(), 0.0, Variant::Standard).unwrap();
    assert!(matches!(
        hopf_quantities(&a.g, a.report.omega0, a.report.tau_star, Complex64::new(1e-13, 0.3)),
        Err(Error::Transversality(_))
    ));
    let base = linearization_coeffs(&interior_equilibrium(&p).unwrap(), &p).unwrap();
    let lc = LinearizationCoefficients { a12: 0.0, ..base };
    assert!(matches!(
        eigen_pairing(&lc, &Diffusivities::zero(), 0.0, 1.0, 1.0),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn delayed_simulation_follows_classification() {
    let p = ModelParameters::baseline();
    let a = analyze_hopf(&p, &Diffusivities::zero(), 0.0, Variant::Standard).unwrap();
    let tau_star = a.report.tau_star;
    let eq = interior_equilibrium(&p).unwrap().point;
    let horizon = 50.0 * tau_star;
    let ratio = |tau: f64| {
        let ctl = StepControl { sample_dt: Some(tau_star / 20.0), ..StepControl::with_t_end(horizon) };
        let tr = integrate_dde(StateVector::new(eq.x * 1.001, eq.y * 1.001).unwrap(), &p.with_tau(tau), &ctl).unwrap();
        assert!(tr.outcome.is_completed());
        let dev = |lo: f64, hi: f64| {
            tr.samples
                .iter()
                .filter(|(t, _)| *t >= lo * horizon && *t <= hi * horizon)
                .map(|(_, s)| ((s.x - eq.x) / eq.x).abs().max(((s.y - eq.y) / eq.y).abs()))
                .fold(0.0, f64::max)
        };
        dev(0.8, 1.0) / dev(0.2, 0.4)
    };
    assert!(ratio(0.95 * tau_star) < 1.0);
    assert!(ratio(1.05 * tau_star) > 1.0);
}
