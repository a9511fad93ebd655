mod common;

use common::rng;
use predprey_core::*;
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

const SYNTHETIC_J: Mat2 = [[1.0, -1.0], [2.0, -1.5]];

fn pattern_diff() -> Diffusivities {
    Diffusivities::new(1e-5, 1e-2).unwrap()
}

#[test]
fn laplacian_of_constant_vanishes() {
    for g in [Grid::default_line(50).unwrap(), Grid::square(20, 30, PI, 2.0).unwrap()] {
        let l = laplacian(&vec![3.7; g.len()], &g).unwrap();
        assert!(l.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn laplacian_cosine_eigenfunction() {
    // Relative to the eigenvalue 100 the error is O(dx^2) and below 1e-3
    // at 300 points; it drops fourfold when dx halves.
    let err = |nx: usize| {
        let g = Grid::default_line(nx).unwrap();
        let f: Vec<f64> = (0..nx).map(|i| (10.0 * g.x(i)).cos()).collect();
        let l = laplacian(&f, &g).unwrap();
        (0..nx).map(|i| (l[i] + 100.0 * f[i]).abs()).fold(0.0, f64::max) / 100.0
    };
    let (e1, e2) = (err(300), err(599));
    assert!(e1 < 1e-3, "{e1}");
    assert!((e1 / e2 - 4.0).abs() < 0.1, "{}", e1 / e2);
}

#[test]
fn laplacian_rejects_wrong_length() {
    let g = Grid::default_line(10).unwrap();
    assert!(matches!(laplacian(&[1.0; 9], &g), Err(Error::DimensionMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn laplacian_has_zero_net_flux(seed in any::<u64>(), two_d in any::<bool>()) {
        let mut rng = rng(seed);
        let g = if two_d { Grid::square(17, 23, PI, 1.5).unwrap() } else { Grid::default_line(41).unwrap() };
        let f: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..10.0)).collect();
        let scale = f.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / (g.dx() * g.dx());
        prop_assert!(g.integrate(&laplacian(&f, &g).unwrap()).unwrap().abs() < 1e-10 * scale);
    }

    #[test]
    fn diffusion_alone_conserves_mass(seed in any::<u64>(), two_d in any::<bool>(), explicit in any::<bool>()) {
        let mut rng = rng(seed);
        let g = if two_d { Grid::square(15, 12, PI, 2.0).unwrap() } else { Grid::default_line(60).unwrap() };
        let ic = SpatialField::from_fn(&g, |_, _| [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)]);
        let ctl = PdeControl {
            dt: 0.05,
            t_end: 2.0,
            scheme: if explicit { DiffusionScheme::Explicit } else { DiffusionScheme::Implicit },
            ..PdeControl::default()
        };
        let run = simulate_rd(&ic, &LinearReaction::none(), &Diffusivities::new(0.05, 0.3).unwrap(), &g, &ctl).unwrap();
        let last = run.last().unwrap();
        for c in 0..2 {
            let before = g.integrate(ic.component(c)).unwrap();
            let after = g.integrate(last.component(c)).unwrap();
            prop_assert!((after - before).abs() <= 1e-10 * before.abs() * ctl.t_end);
        }
    }

    #[test]
    fn homogeneous_data_stays_homogeneous(x in 0.05..1.0f64, y in 0.01..0.2f64, two_d in any::<bool>()) {
        let g = if two_d { Grid::square(12, 9, PI, PI).unwrap() } else { Grid::default_line(40).unwrap() };
        let p = ModelParameters::pattern_set(1.0);
        let ic = SpatialField::uniform(&g, [x, y]);
        let ctl = PdeControl { dt: 0.1, t_end: 20.0, snapshot_dt: Some(1.0), ..PdeControl::default() };
        let run = simulate_rd(&ic, &p, &pattern_diff(), &g, &ctl).unwrap();
        for s in &run.snapshots {
            let m = s.prey[0];
            let n = s.predator[0];
            prop_assert!(s.max_deviation([m, n]) <= 1e-12 * m.abs().max(n.abs()).max(1.0));
        }
    }
}

#[test]
fn equilibrium_field_is_stationary() {
    let p = ModelParameters::baseline();
    let eq = interior_equilibrium(&p).unwrap().point;
    let g = Grid::default_line(64).unwrap();
    let ic = SpatialField::uniform(&g, [eq.x, eq.y]);
    let ctl = PdeControl { dt: 0.1, t_end: 100.0, snapshot_dt: Some(5.0), ..PdeControl::default() };
    let run = simulate_rd(&ic, &p, &Diffusivities::new(0.01, 0.1).unwrap(), &g, &ctl).unwrap();
    assert!(run.outcome.is_completed());
    assert!(run.snapshots.iter().all(|s| s.max_deviation([eq.x, eq.y]) < 1e-8));
}

#[test]
fn no_diffusion_matches_pointwise_ode() {
    let p = ModelParameters::baseline();
    let g = Grid::default_line(16).unwrap();
    let ic = cos2_perturbation(&g, [10.0, 9.0], [1.0, 1.0], 10.0, false);
    let ctl = PdeControl { dt: 0.01, t_end: 10.0, ..PdeControl::default() };
    let run = simulate_rd(&ic, &p, &Diffusivities::zero(), &g, &ctl).unwrap();
    let last = run.last().unwrap();
    assert_eq!(last.t, 10.0);
    for i in 0..g.len() {
        let sc = StepControl { rel_tol: 1e-11, abs_tol: 1e-13, ..StepControl::with_t_end(10.0) };
        let tr = integrate_ode(StateVector::new(ic.prey[i], ic.predator[i]).unwrap(), &p, &sc).unwrap();
        let (_, s) = tr.last().unwrap();
        assert!((s.x - last.prey[i]).abs() < 1e-5 && (s.y - last.predator[i]).abs() < 1e-5);
    }
}

#[test]
fn stripes_persist_in_pattern_regime() {
    let p = ModelParameters::pattern_set(1.0);
    let eq = interior_equilibrium(&p).unwrap().point;
    let g = Grid::default_line(300).unwrap();
    let ic = cos2_perturbation(&g, [eq.x, eq.y], [0.005, 0.005], 10.0, true);
    let ctl = PdeControl { dt: 0.1, t_end: 500.0, ..PdeControl::default() };
    let run = simulate_rd(&ic, &p, &pattern_diff(), &g, &ctl).unwrap();
    assert!(run.outcome.is_completed(), "{:?}", run.outcome);
    let last = run.last().unwrap();
    assert!(last.max_deviation(last.mean()) > 1e-3);
    let amps = mode_amplitudes(&last.prey, &g, &[20]).unwrap();
    assert!(amps[0].abs() > 1e-3);
}

#[test]
fn refinement_is_second_order() {
    let p = ModelParameters::pattern_set(1.0);
    let eq = interior_equilibrium(&p).unwrap().point;
    let solve = |nx: usize| {
        let g = Grid::default_line(nx).unwrap();
        let ic = cos2_perturbation(&g, [eq.x, eq.y], [0.005, 0.005], 10.0, false);
        let ctl = PdeControl { dt: 0.01, t_end: 5.0, ..PdeControl::default() };
        simulate_rd(&ic, &p, &pattern_diff(), &g, &ctl).unwrap().last().unwrap().clone()
    };
    let (a, b, c) = (solve(76), solve(151), solve(301));
    let gap = |u: &SpatialField, v: &SpatialField, n: usize| {
        (0..n)
            .map(|i| (u.prey[i] - v.prey[2 * i]).abs().max((u.predator[i] - v.predator[2 * i]).abs()))
            .fold(0.0, f64::max)
    };
    let order = (gap(&a, &b, 76) / gap(&b, &c, 151)).log2();
    assert!(order >= 1.7, "observed order {order}");
}

#[test]
fn tiny_delay_matches_undelayed_run() {
    let p = ModelParameters::baseline();
    let g = Grid::default_line(24).unwrap();
    let diff = Diffusivities::new(0.01, 0.01).unwrap();
    let ic = cos2_perturbation(&g, [10.0, 9.99], [0.5, 0.5], 10.0, true);
    let ctl = PdeControl { dt: 1e-4, t_end: 5.0, ..PdeControl::default() };
    let a = simulate_rd(&ic, &p, &diff, &g, &ctl).unwrap();
    let b = simulate_rd_delayed(&ic, &p.with_tau(1e-4), &diff, &g, &ctl).unwrap();
    let (fa, fb) = (a.last().unwrap(), b.last().unwrap());
    let d = (0..g.len())
        .map(|i| (fa.prey[i] - fb.prey[i]).abs().max((fa.predator[i] - fb.predator[i]).abs()))
        .fold(0.0, f64::max);
    assert!(d < 1e-4, "{d}");
}

/// Rightmost characteristic root at delay `tau` for wavenumber `k`, by
/// continuation from the two roots at zero delay.
fn rightmost_root(cc: &CharCoefficients, tau: f64) -> f64 {
    let b = cc.a1 + cc.b1;
    let c = cc.a0 + cc.b0;
    let disc = num_complex::Complex64::from(b * b - 4.0 * c).sqrt();
    [(-b + disc) / 2.0, (-b - disc) / 2.0]
        .iter()
        .map(|r| continue_root(cc, *r, 0.0, tau, 50).unwrap().re)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn subcritical_delay_decays() {
    let p = ModelParameters::baseline().with_tau(1.0);
    let eq = interior_equilibrium(&p).unwrap();
    let diff = Diffusivities::new(0.01, 0.01).unwrap();
    let g = Grid::default_line(40).unwrap();
    let modes = 0..g.nx();
    let mut re_max = f64::NEG_INFINITY;
    for n in modes {
        let k = n as f64;
        let cc = char_coeffs(&p, &eq, &diff, k).unwrap();
        if let Some(hp) = hopf_point(&cc, 0).unwrap() {
            assert!(p.tau < hp.tau_star);
        }
        re_max = re_max.max(rightmost_root(&cc, p.tau));
    }
    assert!(re_max < 0.0);
    let ic = cos2_perturbation(&g, [eq.point.x, eq.point.y], [0.005, 0.005], 10.0, true);
    let ctl = PdeControl { dt: 0.05, t_end: 10.0 / re_max.abs(), ..PdeControl::default() };
    let run = simulate_rd_delayed(&ic, &p, &diff, &g, &ctl).unwrap();
    assert!(run.last().unwrap().max_deviation([eq.point.x, eq.point.y]) < 1e-4);
}

#[test]
fn supercritical_delay_oscillates() {
    let base = ModelParameters::baseline();
    let eq = interior_equilibrium(&base).unwrap();
    let cc = char_coeffs(&base, &eq, &Diffusivities::zero(), 0.0).unwrap();
    let tau_star = hopf_point(&cc, 0).unwrap().unwrap().tau_star;
    let p = base.with_tau(1.05 * tau_star);
    let g = Grid::default_line(20).unwrap();
    let ic = cos2_perturbation(&g, [eq.point.x * 1.001, eq.point.y * 1.001], [0.001, 0.001], 10.0, true);
    let horizon = 50.0 * tau_star;
    let ctl = PdeControl { dt: 0.05, t_end: horizon, snapshot_dt: Some(0.5), ..PdeControl::default() };
    let run = simulate_rd_delayed(&ic, &p, &Diffusivities::new(0.01, 0.01).unwrap(), &g, &ctl).unwrap();
    assert!(run.outcome.is_completed());
    let amp = |lo: f64, hi: f64| {
        run.snapshots
            .iter()
            .filter(|s| s.t >= lo * horizon && s.t <= hi * horizon)
            .map(|s| (s.mean()[0] - eq.point.x).abs())
            .fold(0.0, f64::max)
    };
    assert!(amp(0.8, 1.0) >= amp(0.2, 0.4));
}

#[test]
fn cosine_projection_examples() {
    let g = Grid::default_line(300).unwrap();
    let f: Vec<f64> = (0..300).map(|i| 10.0 + 0.005 * (10.0 * g.x(i)).cos()).collect();
    let modes: Vec<usize> = (0..30).collect();
    let a = mode_amplitudes(&f, &g, &modes).unwrap();
    assert!((a[0] - 10.0).abs() < 1e-12);
    assert!((a[10] - 0.005).abs() < 1e-12);
    assert!(a.iter().enumerate().all(|(n, v)| n == 0 || n == 10 || v.abs() < 1e-6));
    let flat = mode_amplitudes(&[2.5; 300], &g, &modes).unwrap();
    assert!((flat[0] - 2.5).abs() < 1e-14 && flat[1..].iter().all(|v| v.abs() < 1e-12));
    let sq = Grid::square(5, 5, 1.0, 1.0).unwrap();
    assert!(mode_amplitudes(&[0.0; 25], &sq, &[1]).is_err());
}

fn growth_rate(diff: &Diffusivities, n: usize, t_end: f64) -> f64 {
    let g = Grid::default_line(300).unwrap();
    let ic = cosine_mode(&g, [1.0, 1.0], [1e-4, 1e-4], n);
    let ctl = PdeControl { dt: 5e-4, t_end, snapshot_dt: Some(0.5), ..PdeControl::default() };
    let run = simulate_rd(&ic, &LinearReaction::new(SYNTHETIC_J, [1.0, 1.0]), diff, &g, &ctl).unwrap();
    let amp = |s: &SpatialField| {
        let dev: Vec<f64> = s.prey.iter().map(|v| v - 1.0).collect();
        mode_amplitudes(&dev, &g, &[n]).unwrap()[0].abs()
    };
    let k = run.snapshots.len();
    (amp(&run.snapshots[k - 1]) / amp(&run.snapshots[k - 3])).ln() / 1.0
}

#[test]
fn linear_growth_matches_dispersion() {
    let diff = Diffusivities::new(0.01, 0.3).unwrap();
    let modes = admissible_modes(&SYNTHETIC_J, &diff, PI, 30);
    let (n, best) = modes
        .iter()
        .max_by(|a, b| a.1.re_lambda_max.total_cmp(&b.1.re_lambda_max))
        .copied()
        .unwrap();
    assert_eq!(n, 4);
    let rate = growth_rate(&diff, n, 3.0);
    assert!((rate - best.re_lambda_max).abs() < 0.05 * best.re_lambda_max, "{rate} vs {}", best.re_lambda_max);
}

#[test]
fn dominant_mode_follows_dispersion_argmax() {
    // Diffusivities scaled by 1/21 put the most unstable admissible mode at
    // 20; seeded noise excites every mode alongside the cos^2(10x) bump.
    let diff = Diffusivities::new(0.01 / 21.0, 0.3 / 21.0).unwrap();
    let modes = admissible_modes(&SYNTHETIC_J, &diff, PI, 60);
    let best = modes.iter().max_by(|a, b| a.1.re_lambda_max.total_cmp(&b.1.re_lambda_max)).unwrap().0;
    let g = Grid::default_line(300).unwrap();
    assert_eq!(best, 20);
    let mut rng = rng(77);
    let bump = cos2_perturbation(&g, [1.0, 1.0], [0.005, 0.005], 10.0, false);
    let ic = SpatialField::from_fn(&g, |_, _| [rng.gen_range(-1e-5..1e-5), rng.gen_range(-1e-5..1e-5)]);
    let ic = SpatialField {
        t: 0.0,
        prey: bump.prey.iter().zip(&ic.prey).map(|(a, b)| a + b).collect(),
        predator: bump.predator.iter().zip(&ic.predator).map(|(a, b)| a + b).collect(),
    };
    let ctl = PdeControl { dt: 2e-3, t_end: 20.0, ..PdeControl::default() };
    let run = simulate_rd(&ic, &LinearReaction::new(SYNTHETIC_J, [1.0, 1.0]), &diff, &g, &ctl).unwrap();
    let dev: Vec<f64> = run.last().unwrap().prey.iter().map(|v| v - 1.0).collect();
    let all: Vec<usize> = (1..60).collect();
    let amps = mode_amplitudes(&dev, &g, &all).unwrap();
    let dominant = all[amps.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap().0];
    assert!(dominant.abs_diff(best) <= 1, "dominant {dominant}, dispersion argmax {best}");
}

#[test]
fn explicit_and_implicit_agree_for_small_steps() {
    let p = ModelParameters::pattern_set(1.0);
    let eq = interior_equilibrium(&p).unwrap().point;
    let g = Grid::square(24, 24, PI, PI).unwrap();
    let ic = cos2_perturbation(&g, [eq.x, eq.y], [0.005, 0.005], 2.0, true);
    let diff = Diffusivities::new(1e-3, 1e-2).unwrap();
    let run = |scheme| {
        let ctl = PdeControl { dt: 1e-3, t_end: 2.0, scheme, ..PdeControl::default() };
        simulate_rd(&ic, &p, &diff, &g, &ctl).unwrap().last().unwrap().clone()
    };
    let a = run(DiffusionScheme::Implicit);
    let b = run(DiffusionScheme::Explicit);
    let d = (0..g.len()).map(|i| (a.predator[i] - b.predator[i]).abs()).fold(0.0, f64::max);
    assert!(d < 1e-5, "{d}");
}

#[test]
fn blowup_in_field_matches_ode() {
    let p = ModelParameters::baseline();
    let g = Grid::default_line(8).unwrap();
    let ic = SpatialField::uniform(&g, [50.0, 50.0]);
    let ctl = PdeControl { dt: 0.01, t_end: 20.0, ..PdeControl::default() };
    let run = simulate_rd(&ic, &p, &Diffusivities::new(0.01, 0.01).unwrap(), &g, &ctl).unwrap();
    let ode = integrate_ode(StateVector::new(50.0, 50.0).unwrap(), &p, &StepControl::with_t_end(20.0)).unwrap();
    match (run.outcome, ode.outcome) {
        (SimOutcome::BlowUp { t_low, t_high }, SimOutcome::BlowUp { t_low: o_low, .. }) => {
            assert!(t_high - t_low <= 1e-6_f64.max(1e-4 * t_high));
            assert!((t_low - o_low).abs() < 1e-3, "{t_low} vs {o_low}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn strong_negativity_is_a_step_failure() {
    let g = Grid::default_line(5).unwrap();
    let sink = LinearReaction::new([[-1000.0, 0.0], [0.0, 0.0]], [-1.0, 0.0]);
    let ic = SpatialField::uniform(&g, [0.5, 1.0]);
    let ctl = PdeControl { dt: 1e-4, t_end: 1.0, ..PdeControl::default() };
    let run = simulate_rd(&ic, &sink, &Diffusivities::zero(), &g, &ctl).unwrap();
    assert!(matches!(run.outcome, SimOutcome::StepFailure { .. }), "{:?}", run.outcome);
}

#[test]
fn two_dimensional_pattern_run_completes() {
    let p = ModelParameters::pattern_set(1.0);
    let eq = interior_equilibrium(&p).unwrap().point;
    let g = Grid::square(60, 60, PI, PI).unwrap();
    let ic = cos2_perturbation(&g, [eq.x, eq.y], [0.005, 0.005], 10.0, true);
    let ctl = PdeControl { dt: 0.1, t_end: 50.0, snapshot_dt: Some(25.0), ..PdeControl::default() };
    let run = simulate_rd(&ic, &p, &pattern_diff(), &g, &ctl).unwrap();
    assert!(run.outcome.is_completed());
    assert_eq!(run.snapshots.len(), 3);
    let last = run.last().unwrap();
    assert!(last.max_deviation(last.mean()) > 1e-4);
}
