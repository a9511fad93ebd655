//! Sufficient conditions for finite-time blow-up, closed-form comparison
//! bounds, and empirical blow-up thresholds in the initial-condition scale.

use crate::error::{Error, Result};
use crate::integrator::{integrate_dde, integrate_ode, SimOutcome, StepControl, Trajectory};
use crate::model::{ModelParameters, StateVector};

/// Verdict of the non-delayed largeness condition
/// `omega/delta1 < Y0 * ln(X0 / (omega/(c - delta1) - D1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupCertificate {
    pub condition_holds: bool,
    pub delta1: f64,
    /// `1/(delta1 * Y0)`; present iff the condition holds.
    pub t_star_bound: Option<f64>,
    /// Left side `omega/delta1`.
    pub lhs: f64,
    /// Right side `Y0 ln(X0/crit)`; NaN when the logarithm is undefined or
    /// the trivial branch applies.
    pub rhs: f64,
    /// `omega/(c - delta1) - D1`.
    pub critical_prey: f64,
    /// The critical prey level is non-positive, so blow-up needs no
    /// largeness of the data.
    pub trivial: bool,
}

/// Evaluate the non-delayed largeness condition for margin `delta1`.
pub fn check_nondelayed_condition(p: &ModelParameters, x0: f64, y0: f64, delta1: f64) -> Result<BlowupCertificate> {
    p.validate()?;
    if p.exponent != 2.0 {
        return Err(Error::Domain(format!(
            "the largeness condition applies to m = 2, got {}",
            p.exponent
        )));
    }
    if !(delta1 > 0.0 && delta1 < p.mating) {
        return Err(Error::Domain(format!(
            "delta1 must lie in (0, c = {}), got {delta1}",
            p.mating
        )));
    }
    if !(x0.is_finite() && y0.is_finite() && x0 >= 0.0 && y0 >= 0.0) {
        return Err(Error::Domain(format!("invalid initial data ({x0}, {y0})")));
    }
    let lhs = p.omega / delta1;
    let critical_prey = p.omega / (p.mating - delta1) - p.residual;
    let bound = 1.0 / (delta1 * y0);
    if critical_prey <= 0.0 {
        return Ok(BlowupCertificate {
            condition_holds: true,
            delta1,
            t_star_bound: Some(bound),
            lhs,
            rhs: f64::NAN,
            critical_prey,
            trivial: true,
        });
    }
    let arg = x0 / critical_prey;
    let rhs = if arg > 1.0 { y0 * arg.ln() } else { f64::NAN };
    let holds = arg > 1.0 && lhs < rhs;
    Ok(BlowupCertificate {
        condition_holds: holds,
        delta1,
        t_star_bound: holds.then_some(bound),
        lhs,
        rhs,
        critical_prey,
        trivial: false,
    })
}

/// Scan `delta1` over `count` interior points of `(0, c)` and return the
/// certificate where the condition is weakest (largest `rhs/lhs`), or `None`
/// if it holds nowhere on the scan.
pub fn scan_delta1(p: &ModelParameters, x0: f64, y0: f64, count: usize) -> Result<Option<BlowupCertificate>> {
    let mut best: Option<(f64, BlowupCertificate)> = None;
    for i in 1..=count {
        let delta1 = p.mating * i as f64 / (count + 1) as f64;
        let cert = check_nondelayed_condition(p, x0, y0, delta1)?;
        if !cert.condition_holds {
            continue;
        }
        let ratio = if cert.trivial { f64::INFINITY } else { cert.rhs / cert.lhs };
        if best.as_ref().map_or(true, |(r, _)| ratio > *r) {
            best = Some((ratio, cert));
        }
    }
    Ok(best.map(|(_, c)| c))
}

/// Closed-form blow-up time of `Y' = c Y^2 - b Y` from `Y0`, or `None` when
/// the solution stays bounded.
pub fn comparison_blowup_time(c_coef: f64, b_coef: f64, y0: f64) -> Option<f64> {
    if !(c_coef > 0.0 && b_coef >= 0.0 && y0 > 0.0) {
        return None;
    }
    if b_coef == 0.0 {
        return Some(1.0 / (c_coef * y0));
    }
    let cy = c_coef * y0;
    if cy > b_coef {
        Some((cy / (cy - b_coef)).ln() / b_coef)
    } else {
        None
    }
}

/// Lower envelope `X0 exp(-omega t)` for the prey.
pub fn lower_prey_envelope(x0: f64, omega: f64, t: f64) -> f64 {
    x0 * (-omega * t).exp()
}

/// Result of bisecting the initial-condition scale `s` (IC `(s, s)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    /// Largest scale seen to stay bounded.
    pub completed_scale: f64,
    /// Smallest scale seen to blow up.
    pub blowup_scale: f64,
    /// Midpoint of the final bracket.
    pub critical_scale: f64,
    /// Spot-check scales whose outcome contradicts a monotone threshold.
    pub monotonicity_violations: Vec<f64>,
    pub runs: usize,
}

fn run_scale(p: &ModelParameters, ctl: &StepControl, s: f64) -> Result<Trajectory> {
    let s0 = StateVector::new(s, s)?;
    if p.tau > 0.0 {
        integrate_dde(s0, p, ctl)
    } else {
        integrate_ode(s0, p, ctl)
    }
}

fn blows_up(p: &ModelParameters, ctl: &StepControl, s: f64) -> Result<bool> {
    match run_scale(p, ctl, s)?.outcome {
        SimOutcome::BlowUp { .. } => Ok(true),
        SimOutcome::Completed { .. } => Ok(false),
        SimOutcome::StepFailure { t, reason } => Err(Error::Inconsistency(format!(
            "run at scale {s} failed at t={t}: {reason}"
        ))),
    }
}

/// Bisect the bounded/blow-up boundary in the IC scale to width 0.01.
/// Uses the DDE driver when `p.tau > 0`, else the ODE driver.
pub fn threshold_bisection(p: &ModelParameters, ctl: &StepControl, range: (f64, f64)) -> Result<ThresholdResult> {
    let (lo0, hi0) = range;
    if !(lo0 > 0.0 && hi0 > lo0) {
        return Err(Error::Precondition(format!("invalid scale range [{lo0}, {hi0}]")));
    }
    let mut runs = 2;
    let lo_blows = blows_up(p, ctl, lo0)?;
    let hi_blows = blows_up(p, ctl, hi0)?;
    if lo_blows || !hi_blows {
        return Err(Error::Precondition(format!(
            "need bounded at {lo0} and blow-up at {hi0}; got blow-up={lo_blows} and blow-up={hi_blows}"
        )));
    }
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        runs += 1;
        if blows_up(p, ctl, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let critical = 0.5 * (lo + hi);
    let mut violations = Vec::new();
    for i in 1..=5 {
        let s = lo0 + (hi0 - lo0) * i as f64 / 6.0;
        if (s - critical).abs() <= 0.5 * (hi - lo) {
            continue;
        }
        runs += 1;
        if blows_up(p, ctl, s)? != (s > critical) {
            violations.push(s);
        }
    }
    Ok(ThresholdResult {
        completed_scale: lo,
        blowup_scale: hi,
        critical_scale: critical,
        monotonicity_violations: violations,
        runs,
    })
}
