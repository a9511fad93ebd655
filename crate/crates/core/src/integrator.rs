//! Adaptive integration of the ODE and DDE models with blow-up bracketing.
//!
//! Both drivers share one loop: a Dormand-Prince 5(4) pair with PI control.
//! When the max-norm of the state first exceeds the blow-up threshold the run
//! enters a corroboration phase and keeps going until the norm passes the
//! threshold squared or the step size collapses. A norm that falls back well
//! below the threshold is treated as transient growth and the run resumes.
//!
//! The bracket is built from the last accepted point `(t_j, y_j, f_j)`.
//! Locally `y' ~ C y^p`, so the remaining time is `y_j / ((p - 1) f_j)`,
//! with `p` read off the last two accepted points.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{ModelParameters, StateVector};
use crate::rk::{dopri_step, PiController};

/// Step-size and termination settings shared by all drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Max-norm above which a run is suspected of blowing up.
    pub blowup_threshold: f64,
    pub t_end: f64,
    /// When set, steps are truncated so that samples land on multiples of
    /// this spacing and only those samples are recorded.
    pub sample_dt: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-14,
            h_max: 1.0,
            blowup_threshold: 1e8,
            t_end: 100.0,
            sample_dt: None,
        }
    }
}

impl StepControl {
    pub fn with_t_end(t_end: f64) -> Self {
        Self {
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidControl(msg));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            ));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return bad(format!(
                "need 0 < h_min <= h_init <= h_max, got {} {} {}",
                self.h_min, self.h_init, self.h_max
            ));
        }
        if !(self.blowup_threshold > 1.0) {
            return bad(format!("blowup_threshold must exceed 1, got {}", self.blowup_threshold));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive and finite, got {}", self.t_end));
        }
        if let Some(dt) = self.sample_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("sample_dt must be positive, got {dt}"));
            }
        }
        Ok(())
    }
}

/// Terminal status of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum SimOutcome {
    Completed { t_end: f64 },
    /// The blow-up time lies in `[t_low, t_high]`.
    BlowUp { t_low: f64, t_high: f64 },
    StepFailure { t: f64, reason: String },
}

impl SimOutcome {
    pub fn is_blowup(&self) -> bool {
        matches!(self, SimOutcome::BlowUp { .. })
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, SimOutcome::Completed { .. })
    }
}

/// Time samples and the terminal status of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S = StateVector> {
    pub samples: Vec<(f64, S)>,
    pub outcome: SimOutcome,
}

impl<S: Copy> Trajectory<S> {
    pub fn last(&self) -> Option<(f64, S)> {
        self.samples.last().copied()
    }

    /// Sample closest to time `t`.
    pub fn nearest(&self, t: f64) -> Option<(f64, S)> {
        self.samples
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .copied()
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    t0: f64,
    t1: f64,
    y0: [f64; 2],
    y1: [f64; 2],
    f0: [f64; 2],
    f1: [f64; 2],
}

impl Segment {
    fn eval(&self, t: f64) -> [f64; 2] {
        let h = self.t1 - self.t0;
        if h <= 0.0 {
            return self.y1;
        }
        let s = ((t - self.t0) / h).clamp(0.0, 1.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        out
    }
}

/// Accepted steps covering the delay window `[t_now - tau, t_now]`, evaluated
/// by cubic Hermite interpolation on each step.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    tau: f64,
    segments: VecDeque<Segment>,
}

impl HistoryBuffer {
    /// Constant history equal to `s0` on `[-tau, 0]`.
    pub fn constant(tau: f64, s0: [f64; 2]) -> Self {
        let mut segments = VecDeque::new();
        segments.push_back(Segment {
            t0: -tau,
            t1: 0.0,
            y0: s0,
            y1: s0,
            f0: [0.0; 2],
            f1: [0.0; 2],
        });
        Self { tau, segments }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Covered time interval.
    pub fn span(&self) -> (f64, f64) {
        (
            self.segments.front().map_or(f64::NAN, |s| s.t0),
            self.segments.back().map_or(f64::NAN, |s| s.t1),
        )
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Append an accepted step and drop segments older than the delay window.
    pub fn push(&mut self, t0: f64, t1: f64, y0: [f64; 2], y1: [f64; 2], f0: [f64; 2], f1: [f64; 2]) {
        self.segments.push_back(Segment { t0, t1, y0, y1, f0, f1 });
        let cutoff = t1 - self.tau;
        while self.segments.len() > 1 && self.segments[0].t1 < cutoff {
            self.segments.pop_front();
        }
    }

    /// Interpolated state at time `t`; querying outside the buffer is an
    /// invariant breach.
    pub fn eval(&self, t: f64) -> Result<[f64; 2]> {
        let (lo, hi) = self.span();
        let slack = 1e-12 * t.abs().max(self.tau).max(1.0);
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Internal(format!(
                "history query at t={t} outside buffered window [{lo}, {hi}]"
            )));
        }
        let idx = self.segments.partition_point(|s| s.t1 < t);
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        Ok(seg.eval(t))
    }
}

#[derive(Clone, Copy)]
struct BlowupPoint<const N: usize> {
    t: f64,
    y: [f64; N],
    f: [f64; N],
    prev: Option<([f64; N], [f64; N])>,
}

fn max_norm<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Local blow-up exponent `p` in `y' ~ C y^p`, from two points on the
/// dominant component; 2 when the estimate is unreliable.
fn local_exponent(y: f64, f: f64, y_prev: f64, f_prev: f64) -> f64 {
    let ly = (y.abs() / y_prev.abs()).ln();
    let lf = (f.abs() / f_prev.abs()).ln();
    let p = lf / ly;
    if ly.abs() < 1e-3 || !p.is_finite() || p <= 1.05 {
        2.0
    } else {
        p.min(20.0)
    }
}

/// Remaining time to blow-up estimated from the dominant component.
fn remaining_time<const N: usize>(pt: &BlowupPoint<N>) -> f64 {
    let i = (0..N)
        .max_by(|&a, &b| pt.y[a].abs().total_cmp(&pt.y[b].abs()))
        .unwrap_or(0);
    let (y, f) = (pt.y[i], pt.f[i]);
    if !(y * f > 0.0) || !f.is_finite() {
        return 0.0;
    }
    let p = match pt.prev {
        Some((yp, fp)) if yp[i] * fp[i] > 0.0 => local_exponent(y, f, yp[i], fp[i]),
        _ => 2.0,
    };
    y.abs() / ((p - 1.0) * f.abs())
}

fn bracket<const N: usize>(pt: &BlowupPoint<N>, ctl: &StepControl) -> (f64, f64) {
    let slack = 10.0 * ctl.rel_tol * pt.t.abs().max(1.0);
    let delta = remaining_time(pt);
    (pt.t - slack, pt.t + 2.0 * delta + slack)
}

/// Hook for history-dependent problems; the plain ODE drivers use `()`.
trait StepHook<const N: usize> {
    fn accepted(&mut self, t0: f64, t1: f64, y0: &[f64; N], y1: &[f64; N], f0: &[f64; N], f1: &[f64; N]);
}

impl<const N: usize> StepHook<N> for () {
    fn accepted(&mut self, _: f64, _: f64, _: &[f64; N], _: &[f64; N], _: &[f64; N], _: &[f64; N]) {}
}

struct RunResult<const N: usize> {
    samples: Vec<(f64, [f64; N])>,
    outcome: SimOutcome,
}

#[derive(PartialEq)]
enum Phase {
    Normal,
    Corroborating,
}

/// Shared driver. `rate` evaluates the vector field; `hook` sees every
/// accepted step; `delay` (when set) caps the step and forces step endpoints
/// onto its multiples, where the stepper restarts.
fn drive<const N: usize, F, H>(
    mut rate: F,
    hook: &mut H,
    y0: [f64; N],
    ctl: &StepControl,
    delay: Option<f64>,
) -> Result<RunResult<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    H: StepHook<N>,
{
    let threshold = ctl.blowup_threshold;
    let mut t = 0.0f64;
    let mut y = y0;
    let mut k1 = rate(t, &y)?;
    let mut h = ctl.h_init.min(ctl.h_max);
    if let Some(tau) = delay {
        h = h.min(tau);
    }
    let mut pi = PiController::new();
    let mut samples = vec![(0.0, y)];
    let mut phase = Phase::Normal;
    let mut prev: Option<([f64; N], [f64; N])> = None;
    let mut breakpoint_index: u64 = 1;
    let mut sample_index: u64 = 1;

    let finish_blowup = |t: f64,
                         y: [f64; N],
                         f: [f64; N],
                         prev: Option<([f64; N], [f64; N])>,
                         samples: Vec<(f64, [f64; N])>|
     -> Result<RunResult<N>> {
        let pt = BlowupPoint { t, y, f, prev };
        let (t_low, t_high) = bracket(&pt, ctl);
        Ok(RunResult {
            samples,
            outcome: SimOutcome::BlowUp { t_low, t_high },
        })
    };

    loop {
        if t >= ctl.t_end {
            return Ok(RunResult {
                samples,
                outcome: SimOutcome::Completed { t_end: t },
            });
        }

        let mut target = ctl.t_end;
        let mut at_breakpoint = false;
        let mut at_sample = false;
        if let Some(tau) = delay {
            let bp = breakpoint_index as f64 * tau;
            if bp <= target {
                at_breakpoint = true;
                target = bp;
            }
        }
        if let Some(dt) = ctl.sample_dt {
            let st = sample_index as f64 * dt;
            if st < target {
                at_breakpoint = false;
                at_sample = true;
                target = st;
            } else if st == target {
                at_sample = true;
            }
        }

        let collapse = if phase == Phase::Corroborating {
            ctl.h_min.max(1e-14 * t.abs().max(1.0))
        } else {
            ctl.h_min
        };
        if h < collapse {
            if phase == Phase::Corroborating {
                return finish_blowup(t, y, k1, prev, samples);
            }
            return Ok(RunResult {
                samples,
                outcome: SimOutcome::StepFailure {
                    t,
                    reason: format!("step size {h:e} fell below h_min {:e}", ctl.h_min),
                },
            });
        }

        let lands = t + 1.01 * h >= target;
        let h_try = if lands { target - t } else { h };
        let trial = dopri_step(&mut rate, t, &y, &k1, h_try, ctl.rel_tol, ctl.abs_tol)?;
        if !(trial.err <= 1.0) || !trial.y.iter().all(|v| v.is_finite()) {
            h = pi.reject(trial.err, h_try);
            continue;
        }

        let t_new = if lands { target } else { t + h_try };
        let mut f_new = trial.f_new;
        hook.accepted(t, t_new, &y, &trial.y, &k1, &f_new);
        let mut h_next = pi.accept(trial.err, h_try);
        if lands && h_try < h {
            h_next = h_next.max(h);
        }
        h = h_next.min(ctl.h_max);
        if let Some(tau) = delay {
            h = h.min(tau);
        }

        prev = Some((y, k1));
        t = t_new;
        y = trial.y;

        if lands && at_breakpoint {
            breakpoint_index += 1;
            f_new = rate(t, &y)?;
            pi.reset();
        }
        k1 = f_new;

        match ctl.sample_dt {
            None => samples.push((t, y)),
            Some(_) if lands && at_sample => {
                sample_index += 1;
                samples.push((t, y));
            }
            Some(_) if lands && t >= ctl.t_end => samples.push((t, y)),
            Some(_) => {}
        }

        let norm = max_norm(&y);
        match phase {
            Phase::Normal if norm > threshold => phase = Phase::Corroborating,
            Phase::Corroborating if norm > threshold * threshold => {
                return finish_blowup(t, y, k1, prev, samples);
            }
            Phase::Corroborating if norm < threshold * 1e-2 => phase = Phase::Normal,
            _ => {}
        }
    }
}

fn check_state(s: &StateVector) -> Result<()> {
    StateVector::new(s.x, s.y).map(|_| ())
}

fn to_model_trajectory(run: RunResult<2>) -> Trajectory {
    Trajectory {
        samples: run.samples.into_iter().map(|(t, y)| (t, StateVector::from(y))).collect(),
        outcome: run.outcome,
    }
}

/// Integrate the non-delayed model (the delay in `p` is ignored).
pub fn integrate_ode(s0: StateVector, p: &ModelParameters, ctl: &StepControl) -> Result<Trajectory> {
    p.validate()?;
    ctl.validate()?;
    check_state(&s0)?;
    let run = drive(|_t, y: &[f64; 2]| Ok(p.rate(*y, *y)), &mut (), s0.as_array(), ctl, None)?;
    Ok(to_model_trajectory(run))
}

/// Integrate the delayed model by the method of steps with constant history
/// `s0` on `[-tau, 0]`.
pub fn integrate_dde(s0: StateVector, p: &ModelParameters, ctl: &StepControl) -> Result<Trajectory> {
    p.validate()?;
    ctl.validate()?;
    check_state(&s0)?;
    let tau = p.tau;
    if !(tau > 0.0) {
        return Err(Error::Precondition(format!("integrate_dde needs tau > 0, got {tau}")));
    }
    let history = std::cell::RefCell::new(HistoryBuffer::constant(tau, s0.as_array()));
    let rate = |t: f64, y: &[f64; 2]| {
        let lag = history.borrow().eval(t - tau)?;
        Ok(p.rate(*y, lag))
    };
    let mut hook = DeferredHistory(&history);
    let run = drive(rate, &mut hook, s0.as_array(), ctl, Some(tau))?;
    Ok(to_model_trajectory(run))
}

struct DeferredHistory<'a>(&'a std::cell::RefCell<HistoryBuffer>);

impl StepHook<2> for DeferredHistory<'_> {
    fn accepted(&mut self, t0: f64, t1: f64, y0: &[f64; 2], y1: &[f64; 2], f0: &[f64; 2], f1: &[f64; 2]) {
        self.0.borrow_mut().push(t0, t1, *y0, *y1, *f0, *f1);
    }
}

/// Integrate an arbitrary (possibly non-autonomous) system with the same
/// step control and blow-up contract as the model drivers.
pub fn integrate_system<const N: usize, F>(f: F, y0: [f64; N], ctl: &StepControl) -> Result<Trajectory<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    ctl.validate()?;
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("non-finite initial state".into()));
    }
    let run = drive(|t, y: &[f64; N]| Ok(f(t, y)), &mut (), y0, ctl, None)?;
    Ok(Trajectory {
        samples: run.samples,
        outcome: run.outcome,
    })
}

/// Blow-up time bracket with the arc-length cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupEstimate {
    pub t_low: f64,
    pub t_high: f64,
    /// Blow-up time from the arc-length re-integration, when it succeeded.
    pub arc_estimate: Option<f64>,
    /// False when the two estimates disagree by more than the coarse bracket
    /// width; the coarse bracket is then returned unchanged.
    pub consistent: bool,
}

/// Bracket the blow-up time of the autonomous system `y' = f(y)` from `y0`.
///
/// The step-collapse bracket from the adaptive run is cross-checked by
/// integrating `(t, y)` against arc length, where `dt/ds = 1/sqrt(1+|f|^2)`
/// keeps every derivative bounded and the singularity sits at finite `t`.
/// Supports systems of dimension 1 and 2.
pub fn estimate_blowup_time<const N: usize, F>(f: F, y0: [f64; N], ctl: &StepControl) -> Result<BlowupEstimate>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    ctl.validate()?;
    let run = drive(|_t, y: &[f64; N]| Ok(f(y)), &mut (), y0, ctl, None)?;
    let (t_low, t_high) = match run.outcome {
        SimOutcome::BlowUp { t_low, t_high } => (t_low, t_high),
        other => {
            return Err(Error::Precondition(format!(
                "estimate_blowup_time needs a blowing-up run, got {other:?}"
            )))
        }
    };
    let arc = match N {
        1 => arc_length_time::<N, 2, _>(&f, y0, ctl),
        2 => arc_length_time::<N, 3, _>(&f, y0, ctl),
        _ => None,
    };
    let width = t_high - t_low;
    let Some(t_arc) = arc else {
        return Ok(BlowupEstimate {
            t_low,
            t_high,
            arc_estimate: None,
            consistent: false,
        });
    };
    let gap = if t_arc < t_low {
        t_low - t_arc
    } else if t_arc > t_high {
        t_arc - t_high
    } else {
        0.0
    };
    if gap > width {
        return Ok(BlowupEstimate {
            t_low,
            t_high,
            arc_estimate: Some(t_arc),
            consistent: false,
        });
    }
    let arc_slack = 10.0 * ctl.rel_tol * t_arc.abs().max(1.0);
    let lo = t_low.max(t_arc - arc_slack);
    let hi = t_high.min(t_arc + arc_slack);
    let (t_low, t_high) = if lo < hi { (lo, hi) } else { (t_low, t_high) };
    Ok(BlowupEstimate {
        t_low,
        t_high,
        arc_estimate: Some(t_arc),
        consistent: true,
    })
}

/// Integrate `(t, y)` against arc length until `|y|` passes the threshold
/// squared, then add the local remaining-time estimate. `M` must be `N + 1`.
fn arc_length_time<const N: usize, const M: usize, F>(f: &F, y0: [f64; N], ctl: &StepControl) -> Option<f64>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    assert_eq!(M, N + 1);
    let split = |z: &[f64; M]| {
        let mut y = [0.0; N];
        y.copy_from_slice(&z[1..]);
        y
    };
    let mut field = |_s: f64, z: &[f64; M]| -> Result<[f64; M]> {
        let fy = f(&split(z));
        let speed = (1.0 + fy.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let mut out = [0.0; M];
        out[0] = 1.0 / speed;
        for i in 0..N {
            out[i + 1] = fy[i] / speed;
        }
        Ok(out)
    };
    let cap = ctl.blowup_threshold * ctl.blowup_threshold;
    let mut z = [0.0; M];
    z[1..].copy_from_slice(&y0);
    let mut s = 0.0;
    let mut k1 = field(s, &z).ok()?;
    let mut h = ctl.h_init;
    let mut pi = PiController::new();
    let mut prev: Option<([f64; N], [f64; N])> = None;
    for _ in 0..2_000_000 {
        let y = split(&z);
        if max_norm(&y) > cap || h < 1e-300 {
            let pt = BlowupPoint {
                t: z[0],
                y,
                f: f(&y),
                prev,
            };
            return Some(z[0] + remaining_time(&pt));
        }
        if z[0] > ctl.t_end {
            return None;
        }
        let trial = dopri_step(&mut field, s, &z, &k1, h, ctl.rel_tol, ctl.abs_tol).ok()?;
        if !(trial.err <= 1.0) || !trial.y.iter().all(|v| v.is_finite()) {
            h = pi.reject(trial.err, h);
            continue;
        }
        let y_old = split(&z);
        prev = Some((y_old, f(&y_old)));
        s += h;
        z = trial.y;
        k1 = trial.f_new;
        h = pi.accept(trial.err, h);
    }
    None
}
