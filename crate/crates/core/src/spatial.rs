//! Reaction-diffusion solver on node-centred grids with zero-flux boundaries.
//!
//! Each step is a Strang splitting: half a reaction step (pointwise RK4), a
//! full diffusion step, then another half reaction step. Diffusion is backward
//! Euler by default (Thomas elimination in 1D, one sweep per axis in 2D); an
//! explicit variant substeps forward Euler below its stability bound. Delayed
//! reactions read the lagged field from a [`FieldHistory`] by linear
//! interpolation in time.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::integrator::SimOutcome;
use crate::linear::Diffusivities;
use crate::model::{Mat2, ModelParameters};

/// Uniform node-centred grid on `[0, lx]` (times `[0, ly]` in 2D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid {
    pub fn line(nx: usize, lx: f64) -> Result<Self> {
        Self::check(nx, lx)?;
        Ok(Self {
            dim: 1,
            nx,
            ny: 1,
            lx,
            ly: 0.0,
        })
    }

    pub fn square(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::check(nx, lx)?;
        Self::check(ny, ly)?;
        Ok(Self { dim: 2, nx, ny, lx, ly })
    }

    /// `nx` points on `[0, pi]`.
    pub fn default_line(nx: usize) -> Result<Self> {
        Self::line(nx, std::f64::consts::PI)
    }

    /// 300 x 300 lattice on `[0, pi]^2`.
    pub fn default_square() -> Self {
        let pi = std::f64::consts::PI;
        Self::square(300, 300, pi, pi).expect("static grid is valid")
    }

    fn check(n: usize, l: f64) -> Result<()> {
        if n < 3 {
            return Err(Error::Domain(format!("grids need at least 3 points per axis, got {n}")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::Domain(format!("extent must be positive, got {l}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn dx(&self) -> f64 {
        self.lx / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        if self.dim == 1 {
            0.0
        } else {
            self.ly / (self.ny - 1) as f64
        }
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, ix: usize) -> f64 {
        ix as f64 * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        iy as f64 * self.dy()
    }

    /// Row-major index: rows are `iy`, columns `ix`.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Trapezoid weight of a node (product of per-axis weights, in units of
    /// cell area).
    fn weight(&self, ix: usize, iy: usize) -> f64 {
        let edge = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        if self.dim == 1 {
            edge(ix, self.nx) * self.dx()
        } else {
            edge(ix, self.nx) * edge(iy, self.ny) * self.dx() * self.dy()
        }
    }

    /// Trapezoid-rule integral of a nodal field over the domain.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        self.expect_len(f.len())?;
        let mut s = 0.0;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                s += self.weight(ix, iy) * f[self.index(ix, iy)];
            }
        }
        Ok(s)
    }

    fn expect_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "field has {n} values, grid has {} nodes",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Prey and predator values on a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    pub t: f64,
    pub prey: Vec<f64>,
    pub predator: Vec<f64>,
}

impl SpatialField {
    pub fn uniform(grid: &Grid, state: [f64; 2]) -> Self {
        Self {
            t: 0.0,
            prey: vec![state[0]; grid.len()],
            predator: vec![state[1]; grid.len()],
        }
    }

    /// Sample `f(x, y)` at every node (`y = 0` in 1D).
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> [f64; 2]) -> Self {
        let mut out = Self::uniform(grid, [0.0, 0.0]);
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let v = f(grid.x(ix), grid.y(iy));
                let i = grid.index(ix, iy);
                out.prey[i] = v[0];
                out.predator[i] = v[1];
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.prey.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prey.is_empty()
    }

    pub fn component(&self, which: usize) -> &[f64] {
        if which == 0 {
            &self.prey
        } else {
            &self.predator
        }
    }

    pub fn norm_max(&self) -> f64 {
        self.prey
            .iter()
            .chain(self.predator.iter())
            .fold(0.0_f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
    }

    /// Arithmetic mean of each component over the nodes.
    pub fn mean(&self) -> [f64; 2] {
        let n = self.len() as f64;
        [self.prey.iter().sum::<f64>() / n, self.predator.iter().sum::<f64>() / n]
    }

    /// Largest nodal deviation from a homogeneous state.
    pub fn max_deviation(&self, state: [f64; 2]) -> f64 {
        let a = self.prey.iter().map(|v| (v - state[0]).abs());
        let b = self.predator.iter().map(|v| (v - state[1]).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    fn check_len(&self, grid: &Grid) -> Result<()> {
        grid.expect_len(self.prey.len())?;
        grid.expect_len(self.predator.len())
    }

    /// Zero tiny negative round-off; report the most negative value if any
    /// entry is below `-1e-12`.
    fn clip_negativity(&mut self) -> std::result::Result<(), f64> {
        let mut worst = 0.0_f64;
        for v in self.prey.iter_mut().chain(self.predator.iter_mut()) {
            if *v < 0.0 {
                if *v >= -1e-12 {
                    *v = 0.0;
                } else {
                    worst = worst.min(*v);
                }
            }
        }
        if worst < 0.0 {
            Err(worst)
        } else {
            Ok(())
        }
    }
}

/// `base + amp * cos^2(wave x)` in 1D, `base + amp * cos^2(wave x) cos^2(wave y)`
/// in 2D. With `open_interval`, boundary nodes keep the base state.
pub fn cos2_perturbation(grid: &Grid, base: [f64; 2], amp: [f64; 2], wave: f64, open_interval: bool) -> SpatialField {
    let two_d = grid.dim() == 2;
    let (lx, ly) = (grid.lx(), grid.ly());
    SpatialField::from_fn(grid, |x, y| {
        let on_edge = x <= 0.0 || x >= lx * (1.0 - 1e-14) || (two_d && (y <= 0.0 || y >= ly * (1.0 - 1e-14)));
        if open_interval && on_edge {
            return base;
        }
        let mut s = (wave * x).cos().powi(2);
        if two_d {
            s *= (wave * y).cos().powi(2);
        }
        [base[0] + amp[0] * s, base[1] + amp[1] * s]
    })
}

/// `base + amp * cos(n pi x / lx)` on a 1D grid.
pub fn cosine_mode(grid: &Grid, base: [f64; 2], amp: [f64; 2], n: usize) -> SpatialField {
    let k = n as f64 * std::f64::consts::PI / grid.lx();
    SpatialField::from_fn(grid, |x, _| {
        let c = (k * x).cos();
        [base[0] + amp[0] * c, base[1] + amp[1] * c]
    })
}

/// Discrete Laplacian with ghost-point reflection at every boundary.
pub fn laplacian(f: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.expect_len(f.len())?;
    let mut out = vec![0.0; f.len()];
    laplacian_into(f, grid, &mut out);
    Ok(out)
}

fn second_difference(f: &[f64], stride: usize, n: usize, start: usize, inv_h2: f64, out: &mut [f64]) {
    let at = |i: usize| f[start + i * stride];
    out[start] += 2.0 * (at(1) - at(0)) * inv_h2;
    for i in 1..n - 1 {
        out[start + i * stride] += (at(i + 1) - 2.0 * at(i) + at(i - 1)) * inv_h2;
    }
    out[start + (n - 1) * stride] += 2.0 * (at(n - 2) - at(n - 1)) * inv_h2;
}

fn laplacian_into(f: &[f64], grid: &Grid, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    for iy in 0..grid.ny {
        second_difference(f, 1, grid.nx, grid.index(0, iy), inv_dx2, out);
    }
    if grid.dim == 2 {
        let inv_dy2 = 1.0 / (grid.dy() * grid.dy());
        for ix in 0..grid.nx {
            second_difference(f, grid.nx, grid.ny, ix, inv_dy2, out);
        }
    }
}

/// Cosine-series coefficients of a 1D nodal field:
/// `a_0` is the mean and `a_n = (2/L) int f cos(n pi x / L) dx` for `n > 0`,
/// both by the trapezoid rule.
pub fn mode_amplitudes(f: &[f64], grid: &Grid, modes: &[usize]) -> Result<Vec<f64>> {
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch("mode amplitudes need a 1D grid".into()));
    }
    grid.expect_len(f.len())?;
    let l = grid.lx();
    let n_pts = grid.nx();
    let dx = grid.dx();
    Ok(modes
        .iter()
        .map(|&n| {
            let k = n as f64 * std::f64::consts::PI / l;
            let mut s = 0.0;
            for (i, v) in f.iter().enumerate() {
                let w = if i == 0 || i == n_pts - 1 { 0.5 } else { 1.0 };
                s += w * v * (k * i as f64 * dx).cos();
            }
            s *= dx;
            if n == 0 {
                s / l
            } else {
                2.0 * s / l
            }
        })
        .collect())
}

/// Local kinetics of a two-component reaction-diffusion system.
pub trait Reaction {
    /// Rate at one node given the current values and the values one delay
    /// earlier (equal to `now` when the delay is zero).
    fn reaction(&self, now: [f64; 2], lag: [f64; 2]) -> [f64; 2];

    fn delay(&self) -> f64;
}

impl Reaction for ModelParameters {
    fn reaction(&self, now: [f64; 2], lag: [f64; 2]) -> [f64; 2] {
        self.rate(now, lag)
    }

    fn delay(&self) -> f64 {
        self.tau
    }
}

/// Affine kinetics `instant (u - base) + delayed (u_lag - base)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearReaction {
    pub instant: Mat2,
    pub delayed: Mat2,
    pub base: [f64; 2],
    pub tau: f64,
}

impl LinearReaction {
    /// Non-delayed kinetics with Jacobian `jac` about `base`.
    pub fn new(jac: Mat2, base: [f64; 2]) -> Self {
        Self {
            instant: jac,
            delayed: [[0.0; 2]; 2],
            base,
            tau: 0.0,
        }
    }

    /// No reaction at all.
    pub fn none() -> Self {
        Self::new([[0.0; 2]; 2], [0.0; 2])
    }
}

impl Reaction for LinearReaction {
    fn reaction(&self, now: [f64; 2], lag: [f64; 2]) -> [f64; 2] {
        let u = [now[0] - self.base[0], now[1] - self.base[1]];
        let v = [lag[0] - self.base[0], lag[1] - self.base[1]];
        let a = &self.instant;
        let b = &self.delayed;
        [
            a[0][0] * u[0] + a[0][1] * u[1] + b[0][0] * v[0] + b[0][1] * v[1],
            a[1][0] * u[0] + a[1][1] * u[1] + b[1][0] * v[0] + b[1][1] * v[1],
        ]
    }

    fn delay(&self) -> f64 {
        self.tau
    }
}

/// Past fields covering at least `[t - tau, t]`, pruned as time advances.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    tau: f64,
    entries: VecDeque<SpatialField>,
}

impl FieldHistory {
    /// History equal to `field` on `[field.t - tau, field.t]`.
    pub fn constant(tau: f64, field: &SpatialField) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Precondition(format!("history needs tau > 0, got {tau}")));
        }
        let mut past = field.clone();
        past.t = field.t - tau;
        Ok(Self {
            tau,
            entries: VecDeque::from(vec![past, field.clone()]),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Time range currently stored.
    pub fn span(&self) -> (f64, f64) {
        (self.entries.front().map_or(f64::NAN, |f| f.t), self.entries.back().map_or(f64::NAN, |f| f.t))
    }

    /// Append a field at a later time and drop entries no longer needed.
    pub fn push(&mut self, field: &SpatialField) -> Result<()> {
        if let Some(last) = self.entries.back() {
            if !(field.t > last.t) {
                return Err(Error::Internal(format!(
                    "history times must increase: {} after {}",
                    field.t, last.t
                )));
            }
        }
        self.entries.push_back(field.clone());
        let cutoff = field.t - self.tau;
        while self.entries.len() > 2 && self.entries[1].t <= cutoff {
            self.entries.pop_front();
        }
        Ok(())
    }

    /// Linear interpolation in time.
    pub fn eval(&self, t: f64) -> Result<SpatialField> {
        let (t0, t1) = self.span();
        let slack = 1e-12 * t.abs().max(self.tau).max(1.0);
        if !(t >= t0 - slack && t <= t1 + slack) {
            return Err(Error::Internal(format!("history query at {t} outside [{t0}, {t1}]")));
        }
        let j = self.entries.partition_point(|f| f.t < t).clamp(1, self.entries.len() - 1);
        let a = &self.entries[j - 1];
        let b = &self.entries[j];
        let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        let mix = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p + w * (q - p)).collect::<Vec<_>>();
        Ok(SpatialField {
            t,
            prey: mix(&a.prey, &b.prey),
            predator: mix(&a.predator, &b.predator),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffusionScheme {
    #[default]
    Implicit,
    /// Forward Euler, substepped to `dt <= dx^2 / (2 dim max(d1, d2))`.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeControl {
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot spacing in time; `None` keeps only the initial and final
    /// fields. Must be a whole multiple of `dt`.
    pub snapshot_dt: Option<f64>,
    pub scheme: DiffusionScheme,
    /// Field max-norm above which a run is treated as blowing up.
    pub blowup_threshold: f64,
}

impl Default for PdeControl {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 10.0,
            snapshot_dt: None,
            scheme: DiffusionScheme::Implicit,
            blowup_threshold: 1e8,
        }
    }
}

impl PdeControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidControl(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidControl(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(Error::InvalidControl(format!(
                "blow-up threshold must exceed 1, got {}",
                self.blowup_threshold
            )));
        }
        if let Some(s) = self.snapshot_dt {
            let ratio = s / self.dt;
            if !(s > 0.0 && ratio >= 1.0 - 1e-9 && (ratio - ratio.round()).abs() < 1e-6 * ratio) {
                return Err(Error::InvalidControl(format!(
                    "snapshot spacing {s} is not a positive multiple of dt = {}",
                    self.dt
                )));
            }
        }
        Ok(())
    }

    fn snapshot_stride(&self) -> Option<usize> {
        self.snapshot_dt.map(|s| (s / self.dt).round() as usize)
    }
}

/// Snapshots of a run and how it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeRun {
    pub snapshots: Vec<SpatialField>,
    pub outcome: SimOutcome,
    pub steps: usize,
}

impl PdeRun {
    pub fn last(&self) -> Option<&SpatialField> {
        self.snapshots.last()
    }
}

/// Precomputed Thomas elimination for `(I - a L) u = rhs` on one axis with
/// reflected ends.
#[derive(Debug, Clone)]
struct Tridiagonal {
    a: f64,
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl Tridiagonal {
    fn new(n: usize, a: f64) -> Self {
        let diag = 1.0 + 2.0 * a;
        let upper = |i: usize| if i == 0 { -2.0 * a } else { -a };
        let lower = |i: usize| if i == n - 1 { -2.0 * a } else { -a };
        let mut c_prime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        inv_denom[0] = 1.0 / diag;
        c_prime[0] = upper(0) * inv_denom[0];
        for i in 1..n {
            let denom = diag - lower(i) * c_prime[i - 1];
            inv_denom[i] = 1.0 / denom;
            if i < n - 1 {
                c_prime[i] = upper(i) * inv_denom[i];
            }
        }
        Self { a, c_prime, inv_denom }
    }

    /// Solve in place on `buf`; returns the relative residual.
    fn solve(&self, buf: &mut [f64], rhs_copy: &mut Vec<f64>) -> f64 {
        let n = buf.len();
        let a = self.a;
        rhs_copy.clear();
        rhs_copy.extend_from_slice(buf);
        let lower = |i: usize| if i == n - 1 { -2.0 * a } else { -a };
        buf[0] *= self.inv_denom[0];
        for i in 1..n {
            buf[i] = (buf[i] - lower(i) * buf[i - 1]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            buf[i] -= self.c_prime[i] * buf[i + 1];
        }
        let diag = 1.0 + 2.0 * a;
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { lower(i) * buf[i - 1] };
            let right = if i == 0 {
                -2.0 * a * buf[1]
            } else if i == n - 1 {
                0.0
            } else {
                -a * buf[i + 1]
            };
            worst = worst.max((left + diag * buf[i] + right - rhs_copy[i]).abs());
            scale = scale.max(rhs_copy[i].abs());
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }
}

const RESIDUAL_LIMIT: f64 = 1e-10;

struct Solver<'a, R: Reaction> {
    grid: Grid,
    diff: Diffusivities,
    reaction: &'a R,
    scheme: DiffusionScheme,
    tau: f64,
    /// Cached factorizations keyed by step size: per component, x then y axis.
    factors: Option<(f64, [[Option<Tridiagonal>; 2]; 2])>,
}

type StepAttempt = std::result::Result<SpatialField, String>;

impl<R: Reaction> Solver<'_, R> {
    fn lag_field(&self, history: Option<&FieldHistory>, t: f64) -> Result<Option<SpatialField>> {
        history.map(|h| h.eval(t - self.tau)).transpose()
    }

    /// RK4 on every node over `[t0, t0 + h]`.
    fn react(&self, u: &mut SpatialField, t0: f64, h: f64, history: Option<&FieldHistory>) -> Result<()> {
        let lag0 = self.lag_field(history, t0)?;
        let lagm = self.lag_field(history, t0 + 0.5 * h)?;
        let lag1 = self.lag_field(history, t0 + h)?;
        let pick = |lag: &Option<SpatialField>, i: usize, fallback: [f64; 2]| {
            lag.as_ref().map_or(fallback, |f| [f.prey[i], f.predator[i]])
        };
        for i in 0..u.len() {
            let y = [u.prey[i], u.predator[i]];
            let add = |a: [f64; 2], s: f64, k: [f64; 2]| [a[0] + s * k[0], a[1] + s * k[1]];
            let k1 = self.reaction.reaction(y, pick(&lag0, i, y));
            let y2 = add(y, 0.5 * h, k1);
            let k2 = self.reaction.reaction(y2, pick(&lagm, i, y2));
            let y3 = add(y, 0.5 * h, k2);
            let k3 = self.reaction.reaction(y3, pick(&lagm, i, y3));
            let y4 = add(y, h, k3);
            let k4 = self.reaction.reaction(y4, pick(&lag1, i, y4));
            u.prey[i] = y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            u.predator[i] = y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        }
        u.t = t0 + h;
        Ok(())
    }

    fn factors_for(&mut self, h: f64) -> &[[Option<Tridiagonal>; 2]; 2] {
        let stale = self.factors.as_ref().map_or(true, |(cached, _)| *cached != h);
        if stale {
            let g = self.grid;
            let build = |d: f64, n: usize, spacing: f64| (d > 0.0).then(|| Tridiagonal::new(n, h * d / (spacing * spacing)));
            let per = |d: f64| [build(d, g.nx, g.dx()), if g.dim == 2 { build(d, g.ny, g.dy()) } else { None }];
            self.factors = Some((h, [per(self.diff.d1), per(self.diff.d2)]));
        }
        &self.factors.as_ref().expect("factors just built").1
    }

    fn diffuse(&mut self, u: &mut SpatialField, h: f64) -> std::result::Result<(), String> {
        match self.scheme {
            DiffusionScheme::Implicit => self.diffuse_implicit(u, h),
            DiffusionScheme::Explicit => {
                self.diffuse_explicit(u, h);
                Ok(())
            }
        }
    }

    fn diffuse_implicit(&mut self, u: &mut SpatialField, h: f64) -> std::result::Result<(), String> {
        let g = self.grid;
        let factors = self.factors_for(h).clone();
        let mut scratch = Vec::new();
        let mut line = Vec::new();
        for (comp, axes) in factors.iter().enumerate() {
            let field = if comp == 0 { &mut u.prey } else { &mut u.predator };
            if let Some(tx) = &axes[0] {
                for iy in 0..g.ny {
                    let row = &mut field[iy * g.nx..(iy + 1) * g.nx];
                    let res = tx.solve(row, &mut scratch);
                    if !(res < RESIDUAL_LIMIT) {
                        return Err(format!("implicit x-sweep residual {res:e}"));
                    }
                }
            }
            if let Some(ty) = &axes[1] {
                for ix in 0..g.nx {
                    line.clear();
                    line.extend((0..g.ny).map(|iy| field[iy * g.nx + ix]));
                    let res = ty.solve(&mut line, &mut scratch);
                    if !(res < RESIDUAL_LIMIT) {
                        return Err(format!("implicit y-sweep residual {res:e}"));
                    }
                    for (iy, v) in line.iter().enumerate() {
                        field[iy * g.nx + ix] = *v;
                    }
                }
            }
        }
        Ok(())
    }

    fn diffuse_explicit(&self, u: &mut SpatialField, h: f64) {
        let g = self.grid;
        let d_max = self.diff.d1.max(self.diff.d2);
        if d_max == 0.0 {
            return;
        }
        let mut spacing2 = g.dx() * g.dx();
        if g.dim == 2 {
            spacing2 = spacing2.min(g.dy() * g.dy());
        }
        let cap = spacing2 / (2.0 * g.dim as f64 * d_max);
        let n_sub = (h / cap).ceil().max(1.0) as usize;
        let sub = h / n_sub as f64;
        let mut lap = vec![0.0; g.len()];
        for (field, d) in [(&mut u.prey, self.diff.d1), (&mut u.predator, self.diff.d2)] {
            if d == 0.0 {
                continue;
            }
            for _ in 0..n_sub {
                laplacian_into(field, &g, &mut lap);
                for (v, l) in field.iter_mut().zip(&lap) {
                    *v += sub * d * l;
                }
            }
        }
    }

    /// One Strang step of size `h` from `u`.
    fn step(&mut self, u: &SpatialField, h: f64, history: Option<&FieldHistory>) -> Result<StepAttempt> {
        let t0 = u.t;
        let mut v = u.clone();
        self.react(&mut v, t0, 0.5 * h, history)?;
        if let Err(e) = self.diffuse(&mut v, h) {
            return Ok(Err(e));
        }
        self.react(&mut v, t0 + 0.5 * h, 0.5 * h, history)?;
        v.t = t0 + h;
        Ok(Ok(v))
    }
}

enum Verdict {
    Good,
    Large,
    Negative(f64),
}

fn judge(v: &mut SpatialField, threshold: f64) -> Verdict {
    let n = v.norm_max();
    if !(n <= threshold) {
        return Verdict::Large;
    }
    match v.clip_negativity() {
        Ok(()) => Verdict::Good,
        Err(w) => Verdict::Negative(w),
    }
}

fn run<R: Reaction>(ic: &SpatialField, reaction: &R, diff: &Diffusivities, grid: &Grid, ctl: &PdeControl) -> Result<PdeRun> {
    ctl.validate()?;
    ic.check_len(grid)?;
    if !(ic.norm_max().is_finite()) {
        return Err(Error::Domain("initial field has non-finite entries".into()));
    }
    let tau = reaction.delay();
    let mut u = ic.clone();
    if u.clip_negativity().is_err() {
        return Err(Error::Domain("initial field has negative entries".into()));
    }
    let mut history = if tau > 0.0 {
        if ctl.dt > tau {
            return Err(Error::InvalidControl(format!("delayed runs need dt <= tau, got dt = {} > {tau}", ctl.dt)));
        }
        Some(FieldHistory::constant(tau, &u)?)
    } else {
        None
    };
    let mut solver = Solver {
        grid: *grid,
        diff: *diff,
        reaction,
        scheme: ctl.scheme,
        tau,
        factors: None,
    };

    let t_start = u.t;
    let n_steps = ((ctl.t_end / ctl.dt) - 1e-9).ceil().max(1.0) as usize;
    let stride = ctl.snapshot_stride();
    let mut snapshots = vec![u.clone()];
    let mut steps = 0;
    for n in 1..=n_steps {
        let t_target = if n == n_steps { t_start + ctl.t_end } else { t_start + n as f64 * ctl.dt };
        let h = t_target - u.t;
        let attempt = solver.step(&u, h, history.as_ref())?;
        steps += 1;
        let mut v = match attempt {
            Ok(v) => v,
            Err(reason) => {
                snapshots.push(u.clone());
                return Ok(PdeRun {
                    snapshots,
                    outcome: SimOutcome::StepFailure { t: u.t, reason },
                    steps,
                });
            }
        };
        match judge(&mut v, ctl.blowup_threshold) {
            Verdict::Good => {}
            Verdict::Negative(w) => {
                snapshots.push(u.clone());
                return Ok(PdeRun {
                    snapshots,
                    outcome: SimOutcome::StepFailure {
                        t: u.t,
                        reason: format!("negative value {w:e} after step to t = {t_target}"),
                    },
                    steps,
                });
            }
            Verdict::Large => {
                match refine(&mut solver, &mut u, &mut history, t_target, ctl.blowup_threshold, &mut steps)? {
                    Some(outcome) => {
                        snapshots.push(u.clone());
                        return Ok(PdeRun { snapshots, outcome, steps });
                    }
                    None => v = u.clone(),
                }
            }
        }
        v.t = t_target;
        if let Some(hist) = history.as_mut() {
            if hist.span().1 < v.t {
                hist.push(&v)?;
            }
        }
        u = v;
        let at_stride = stride.is_some_and(|s| n % s == 0);
        if at_stride || n == n_steps {
            snapshots.push(u.clone());
        }
    }
    Ok(PdeRun {
        snapshots,
        outcome: SimOutcome::Completed { t_end: u.t },
        steps,
    })
}

/// Retry the interval up to `target` with halved steps. Returns a blow-up
/// bracket once a failing step is no wider than `max(1e-6, 1e-4 t)`, or
/// `None` if the target is reached after all (the state is then at
/// `target`).
fn refine<R: Reaction>(
    solver: &mut Solver<'_, R>,
    u: &mut SpatialField,
    history: &mut Option<FieldHistory>,
    target: f64,
    threshold: f64,
    steps: &mut usize,
) -> Result<Option<SimOutcome>> {
    let mut h = 0.5 * (target - u.t);
    loop {
        let width = 1e-6_f64.max(1e-4 * u.t.abs());
        let h_try = h.min(target - u.t);
        let attempt = solver.step(u, h_try, history.as_ref())?;
        *steps += 1;
        let ok = match attempt {
            Ok(mut v) => match judge(&mut v, threshold) {
                Verdict::Good => Some(v),
                _ => None,
            },
            Err(_) => None,
        };
        match ok {
            Some(mut v) => {
                let reached = target - (u.t + h_try) <= 1e-12 * target.abs().max(1.0);
                v.t = if reached { target } else { u.t + h_try };
                if let Some(hist) = history.as_mut() {
                    hist.push(&v)?;
                }
                *u = v;
                if reached {
                    return Ok(None);
                }
            }
            None => {
                if h_try <= width {
                    return Ok(Some(SimOutcome::BlowUp {
                        t_low: u.t,
                        t_high: u.t + h_try,
                    }));
                }
                h = 0.5 * h_try;
            }
        }
    }
}

fn check_diffusivities(diff: &Diffusivities) -> Result<()> {
    if !(diff.d1 >= 0.0 && diff.d2 >= 0.0) {
        return Err(Error::Domain(format!("diffusivities must be non-negative: {diff:?}")));
    }
    Ok(())
}

/// Non-delayed reaction-diffusion run. The reaction must have zero delay.
pub fn simulate_rd<R: Reaction>(
    ic: &SpatialField,
    reaction: &R,
    diff: &Diffusivities,
    grid: &Grid,
    ctl: &PdeControl,
) -> Result<PdeRun> {
    if reaction.delay() != 0.0 {
        return Err(Error::Precondition(format!(
            "simulate_rd needs zero delay, got {}; use simulate_rd_delayed",
            reaction.delay()
        )));
    }
    check_diffusivities(diff)?;
    run(ic, reaction, diff, grid, ctl)
}

/// Delayed run with history equal to `ic` on `[-tau, 0]`. Requires
/// `0 < dt <= tau`.
pub fn simulate_rd_delayed<R: Reaction>(
    ic: &SpatialField,
    reaction: &R,
    diff: &Diffusivities,
    grid: &Grid,
    ctl: &PdeControl,
) -> Result<PdeRun> {
    if !(reaction.delay() > 0.0) {
        return Err(Error::Precondition(format!(
            "simulate_rd_delayed needs a positive delay, got {}",
            reaction.delay()
        )));
    }
    check_diffusivities(diff)?;
    run(ic, reaction, diff, grid, ctl)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_and_weights() {
        let g = Grid::line(5, 4.0).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.integrate(&[1.0; 5]).unwrap(), 4.0);
        let g2 = Grid::square(3, 5, 2.0, 4.0).unwrap();
        assert_eq!(g2.integrate(&vec![1.0; 15]).unwrap(), 8.0);
        assert!(Grid::line(2, 1.0).is_err());
        assert!(Grid::line(10, 0.0).is_err());
    }

    #[test]
    fn thomas_matches_direct_product() {
        let n = 7;
        let a = 0.37;
        let t = Tridiagonal::new(n, a);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 2.0).collect();
        // rhs = (I - a L) x with reflected ends, L scaled so a absorbs 1/h^2.
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let left = if i == 0 { x_true[1] } else { x_true[i - 1] };
            let right = if i == n - 1 { x_true[n - 2] } else { x_true[i + 1] };
            rhs[i] = x_true[i] - a * (left - 2.0 * x_true[i] + right);
        }
        let mut scratch = Vec::new();
        let res = t.solve(&mut rhs, &mut scratch);
        assert!(res < 1e-14);
        for (u, v) in rhs.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn history_interpolates_linearly() {
        let g = Grid::line(3, 1.0).unwrap();
        let mut f = SpatialField::uniform(&g, [1.0, 2.0]);
        let mut h = FieldHistory::constant(1.0, &f).unwrap();
        f.t = 0.5;
        f.prey = vec![2.0; 3];
        h.push(&f).unwrap();
        let mid = h.eval(0.25).unwrap();
        assert!((mid.prey[1] - 1.5).abs() < 1e-15);
        assert!(h.eval(0.6).is_err());
        f.t = 2.0;
        h.push(&f).unwrap();
        assert!(h.span().0 <= 1.0);
        assert!(h.eval(-0.5).is_err());
    }

    #[test]
    fn delayed_step_larger_than_delay_rejected() {
        let g = Grid::line(5, 1.0).unwrap();
        let p = ModelParameters::baseline().with_tau(0.01);
        let ic = SpatialField::uniform(&g, [10.0, 10.0]);
        let ctl = PdeControl {
            dt: 0.1,
            t_end: 1.0,
            ..PdeControl::default()
        };
        let err = simulate_rd_delayed(&ic, &p, &Diffusivities::zero(), &g, &ctl);
        assert!(matches!(err, Err(Error::InvalidControl(_))));
        assert!(matches!(
            simulate_rd(&ic, &p, &Diffusivities::zero(), &g, &ctl),
            Err(Error::Precondition(_))
        ));
    }
}
