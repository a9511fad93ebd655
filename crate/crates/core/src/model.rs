//! Model parameters, right-hand sides, equilibria and linearization.
//!
//! The prey follows logistic growth with a Beddington-DeAngelis predation
//! loss; the predator grows by mating (`c Y^m`) and is limited by a modified
//! Leslie-Gower term that may look back by the gestation delay `tau`:
//!
//! ```text
//! X' = r X (1 - X/K) - omega X Y / (D + d X + Y)
//! Y' = c Y^m - omega1 Y Y(t - tau) / (X(t - tau) + D1)
//! ```

use crate::error::{Error, Result};

/// Row-major 2x2 real matrix.
pub type Mat2 = [[f64; 2]; 2];

/// Rate constants of the model. Every formula in the crate reads from here.
///
/// | field          | symbol  | meaning                                   |
/// |----------------|---------|-------------------------------------------|
/// | `r`            | r       | prey intrinsic growth rate                |
/// | `capacity`     | K       | prey carrying capacity                    |
/// | `omega`        | ω       | maximum prey removal rate                 |
/// | `refuge`       | D       | refuge constant                           |
/// | `refuge_slope` | d       | refuge slope                              |
/// | `mating`       | c       | predator mating growth rate               |
/// | `omega1`       | ω₁      | maximum predator removal rate             |
/// | `residual`     | D₁      | residual-reduction constant               |
/// | `exponent`     | m       | predator mating exponent, `1 < m <= 2`    |
/// | `tau`          | τ       | gestation delay                           |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters {
    pub r: f64,
    pub capacity: f64,
    pub omega: f64,
    pub refuge: f64,
    pub refuge_slope: f64,
    pub mating: f64,
    pub omega1: f64,
    pub residual: f64,
    pub exponent: f64,
    pub tau: f64,
}

impl ModelParameters {
    /// Blow-up reference set: r=1, K=100, ω=1, D=1.01, d=0.01, c=0.01,
    /// ω₁=0.2, D₁=10, m=2, τ=0.
    pub fn baseline() -> Self {
        Self {
            r: 1.0,
            capacity: 100.0,
            omega: 1.0,
            refuge: 1.01,
            refuge_slope: 0.01,
            mating: 0.01,
            omega1: 0.2,
            residual: 10.0,
            exponent: 2.0,
            tau: 0.0,
        }
    }

    /// Pattern-formation set (r=0.11, ω=1.11, c=2.81, d=2.31, ω₁=1.32,
    /// D=0.1, D₁=0.09). The carrying capacity is not part of the set and must
    /// be supplied.
    pub fn pattern_set(capacity: f64) -> Self {
        Self {
            r: 0.11,
            capacity,
            omega: 1.11,
            refuge: 0.1,
            refuge_slope: 2.31,
            mating: 2.81,
            omega1: 1.32,
            residual: 0.09,
            exponent: 2.0,
            tau: 0.0,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_exponent(mut self, m: f64) -> Self {
        self.exponent = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r", self.r),
            ("K", self.capacity),
            ("omega", self.omega),
            ("D", self.refuge),
            ("c", self.mating),
            ("omega1", self.omega1),
            ("D1", self.residual),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.refuge_slope.is_finite() && self.refuge_slope >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "d must be finite and >= 0, got {}",
                self.refuge_slope
            )));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "tau must be finite and >= 0, got {}",
                self.tau
            )));
        }
        if !(self.exponent > 1.0 && self.exponent <= 2.0) {
            return Err(Error::InvalidParameters(format!(
                "exponent m must satisfy 1 < m <= 2, got {}",
                self.exponent
            )));
        }
        Ok(())
    }

    /// Mating term `c Y^m`, written as `c Y |Y|^(m-1)` so tiny negative
    /// round-off in `Y` stays finite.
    #[inline]
    pub(crate) fn mating_term(&self, y: f64) -> f64 {
        if self.exponent == 2.0 {
            self.mating * y * y
        } else {
            self.mating * y * y.abs().powf(self.exponent - 1.0)
        }
    }

    /// Unchecked delayed right-hand side; the hot path of every integrator.
    #[inline]
    pub(crate) fn rate(&self, now: [f64; 2], lag: [f64; 2]) -> [f64; 2] {
        let [x, y] = now;
        let prey = self.r * x * (1.0 - x / self.capacity)
            - self.omega * x * y / (self.refuge + self.refuge_slope * x + y);
        let predator = self.mating_term(y) - self.omega1 * y * lag[1] / (lag[0] + self.residual);
        [prey, predator]
    }
}

/// Prey/predator densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub x: f64,
    pub y: f64,
}

impl StateVector {
    /// Checked constructor: both components finite and non-negative.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let s = Self { x, y };
        s.check()?;
        Ok(s)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn norm_max(&self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    fn check(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite()) {
            return Err(Error::Domain(format!("non-finite state ({}, {})", self.x, self.y)));
        }
        if self.x < 0.0 || self.y < 0.0 {
            return Err(Error::Domain(format!("negative density ({}, {})", self.x, self.y)));
        }
        Ok(())
    }
}

impl From<[f64; 2]> for StateVector {
    fn from(v: [f64; 2]) -> Self {
        Self { x: v[0], y: v[1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Trivial,
    PreyOnly,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub point: StateVector,
    pub kind: EquilibriumKind,
}

/// Coefficients of the linearization at the interior equilibrium, split into
/// the instantaneous prey row, the instantaneous predator self-term and the
/// delayed predator row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationCoefficients {
    pub a11: f64,
    pub a12: f64,
    pub b21: f64,
    pub b22: f64,
    /// Instantaneous predator self-coefficient, `c Y*`.
    pub c_inst: f64,
}

impl LinearizationCoefficients {
    /// Jacobian acting on the current state.
    pub fn instantaneous(&self) -> Mat2 {
        [[self.a11, self.a12], [0.0, self.c_inst]]
    }

    /// Jacobian acting on the lagged state.
    pub fn delayed(&self) -> Mat2 {
        [[0.0, 0.0], [self.b21, self.b22]]
    }

    /// Jacobian of the non-delayed system (instantaneous plus delayed parts).
    pub fn nondelayed_jacobian(&self) -> Mat2 {
        [[self.a11, self.a12], [self.b21, self.c_inst + self.b22]]
    }
}

fn finite_state(s: &StateVector) -> Result<()> {
    if s.x.is_finite() && s.y.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite state ({}, {})", s.x, s.y)))
    }
}

fn check_denominators(p: &ModelParameters, now: &StateVector, lag: &StateVector) -> Result<()> {
    if p.refuge + p.refuge_slope * now.x + now.y <= 0.0 {
        return Err(Error::Domain("D + dX + Y must be positive".into()));
    }
    if lag.x + p.residual <= 0.0 {
        return Err(Error::Domain("X + D1 must be positive".into()));
    }
    Ok(())
}

/// Right-hand side of the non-delayed model.
pub fn rhs_nondelayed(s: StateVector, p: &ModelParameters) -> Result<StateVector> {
    finite_state(&s)?;
    check_denominators(p, &s, &s)?;
    let [dx, dy] = p.rate(s.as_array(), s.as_array());
    Ok(StateVector { x: dx, y: dy })
}

/// Right-hand side of the delayed model, with the lagged state supplied.
pub fn rhs_delayed(now: StateVector, lag: StateVector, p: &ModelParameters) -> Result<StateVector> {
    finite_state(&now)?;
    finite_state(&lag)?;
    check_denominators(p, &now, &lag)?;
    let [dx, dy] = p.rate(now.as_array(), lag.as_array());
    Ok(StateVector { x: dx, y: dy })
}

/// All equilibria of the `m = 2` model. The interior point is present only
/// when `X* = omega1/c - D1 > 0` and the prey nullcline gives `Y* > 0`.
pub fn equilibria(p: &ModelParameters) -> Result<Vec<Equilibrium>> {
    p.validate()?;
    if p.exponent != 2.0 {
        return Err(Error::Domain(format!(
            "closed-form equilibria require m = 2, got {}",
            p.exponent
        )));
    }
    let mut out = vec![
        Equilibrium {
            point: StateVector { x: 0.0, y: 0.0 },
            kind: EquilibriumKind::Trivial,
        },
        Equilibrium {
            point: StateVector {
                x: p.capacity,
                y: 0.0,
            },
            kind: EquilibriumKind::PreyOnly,
        },
    ];
    let x_star = p.omega1 / p.mating - p.residual;
    if x_star > 0.0 {
        let g = p.r * (1.0 - x_star / p.capacity);
        let denom = p.omega - g;
        if denom > 0.0 {
            let y_star = g * (p.refuge + p.refuge_slope * x_star) / denom;
            if y_star > 0.0 {
                out.push(Equilibrium {
                    point: StateVector {
                        x: x_star,
                        y: y_star,
                    },
                    kind: EquilibriumKind::Interior,
                });
            }
        }
    }
    Ok(out)
}

/// The interior equilibrium, or a domain error when it does not exist.
pub fn interior_equilibrium(p: &ModelParameters) -> Result<Equilibrium> {
    equilibria(p)?
        .into_iter()
        .find(|e| e.kind == EquilibriumKind::Interior)
        .ok_or_else(|| Error::Domain("no interior equilibrium for these parameters".into()))
}

fn central_difference<F>(f: &F, s: [f64; 2], h: f64) -> Mat2
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let mut jac = [[0.0; 2]; 2];
    for col in 0..2 {
        let step = h * s[col].abs().max(1.0);
        let mut plus = s;
        let mut minus = s;
        plus[col] += step;
        minus[col] -= step;
        let fp = f(plus);
        let fm = f(minus);
        let width = plus[col] - minus[col];
        for row in 0..2 {
            jac[row][col] = (fp[row] - fm[row]) / width;
        }
    }
    jac
}

/// Central differences at `h` and `h/2`, combined by Richardson
/// extrapolation. Disagreement between the two levels beyond truncation
/// expectations signals cancellation (step too small).
fn richardson_jacobian<F>(f: F, s: [f64; 2], h: f64) -> Result<Mat2>
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Tolerance(format!("step must be positive, got {h}")));
    }
    let coarse = central_difference(&f, s, h);
    let fine = central_difference(&f, s, 0.5 * h);
    let mut out = [[0.0; 2]; 2];
    let mut scale = 1.0f64;
    let mut disagreement = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
            scale = scale.max(out[i][j].abs());
            disagreement = disagreement.max((fine[i][j] - coarse[i][j]).abs());
        }
    }
    if !disagreement.is_finite() || disagreement > 1e-5 * scale {
        return Err(Error::Tolerance(format!(
            "Richardson levels disagree by {disagreement:e} (scale {scale:e}); step {h:e} too small"
        )));
    }
    Ok(out)
}

/// Finite-difference Jacobian of the non-delayed right-hand side.
pub fn jacobian_fd(s: StateVector, p: &ModelParameters, h: f64) -> Result<Mat2> {
    rhs_nondelayed(s, p)?;
    richardson_jacobian(|v| p.rate(v, v), s.as_array(), h)
}

/// Finite-difference Jacobians of the delayed right-hand side with respect to
/// the current state and the lagged state, both evaluated at `s`.
pub fn jacobian_fd_split(s: StateVector, p: &ModelParameters, h: f64) -> Result<(Mat2, Mat2)> {
    rhs_nondelayed(s, p)?;
    let base = s.as_array();
    let inst = richardson_jacobian(|v| p.rate(v, base), base, h)?;
    let lagged = richardson_jacobian(|v| p.rate(base, v), base, h)?;
    Ok((inst, lagged))
}

/// Closed-form linearization coefficients at the interior equilibrium.
pub fn linearization_coeffs(eq: &Equilibrium, p: &ModelParameters) -> Result<LinearizationCoefficients> {
    if eq.kind != EquilibriumKind::Interior {
        return Err(Error::Domain(format!(
            "linearization coefficients need the interior equilibrium, got {:?}",
            eq.kind
        )));
    }
    let (x, y) = (eq.point.x, eq.point.y);
    let s = p.refuge + p.refuge_slope * x + y;
    let s2 = s * s;
    let xd = x + p.residual;
    Ok(LinearizationCoefficients {
        a11: -p.r * x / p.capacity + p.omega * p.refuge_slope * y * x / s2,
        a12: -p.omega * x * (p.refuge + p.refuge_slope * x) / s2,
        b21: p.omega1 * y * y / (xd * xd),
        b22: -p.omega1 * y / xd,
        c_inst: p.mating * y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn prey_only_state_is_fixed() {
        let p = ModelParameters::baseline();
        let r = rhs_nondelayed(StateVector::new(100.0, 0.0).unwrap(), &p).unwrap();
        assert_eq!(r, StateVector { x: 0.0, y: 0.0 });
    }

    #[test]
    fn rhs_at_interior_point_vanishes() {
        let p = ModelParameters::baseline();
        let r = rhs_nondelayed(StateVector::new(10.0, 9.99).unwrap(), &p).unwrap();
        assert!(r.x.abs() < 1e-12 && r.y.abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn rhs_at_fourteen_fourteen() {
        let p = ModelParameters::baseline();
        let r = rhs_nondelayed(StateVector::new(14.0, 14.0).unwrap(), &p).unwrap();
        // 14*0.86 - 196/15.15 and 1.96 - 0.2*196/24, worked by hand.
        assert!(close(r.x, 12.04 - 196.0 / 15.15, 1e-12));
        assert!(close(r.x, -0.897_293_729, 1e-8));
        assert!(close(r.y, 0.326_666_667, 1e-8));
    }

    #[test]
    fn delayed_predator_row() {
        let p = ModelParameters::baseline();
        let now = StateVector::new(14.0, 14.0).unwrap();
        let lag = StateVector::new(13.0, 13.0).unwrap();
        let r = rhs_delayed(now, lag, &p).unwrap();
        let expected = 14.0 * (0.01 * 14.0 - 0.2 * 13.0 / 23.0);
        assert!(close(r.y, expected, 1e-14));
        let nd = rhs_nondelayed(now, &p).unwrap();
        assert_eq!(r.x, nd.x);
    }

    #[test]
    fn delayed_equals_nondelayed_without_lag() {
        let p = ModelParameters::baseline().with_exponent(1.6);
        let s = StateVector::new(3.5, 7.25).unwrap();
        assert_eq!(rhs_delayed(s, s, &p).unwrap(), rhs_nondelayed(s, &p).unwrap());
    }

    #[test]
    fn non_finite_input_rejected() {
        let p = ModelParameters::baseline();
        let bad = StateVector { x: f64::NAN, y: 1.0 };
        assert!(matches!(rhs_nondelayed(bad, &p), Err(Error::Domain(_))));
        assert!(StateVector::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn baseline_equilibria() {
        let p = ModelParameters::baseline();
        let eqs = equilibria(&p).unwrap();
        assert_eq!(eqs.len(), 3);
        let interior = eqs[2];
        assert_eq!(interior.kind, EquilibriumKind::Interior);
        assert_eq!(interior.point.x, 10.0);
        assert!(close(interior.point.y, 9.99, 1e-12));
        assert_eq!(eqs[1].point, StateVector { x: 100.0, y: 0.0 });
    }

    #[test]
    fn no_interior_when_predator_nullcline_nonpositive() {
        let mut p = ModelParameters::baseline();
        p.omega1 = 0.05; // omega1/c - D1 = -5
        let eqs = equilibria(&p).unwrap();
        assert!(eqs.iter().all(|e| e.kind != EquilibriumKind::Interior));
        assert!(interior_equilibrium(&p).is_err());
    }

    #[test]
    fn equilibria_reject_fractional_exponent() {
        let p = ModelParameters::baseline().with_exponent(1.6);
        assert!(equilibria(&p).is_err());
    }

    #[test]
    fn jacobian_at_prey_only_point() {
        let p = ModelParameters::baseline();
        let j = jacobian_fd(StateVector::new(100.0, 0.0).unwrap(), &p, 1e-4).unwrap();
        assert!(close(j[0][0], -p.r, 1e-6), "{j:?}");
    }

    #[test]
    fn jacobian_predator_diagonal_vanishes_at_interior() {
        let p = ModelParameters::baseline();
        let eq = interior_equilibrium(&p).unwrap();
        let j = jacobian_fd(eq.point, &p, 1e-4).unwrap();
        assert!(j[1][1].abs() < 1e-6, "{j:?}");
    }

    #[test]
    fn jacobian_rejects_tiny_step() {
        let p = ModelParameters::baseline();
        let eq = interior_equilibrium(&p).unwrap();
        assert!(matches!(
            jacobian_fd(eq.point, &p, 1e-15),
            Err(Error::Tolerance(_))
        ));
    }

    #[test]
    fn baseline_linearization() {
        let p = ModelParameters::baseline();
        let eq = interior_equilibrium(&p).unwrap();
        let lc = linearization_coeffs(&eq, &p).unwrap();
        assert!(close(lc.b22, -0.2 * 9.99 / 20.0, 1e-15));
        assert!((lc.c_inst + lc.b22).abs() < 1e-15);
        let (inst, lagged) = jacobian_fd_split(eq.point, &p, 1e-4).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs().max(1e-12);
        assert!(rel(inst[0][0], lc.a11));
        assert!(rel(inst[0][1], lc.a12));
        assert!(rel(inst[1][1], lc.c_inst));
        assert!(rel(lagged[1][0], lc.b21));
        assert!(rel(lagged[1][1], lc.b22));
    }

    #[test]
    fn linearization_requires_interior() {
        let p = ModelParameters::baseline();
        let eq = equilibria(&p).unwrap()[1];
        assert!(linearization_coeffs(&eq, &p).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mut p = ModelParameters::baseline();
        p.exponent = 2.5;
        assert!(p.validate().is_err());
        let mut p = ModelParameters::baseline();
        p.tau = -1.0;
        assert!(p.validate().is_err());
        let mut p = ModelParameters::baseline();
        p.refuge = 0.0;
        assert!(p.validate().is_err());
    }
}
