//! Linear stability of the interior equilibrium: Turing conditions,
//! dispersion curves, and the delayed characteristic quasi-polynomial
//!
//! ```text
//! U(lambda, tau) = lambda^2 + A1 lambda + A0 + exp(-lambda tau) (B1 lambda + B0)
//! ```
//!
//! with its purely imaginary crossings and their transversality.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{linearization_coeffs, Equilibrium, LinearizationCoefficients, Mat2, ModelParameters};

/// Diffusion coefficients of prey (`d1`) and predator (`d2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusivities {
    pub d1: f64,
    pub d2: f64,
}

impl Diffusivities {
    pub fn new(d1: f64, d2: f64) -> Result<Self> {
        if !(d1 >= 0.0 && d2 >= 0.0 && d1.is_finite() && d2.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "diffusivities must be finite and >= 0, got ({d1}, {d2})"
            )));
        }
        Ok(Self { d1, d2 })
    }

    pub fn zero() -> Self {
        Self { d1: 0.0, d2: 0.0 }
    }
}

/// Coefficients of the characteristic quasi-polynomial at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharCoefficients {
    pub k: f64,
    pub a1: f64,
    pub a0: f64,
    pub b1: f64,
    pub b0: f64,
}

impl CharCoefficients {
    /// Coefficients given directly, for synthetic studies.
    pub fn from_raw(a1: f64, a0: f64, b1: f64, b0: f64) -> Self {
        Self { k: 0.0, a1, a0, b1, b0 }
    }

    /// `U(lambda, tau)`.
    pub fn eval(&self, lambda: Complex64, tau: f64) -> Complex64 {
        lambda * lambda + self.a1 * lambda + self.a0 + (-lambda * tau).exp() * (self.b1 * lambda + self.b0)
    }

    /// `dU/dlambda`.
    pub fn eval_dlambda(&self, lambda: Complex64, tau: f64) -> Complex64 {
        let q = self.b1 * lambda + self.b0;
        2.0 * lambda + self.a1 + (-lambda * tau).exp() * (self.b1 - tau * q)
    }

    /// `Q = A1^2 - B1^2 - 2 A0`, the middle coefficient of the frequency
    /// quartic.
    pub fn quartic_q(&self) -> f64 {
        self.a1 * self.a1 - self.b1 * self.b1 - 2.0 * self.a0
    }

    /// `omega^4 + Q omega^2 + A0^2 - B0^2`.
    pub fn quartic(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        w2 * w2 + self.quartic_q() * w2 + self.a0 * self.a0 - self.b0 * self.b0
    }
}

/// Coefficients from the expanded closed forms in the raw model constants.
pub fn char_coeffs(p: &ModelParameters, eq: &Equilibrium, diff: &Diffusivities, k: f64) -> Result<CharCoefficients> {
    // Validates that `eq` is the interior equilibrium.
    linearization_coeffs(eq, p)?;
    let (x, y) = (eq.point.x, eq.point.y);
    let s = p.refuge + p.refuge_slope * x + y;
    let s2 = s * s;
    let xd = x + p.residual;
    let k2 = k * k;
    let (d1k, d2k) = (diff.d1 * k2, diff.d2 * k2);
    let refuge_term = p.omega * p.refuge_slope * y * x / s2;
    let logistic_term = p.r * x / p.capacity;
    let cy = p.mating * y;
    let a1 = d1k + d2k - refuge_term + logistic_term - cy;
    let a0 = d1k * d2k - d2k * refuge_term + d2k * logistic_term - d1k * cy + cy * refuge_term - cy * logistic_term;
    let b1 = p.omega1 * y / xd;
    let b0 = d1k * p.omega1 * y / xd - refuge_term * p.omega1 * y / xd
        + p.omega1 * y * p.r * x / (p.capacity * xd)
        + p.omega * p.omega1 * x * y * y * (p.refuge + p.refuge_slope * x) / (s2 * xd * xd);
    let cc = CharCoefficients { k, a1, a0, b1, b0 };
    debug_assert!(coefficients_agree(&cc, &char_coeffs_structural(&linearization_coeffs(eq, p)?, diff, k), 1e-10));
    Ok(cc)
}

/// Coefficients assembled from the linearization entries.
pub fn char_coeffs_structural(lc: &LinearizationCoefficients, diff: &Diffusivities, k: f64) -> CharCoefficients {
    let k2 = k * k;
    let p1 = diff.d1 * k2 - lc.a11;
    let p2 = diff.d2 * k2 - lc.c_inst;
    CharCoefficients {
        k,
        a1: p1 + p2,
        a0: p1 * p2,
        b1: -lc.b22,
        b0: -lc.b22 * p1 - lc.a12 * lc.b21,
    }
}

/// Relative agreement of two coefficient sets, each entry scaled by the
/// magnitude of the terms that build it.
pub fn coefficients_agree(a: &CharCoefficients, b: &CharCoefficients, rel: f64) -> bool {
    let pairs = [(a.a1, b.a1), (a.a0, b.a0), (a.b1, b.b1), (a.b0, b.b0)];
    pairs
        .iter()
        .all(|(x, y)| (x - y).abs() <= rel * x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
}

/// Growth data for one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    pub k: f64,
    pub re_lambda_max: f64,
    pub im_lambda: f64,
}

/// Eigenvalues of `J - k^2 diag(d1, d2)` via the quadratic formula, ordered
/// by descending real part.
pub fn mode_eigenvalues(j: &Mat2, diff: &Diffusivities, k: f64) -> [Complex64; 2] {
    let k2 = k * k;
    let m11 = j[0][0] - diff.d1 * k2;
    let m22 = j[1][1] - diff.d2 * k2;
    let tr = m11 + m22;
    let det = m11 * m22 - j[0][1] * j[1][0];
    quadratic_roots(tr, det)
}

/// Roots of `lambda^2 - tr lambda + det`, larger real part first.
fn quadratic_roots(tr: f64, det: f64) -> [Complex64; 2] {
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = 0.5 * (tr + if tr >= 0.0 { sq } else { -sq });
        let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q, det / q) };
        let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(0.5 * tr, im), Complex64::new(0.5 * tr, -im)]
    }
}

/// Dispersion relation on an ascending, non-negative wavenumber grid.
pub fn dispersion_curve(j: &Mat2, diff: &Diffusivities, k_grid: &[f64]) -> Result<Vec<DispersionSample>> {
    if k_grid.iter().any(|k| !(*k >= 0.0)) || k_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("wavenumber grid must be non-negative and ascending".into()));
    }
    Ok(k_grid
        .iter()
        .map(|&k| {
            let [lam, _] = mode_eigenvalues(j, diff, k);
            DispersionSample {
                k,
                re_lambda_max: lam.re,
                im_lambda: lam.im,
            }
        })
        .collect())
}

/// Dispersion at the Neumann-admissible wavenumbers `k = n pi / lx`,
/// `n = 0..=n_max`.
pub fn admissible_modes(j: &Mat2, diff: &Diffusivities, lx: f64, n_max: usize) -> Vec<(usize, DispersionSample)> {
    (0..=n_max)
        .map(|n| {
            let k = n as f64 * std::f64::consts::PI / lx;
            let [lam, _] = mode_eigenvalues(j, diff, k);
            (
                n,
                DispersionSample {
                    k,
                    re_lambda_max: lam.re,
                    im_lambda: lam.im,
                },
            )
        })
        .collect()
}

/// Verdict on the four diffusion-driven instability conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuringReport {
    /// `J11 + J22 < 0`.
    pub trace_negative: bool,
    /// `det J > 0`.
    pub det_positive: bool,
    /// `d1 J22 + d2 J11 > 0`.
    pub cross_diffusion_positive: bool,
    /// `(J11/d1 + J22/d2)^2 > 4 det J / (d1 d2)`.
    pub discriminant_positive: bool,
    pub turing_unstable: bool,
    /// Numerical argmax of `Re lambda_max` over `k^2 >= 0`.
    pub k2_max_growth: f64,
    /// Growth rate at `k2_max_growth`.
    pub max_growth: f64,
    /// Closed-form critical `k^2 = (d1 J22 + d2 J11) / (2 d1 d2)`; NaN when a
    /// diffusivity vanishes.
    pub k2_critical: f64,
}

fn growth_at_k2(j: &Mat2, diff: &Diffusivities, k2: f64) -> f64 {
    mode_eigenvalues(j, diff, k2.max(0.0).sqrt())[0].re
}

/// Maximize `Re lambda_max(k^2)` over `k^2 >= 0` by a dense scan followed by
/// golden-section refinement.
fn max_growth_k2(j: &Mat2, diff: &Diffusivities) -> (f64, f64) {
    let jscale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0;
    let dmin = diff.d1.min(diff.d2);
    let dmax = diff.d1.max(diff.d2);
    let upper = if dmin > 0.0 {
        20.0 * jscale / dmin
    } else if dmax > 0.0 {
        20.0 * jscale / dmax
    } else {
        1.0
    };
    let n = 4000;
    let step = upper / n as f64;
    let mut best = (0.0, growth_at_k2(j, diff, 0.0));
    for i in 1..=n {
        let k2 = step * i as f64;
        let g = growth_at_k2(j, diff, k2);
        if g > best.1 {
            best = (k2, g);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(0.0), best.0 + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if growth_at_k2(j, diff, c) >= growth_at_k2(j, diff, d) {
            b = d;
        } else {
            a = c;
        }
    }
    let mid = 0.5 * (a + b);
    let g = growth_at_k2(j, diff, mid);
    if g > best.1 {
        (mid, g)
    } else {
        best
    }
}

/// Evaluate the four Turing conditions. Strict inequalities are evaluated
/// without slack; the last condition is false when `d1 d2 = 0`.
pub fn turing_conditions(j: &Mat2, diff: &Diffusivities) -> TuringReport {
    let (j11, j12, j21, j22) = (j[0][0], j[0][1], j[1][0], j[1][1]);
    let det = j11 * j22 - j12 * j21;
    let (d1, d2) = (diff.d1, diff.d2);
    let trace_negative = j11 + j22 < 0.0;
    let det_positive = det > 0.0;
    let cross_diffusion_positive = d1 * j22 + d2 * j11 > 0.0;
    let discriminant_positive = if d1 * d2 > 0.0 {
        let s = j11 / d1 + j22 / d2;
        s * s > 4.0 * det / (d1 * d2)
    } else {
        false
    };
    let k2_critical = if d1 * d2 > 0.0 {
        (d1 * j22 + d2 * j11) / (2.0 * d1 * d2)
    } else {
        f64::NAN
    };
    let (k2_max_growth, max_growth) = max_growth_k2(j, diff);
    TuringReport {
        trace_negative,
        det_positive,
        cross_diffusion_positive,
        discriminant_positive,
        turing_unstable: trace_negative && det_positive && cross_diffusion_positive && discriminant_positive,
        k2_max_growth,
        max_growth,
        k2_critical,
    }
}

/// All roots of the delay-free equation have negative real part.
pub fn routh_hurwitz_tau0(cc: &CharCoefficients) -> bool {
    cc.a1 + cc.b1 > 0.0 && cc.a0 + cc.b0 > 0.0
}

/// A purely imaginary root `i omega0` of the characteristic equation at
/// delay `tau_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfPoint {
    pub k: f64,
    pub omega0: f64,
    pub tau_star: f64,
    pub branch: u32,
    /// The sufficient inequality `2 B0 > A1 B1`.
    pub transversal: bool,
}

/// Positive `omega` with `omega^4 + Q omega^2 + A0^2 - B0^2 = 0`, largest
/// first, each polished by Newton's method in `z = omega^2`.
pub fn crossing_frequencies(cc: &CharCoefficients) -> Vec<f64> {
    let q = cc.quartic_q();
    let c = cc.a0 * cc.a0 - cc.b0 * cc.b0;
    let disc = q * q - 4.0 * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Stable pair of roots of z^2 + q z + c.
    let t = -0.5 * (q + if q >= 0.0 { sq } else { -sq });
    let mut zs = if t == 0.0 { vec![0.0, 0.0] } else { vec![t, c / t] };
    zs.sort_by(|a, b| b.total_cmp(a));
    zs.dedup();
    zs.into_iter()
        .filter(|z| *z > 0.0)
        .map(|mut z| {
            for _ in 0..3 {
                let f = z * z + q * z + c;
                let df = 2.0 * z + q;
                if df == 0.0 {
                    break;
                }
                let dz = f / df;
                if !dz.is_finite() {
                    break;
                }
                z -= dz;
            }
            z.sqrt()
        })
        .collect()
}

/// Critical delay for frequency `omega`, on branch `j`.
///
/// `cos(omega tau)` and `sin(omega tau)` both follow from separating real
/// and imaginary parts, so the phase is taken with `atan2` and lands in
/// `[0, 2 pi)`; the arccos form alone picks the wrong sheet when the sine is
/// negative.
pub fn hopf_point_at(cc: &CharCoefficients, omega: f64, branch: u32) -> Result<HopfPoint> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("crossing frequency must be positive, got {omega}")));
    }
    let w2 = omega * omega;
    let denom = w2 * cc.b1 * cc.b1 + cc.b0 * cc.b0;
    if denom == 0.0 {
        return Err(Error::Degenerate("B0 and B1 both vanish; no delay dependence".into()));
    }
    let cos = (cc.b0 * (w2 - cc.a0) - w2 * cc.b1 * cc.a1) / denom;
    let sin = (omega * cc.b1 * (w2 - cc.a0) + omega * cc.a1 * cc.b0) / denom;
    if cos.abs() > 1.0 + 1e-12 {
        return Err(Error::Inconsistency(format!(
            "cos(omega tau) = {cos} outside [-1, 1] for omega = {omega}"
        )));
    }
    let mut phase = sin.atan2(cos);
    if phase < 0.0 {
        phase += 2.0 * std::f64::consts::PI;
    }
    let tau0 = phase / omega;
    let tau_star = tau0 + 2.0 * std::f64::consts::PI * branch as f64 / omega;
    let hp = HopfPoint {
        k: cc.k,
        omega0: omega,
        tau_star,
        branch,
        transversal: 2.0 * cc.b0 > cc.a1 * cc.b1,
    };
    let res = cc.eval(Complex64::new(0.0, omega), tau_star).norm();
    let scale = 1.0 + w2 + (cc.a1 * omega).abs() + cc.a0.abs() + (cc.b1 * omega).abs() + cc.b0.abs();
    if res > 1e-8 * scale {
        return Err(Error::Inconsistency(format!(
            "|U(i omega0, tau*)| = {res:e} at omega0 = {omega}, tau* = {tau_star}"
        )));
    }
    Ok(hp)
}

/// Hopf point at the largest positive crossing frequency, or `None` if the
/// frequency quartic has no positive root.
pub fn hopf_point(cc: &CharCoefficients, branch: u32) -> Result<Option<HopfPoint>> {
    match crossing_frequencies(cc).first() {
        Some(&omega) => hopf_point_at(cc, omega, branch).map(Some),
        None => Ok(None),
    }
}

/// Newton's method for a root of `U(., tau)` starting from `guess`.
pub fn newton_root(cc: &CharCoefficients, guess: Complex64, tau: f64) -> Option<Complex64> {
    let mut lam = guess;
    for _ in 0..60 {
        let u = cc.eval(lam, tau);
        let du = cc.eval_dlambda(lam, tau);
        if du.norm() == 0.0 || !du.is_finite() {
            return None;
        }
        let step = u / du;
        lam -= step;
        if step.norm() <= 1e-15 * lam.norm().max(1.0) {
            return Some(lam);
        }
    }
    let scale = 1.0 + lam.norm_sqr() + cc.a0.abs() + cc.b0.abs();
    (cc.eval(lam, tau).norm() < 1e-12 * scale).then_some(lam)
}

/// Follow a root of `U` from `(lambda0, tau0)` to `tau1` in small delay
/// increments, correcting with Newton at each.
pub fn continue_root(cc: &CharCoefficients, lambda0: Complex64, tau0: f64, tau1: f64, substeps: usize) -> Option<Complex64> {
    let mut lam = lambda0;
    for i in 1..=substeps.max(1) {
        let tau = tau0 + (tau1 - tau0) * i as f64 / substeps.max(1) as f64;
        lam = newton_root(cc, lam, tau)?;
    }
    Some(lam)
}

/// Root `lambda(tau)` near the crossing, or `None` if continuation fails.
fn crossing_branch(cc: &CharCoefficients, hp: &HopfPoint, tau: f64) -> Option<Complex64> {
    let start = newton_root(cc, Complex64::new(0.0, hp.omega0), hp.tau_star)?;
    continue_root(cc, start, hp.tau_star, tau, 8)
}

/// Derivative of the crossing root along the delay, by central differences
/// of the continued root (one-sided second order when `tau*` is too close to
/// zero).
pub fn continued_root_derivative(cc: &CharCoefficients, hp: &HopfPoint) -> Option<Complex64> {
    let eps = 1e-4 * hp.tau_star.max(1.0);
    if hp.tau_star >= eps {
        let plus = crossing_branch(cc, hp, hp.tau_star + eps)?;
        let minus = crossing_branch(cc, hp, hp.tau_star - eps)?;
        Some((plus - minus) / (2.0 * eps))
    } else {
        let f0 = crossing_branch(cc, hp, hp.tau_star)?;
        let f1 = crossing_branch(cc, hp, hp.tau_star + eps)?;
        let f2 = crossing_branch(cc, hp, hp.tau_star + 2.0 * eps)?;
        Some((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * eps))
    }
}

/// The sufficient inequality together with the numerically measured
/// crossing speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transversality {
    /// `2 B0 > A1 B1`.
    pub inequality_holds: bool,
    /// `d(Re lambda)/d tau` at `tau*` from root continuation; `None` if the
    /// continuation failed.
    pub numeric_slope: Option<f64>,
}

pub fn transversality(cc: &CharCoefficients, hp: &HopfPoint) -> Transversality {
    Transversality {
        inequality_holds: 2.0 * cc.b0 > cc.a1 * cc.b1,
        numeric_slope: continued_root_derivative(cc, hp).map(|d| d.re),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::interior_equilibrium;

    fn baseline() -> (ModelParameters, Equilibrium, LinearizationCoefficients) {
        let p = ModelParameters::baseline();
        let eq = interior_equilibrium(&p).unwrap();
        let lc = linearization_coeffs(&eq, &p).unwrap();
        (p, eq, lc)
    }

    #[test]
    fn literal_and_structural_coefficients_agree() {
        let (p, eq, lc) = baseline();
        let diff = Diffusivities::new(1e-5, 1e-2).unwrap();
        let lit = char_coeffs(&p, &eq, &diff, 1.0).unwrap();
        let st = char_coeffs_structural(&lc, &diff, 1.0);
        assert!(coefficients_agree(&lit, &st, 1e-12), "{lit:?} vs {st:?}");
    }

    #[test]
    fn zero_wavenumber_reduction() {
        let (p, eq, lc) = baseline();
        let cc = char_coeffs(&p, &eq, &Diffusivities::zero(), 0.0).unwrap();
        assert!((cc.a1 - (-lc.a11 - lc.c_inst)).abs() < 1e-15);
        assert_eq!(cc.b1, -lc.b22);
        assert!(cc.b1 > 0.0);
    }

    #[test]
    fn turing_hand_examples() {
        let j = [[1.0, -2.0], [3.0, -4.0]];
        let rep = turing_conditions(&j, &Diffusivities::new(1.0, 100.0).unwrap());
        assert!(rep.trace_negative && rep.det_positive);
        assert!(rep.cross_diffusion_positive && rep.discriminant_positive);
        assert!(rep.turing_unstable);
        assert!((rep.k2_critical - 0.48).abs() < 1e-12);
        // The closed form minimizes det(J_k); Re lambda peaks elsewhere but
        // is already positive there.
        let at_crit = mode_eigenvalues(&j, &Diffusivities::new(1.0, 100.0).unwrap(), 0.48f64.sqrt());
        assert!(at_crit[0].re > 0.0);
        assert!((rep.k2_max_growth - 0.199392).abs() < 1e-5, "{}", rep.k2_max_growth);
        assert!(rep.max_growth >= at_crit[0].re);
        let rep = turing_conditions(&j, &Diffusivities::new(1.0, 10.0).unwrap());
        assert!(rep.cross_diffusion_positive);
        assert!(!rep.discriminant_positive && !rep.turing_unstable);
    }

    #[test]
    fn zero_diffusivity_fails_last_condition() {
        let j = [[1.0, -2.0], [3.0, -4.0]];
        let rep = turing_conditions(&j, &Diffusivities::new(0.0, 100.0).unwrap());
        assert!(!rep.discriminant_positive);
        assert!(rep.k2_critical.is_nan());
    }

    #[test]
    fn dispersion_at_zero_is_jacobian_spectrum() {
        let j = [[1.0, -2.0], [3.0, -4.0]];
        let s = dispersion_curve(&j, &Diffusivities::new(1.0, 100.0).unwrap(), &[0.0]).unwrap();
        // eigenvalues of J: -1, -2
        assert!((s[0].re_lambda_max + 1.0).abs() < 1e-14);
        assert!(dispersion_curve(&j, &Diffusivities::zero(), &[1.0, 0.5]).is_err());
    }

    #[test]
    fn routh_hurwitz_boundaries() {
        assert!(routh_hurwitz_tau0(&CharCoefficients::from_raw(0.5, 0.5, 0.5, 0.5)));
        assert!(!routh_hurwitz_tau0(&CharCoefficients::from_raw(0.5, 1.0, 0.5, -1.0)));
    }

    #[test]
    fn synthetic_hopf_point() {
        let cc = CharCoefficients::from_raw(0.0, 3.0, 0.0, 1.0);
        let hp = hopf_point(&cc, 0).unwrap().unwrap();
        assert!((hp.omega0 - 2.0).abs() < 1e-12);
        assert!(hp.tau_star.abs() < 1e-12);
        let hp1 = hopf_point(&cc, 1).unwrap().unwrap();
        assert!((hp1.tau_star - std::f64::consts::PI).abs() < 1e-12);
        assert!(hp.transversal);
    }

    #[test]
    fn no_crossing_without_sign_change() {
        // A0^2 > B0^2 and Q > 0
        let cc = CharCoefficients::from_raw(3.0, 2.0, 1.0, 1.0);
        assert!(cc.quartic_q() > 0.0);
        assert!(hopf_point(&cc, 0).unwrap().is_none());
    }

    #[test]
    fn baseline_hopf_point() {
        let (p, eq, _) = baseline();
        let cc = char_coeffs(&p, &eq, &Diffusivities::zero(), 0.0).unwrap();
        let hp = hopf_point(&cc, 0).unwrap().unwrap();
        assert!((hp.omega0 - 0.0822101).abs() < 1e-6, "{}", hp.omega0);
        assert!((hp.tau_star - 6.0764).abs() < 1e-3, "{}", hp.tau_star);
        let tr = transversality(&cc, &hp);
        assert!(tr.numeric_slope.unwrap() > 0.0);
    }

    #[test]
    fn negative_sine_branch_uses_full_phase() {
        // Pick coefficients where sin(omega tau) < 0 at the crossing.
        let cc = CharCoefficients::from_raw(1.0, 0.5, -2.0, 0.3);
        for omega in crossing_frequencies(&cc) {
            let hp = hopf_point_at(&cc, omega, 0).unwrap();
            assert!(cc.eval(Complex64::new(0.0, omega), hp.tau_star).norm() < 1e-10);
        }
    }
}
