//! Hopf normal form at a critical delay: eigenvector pairing, the quadratic
//! and cubic coefficients `g20, g11, g02, g21`, and the derived direction,
//! stability and period quantities.
//!
//! Conventions. With `L0 = [[a11 - d1 k^2, a12], [0, cY* - d2 k^2]]` and
//! `L1 = [[0, 0], [b21, b22]]` the characteristic matrix is
//! `Delta(lambda) = lambda I - L0 - L1 exp(-lambda tau)`. The eigenvector is
//! `q(0) = (1, alpha2)` with `Delta(i omega0) q(0) = 0`, and the adjoint
//! vector `(1, alpha2*)` satisfies `(1, conj(alpha2*)) Delta(i omega0) = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linear::{continued_root_derivative, CharCoefficients, Diffusivities, HopfPoint};
use crate::model::{LinearizationCoefficients, ModelParameters};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

type CMat2 = [[Complex64; 2]; 2];
type CVec2 = [Complex64; 2];

fn mat_vec(m: &CMat2, v: &CVec2) -> CVec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn vec_norm(v: &CVec2) -> f64 {
    v[0].norm().max(v[1].norm())
}

/// Solve `m x = rhs` by Cramer's rule, with a singularity test scaled by the
/// matrix entries and a residual check.
fn solve2(m: &CMat2, rhs: &CVec2, what: &str) -> Result<(CVec2, f64)> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = (m[0][0].norm() + m[0][1].norm()) * (m[1][0].norm() + m[1][1].norm());
    if !(det.norm() > 1e-14 * scale) {
        return Err(Error::Resonance(format!("{what}: |det| = {:e} (scale {scale:e})", det.norm())));
    }
    let x = [
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ];
    let r = mat_vec(m, &x);
    let residual = vec_norm(&[r[0] - rhs[0], r[1] - rhs[1]]) / vec_norm(rhs).max(f64::MIN_POSITIVE);
    if !(residual < 1e-12) {
        return Err(Error::Internal(format!("{what}: relative residual {residual:e}")));
    }
    Ok((x, residual))
}

/// `Delta(lambda)` for delay `tau` with the given exponential factor.
fn char_matrix(lc: &LinearizationCoefficients, diff: &Diffusivities, k: f64, lambda: Complex64, delay_factor: Complex64) -> CMat2 {
    let k2 = k * k;
    [
        [lambda - lc.a11 + diff.d1 * k2, Complex64::from(-lc.a12)],
        [
            -lc.b21 * delay_factor,
            lambda - lc.c_inst + diff.d2 * k2 - lc.b22 * delay_factor,
        ],
    ]
}

/// Eigenvector components and normalization at a Hopf point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPairing {
    pub alpha2: Complex64,
    /// Adjoint component from the conjugate-transpose null vector.
    pub alpha2_star: Complex64,
    pub n_bar: Complex64,
    /// The closed-form adjoint component from the literal formula,
    /// `-(i omega0 + a11 + d2 k^2) / (b21 exp(-i omega0 tau*))`.
    pub alpha2_star_literal: Complex64,
    /// `|alpha2_star_literal - alpha2_star| / |alpha2_star|`.
    pub literal_adjoint_discrepancy: f64,
    /// `|Delta(i omega0) q(0)|`.
    pub eigen_residual: f64,
}

pub fn eigen_pairing(
    lc: &LinearizationCoefficients,
    diff: &Diffusivities,
    k: f64,
    omega0: f64,
    tau_star: f64,
) -> Result<ComplexPairing> {
    if lc.a12 == 0.0 || lc.b21 == 0.0 {
        return Err(Error::Degenerate("a12 and b21 must be non-zero".into()));
    }
    let k2 = k * k;
    let iw = I * omega0;
    let e_minus = (-iw * tau_star).exp();
    let alpha2 = (iw - lc.a11 + diff.d1 * k2) / lc.a12;
    // First column of (1, conj(a*)) Delta = 0.
    let alpha2_star = -(iw + lc.a11 - diff.d1 * k2) / (lc.b21 * e_minus.conj());
    let alpha2_star_literal = -(iw + lc.a11 + diff.d2 * k2) / (lc.b21 * e_minus);
    let denom = 1.0 + alpha2 * alpha2_star.conj() + tau_star * (lc.b21 + alpha2 * lc.b22) * alpha2_star.conj() * e_minus;
    if !(denom.norm() > 1e-14) {
        return Err(Error::Degenerate(format!("normalization denominator {denom}")));
    }
    let delta = char_matrix(lc, diff, k, iw, e_minus);
    let r = mat_vec(&delta, &[Complex64::from(1.0), alpha2]);
    Ok(ComplexPairing {
        alpha2,
        alpha2_star,
        n_bar: 1.0 / denom,
        alpha2_star_literal,
        literal_adjoint_discrepancy: (alpha2_star_literal - alpha2_star).norm() / alpha2_star.norm(),
        eigen_residual: vec_norm(&r),
    })
}

/// The quadratic coupling constants of the nonlinear part. Zeroing them all
/// removes every quadratic term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    /// `r/K`.
    pub logistic: f64,
    /// `omega/D`.
    pub predation: f64,
    /// `c`.
    pub mating: f64,
    /// `omega1/D1`.
    pub leslie: f64,
}

impl Nonlinearity {
    pub fn from_params(p: &ModelParameters) -> Self {
        Self {
            logistic: p.r / p.capacity,
            predation: p.omega / p.refuge,
            mating: p.mating,
            leslie: p.omega1 / p.residual,
        }
    }

    pub fn zero() -> Self {
        Self {
            logistic: 0.0,
            predation: 0.0,
            mating: 0.0,
            leslie: 0.0,
        }
    }
}

/// Which forms of the center-manifold expansion to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Second `W20` term with `conj(g02)/3`; `E1` and `E2` systems assembled
    /// from `Delta(2 i omega0)` and `Delta(0)`.
    #[default]
    Standard,
    /// The literal closed forms: `conj(g20)/3` in `W20`, and the
    /// `E1`/`E2` matrices with `exp(-i omega0 tau*)` and `-d k^2` entries.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GCoefficients {
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
    pub g21: Complex64,
    pub e1: CVec2,
    pub e2: CVec2,
    /// Relative residuals of the two linear solves.
    pub e1_residual: f64,
    pub e2_residual: f64,
}

/// Normal-form coefficients at a Hopf point.
#[allow(clippy::too_many_arguments)]
pub fn g_coefficients(
    pairing: &ComplexPairing,
    nl: &Nonlinearity,
    lc: &LinearizationCoefficients,
    diff: &Diffusivities,
    k: f64,
    omega0: f64,
    tau_star: f64,
    variant: Variant,
) -> Result<GCoefficients> {
    if !(omega0 > 0.0 && tau_star > 0.0) {
        return Err(Error::Degenerate(format!(
            "normal form needs omega0 > 0 and tau* > 0, got {omega0}, {tau_star}"
        )));
    }
    let a2 = pairing.alpha2;
    let a2c = a2.conj();
    let as_c = pairing.alpha2_star.conj();
    let wt = omega0 * tau_star;
    let e_m = (-I * wt).exp();
    let e_p = (I * wt).exp();
    let pre = tau_star * pairing.n_bar;
    let (rk, wd, c, w1d) = (nl.logistic, nl.predation, nl.mating, nl.leslie);

    let g20 = 2.0 * pre * ((-rk - wd * a2) + as_c * a2 * a2 * (c - w1d * e_m));
    let g11 = pre * (Complex64::from(-rk - wd * a2.re) + as_c * a2 * a2c * (c - w1d * wt.cos()));
    let g02 = 2.0 * pre * ((-rk - wd * a2c) + as_c * a2c * a2c * (c - w1d * e_p));

    let rhs1 = [2.0 * (-rk - wd * a2), 2.0 * a2 * a2 * (c - w1d * e_m)];
    let rhs2 = [
        Complex64::from(-rk - wd * a2.re),
        a2 * a2c * (c - w1d * wt.cos()),
    ];
    let k2 = k * k;
    let (m1, m2) = match variant {
        Variant::Standard => (
            char_matrix(lc, diff, k, 2.0 * I * omega0, (-2.0 * I * wt).exp()),
            char_matrix(lc, diff, k, Complex64::from(0.0), Complex64::from(1.0)),
        ),
        Variant::Literal => {
            let m = |lam: Complex64| -> CMat2 {
                [
                    [lam - lc.a11 - diff.d1 * k2, Complex64::from(-lc.a12)],
                    [-lc.b21 * e_m, lam - lc.c_inst - diff.d2 * k2 - lc.b22 * e_m],
                ]
            };
            (m(2.0 * I * omega0), m(Complex64::from(0.0)))
        }
    };
    let (e1, e1_residual) = solve2(&m1, &rhs1, "E1 system")?;
    let (e2, e2_residual) = solve2(&m2, &rhs2, "E2 system")?;

    let q0 = [Complex64::from(1.0), a2];
    let q0c = [Complex64::from(1.0), a2c];
    let second = match variant {
        Variant::Standard => g02.conj(),
        Variant::Literal => g20.conj(),
    };
    let w20 = |theta: f64, comp: usize| {
        I * g20 / wt * q0[comp] * (I * wt * theta).exp() + I * second / (3.0 * wt) * q0c[comp] * (-I * wt * theta).exp()
            + e1[comp] * (2.0 * I * wt * theta).exp()
    };
    let w11 = |theta: f64, comp: usize| {
        -I * g11 / wt * q0[comp] * (I * wt * theta).exp() + I * g11.conj() / wt * q0c[comp] * (-I * wt * theta).exp()
            + e2[comp]
    };
    let (w20_1_0, w20_2_0, w20_2_m1) = (w20(0.0, 0), w20(0.0, 1), w20(-1.0, 1));
    let (w11_1_0, w11_2_0, w11_2_m1) = (w11(0.0, 0), w11(0.0, 1), w11(-1.0, 1));

    let bracket = -rk * (a2 * w11_1_0 + w20_1_0 / 2.0)
        + as_c * c * (a2c * w20_2_0 / 2.0 + a2 * w11_2_0)
        + as_c * w1d
            * (a2 * w11_2_m1 + a2c * w20_2_0 / 2.0 * e_p + a2 * w11_2_0 * e_m + a2c * w20_2_m1 / 2.0)
        + wd * (w11_2_0 + a2c * w20_1_0 / 2.0 + w20_2_0 / 2.0 + a2 * w11_1_0);
    let g21 = 2.0 * pre * bracket;

    let out = GCoefficients {
        g20,
        g11,
        g02,
        g21,
        e1,
        e2,
        e1_residual,
        e2_residual,
    };
    if ![g20, g11, g02, g21].iter().all(|g| g.is_finite()) {
        return Err(Error::Internal(format!("non-finite normal-form coefficients {out:?}")));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Supercritical,
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitStability {
    StablePeriodic,
    UnstablePeriodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodTrend {
    Increasing,
    Decreasing,
}

/// Direction, stability and period trend of the bifurcating orbits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfReport {
    pub omega0: f64,
    pub tau_star: f64,
    pub lambda_prime: Complex64,
    pub c1_0: Complex64,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub direction: Direction,
    pub stability: OrbitStability,
    pub period_trend: PeriodTrend,
}

pub fn hopf_quantities(g: &GCoefficients, omega0: f64, tau_star: f64, lambda_prime: Complex64) -> Result<HopfReport> {
    let wt = omega0 * tau_star;
    if !(wt > 0.0) {
        return Err(Error::Degenerate(format!(
            "omega0 * tau* must be positive, got {omega0} * {tau_star}"
        )));
    }
    if !(lambda_prime.re.abs() >= 1e-12) {
        return Err(Error::Transversality(format!(
            "Re lambda'(tau*) = {:e}",
            lambda_prime.re
        )));
    }
    let c1_0 = I / (2.0 * wt) * (g.g20 * g.g11 - 2.0 * g.g11.norm_sqr() - g.g02.norm_sqr() / 3.0) + g.g21 / 2.0;
    let mu2 = -c1_0.re / lambda_prime.re;
    let beta2 = 2.0 * c1_0.re;
    let t2 = -(c1_0.im + mu2 * lambda_prime.im) / wt;
    Ok(HopfReport {
        omega0,
        tau_star,
        lambda_prime,
        c1_0,
        mu2,
        beta2,
        t2,
        direction: if mu2 > 0.0 { Direction::Supercritical } else { Direction::Subcritical },
        stability: if beta2 < 0.0 {
            OrbitStability::StablePeriodic
        } else {
            OrbitStability::UnstablePeriodic
        },
        period_trend: if t2 > 0.0 { PeriodTrend::Increasing } else { PeriodTrend::Decreasing },
    })
}

/// `d lambda / d tau` at the crossing by implicit differentiation of the
/// characteristic equation.
pub fn lambda_prime_numeric(cc: &CharCoefficients, hp: &HopfPoint) -> Result<Complex64> {
    let lam = I * hp.omega0;
    let tau = hp.tau_star;
    let q = cc.b1 * lam + cc.b0;
    let e = (-lam * tau).exp();
    let denom = 2.0 * lam + cc.a1 + (cc.b1 - tau * q) * e;
    if !(denom.norm() > 1e-300) {
        return Err(Error::Degenerate("characteristic root is not simple".into()));
    }
    Ok(lam * q * e / denom)
}

/// Implicit-differentiation derivative cross-checked against root
/// continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaPrimeCheck {
    pub analytic: Complex64,
    pub continued: Option<Complex64>,
    /// Relative difference, when the continuation succeeded.
    pub relative_gap: Option<f64>,
}

pub fn lambda_prime_checked(cc: &CharCoefficients, hp: &HopfPoint) -> Result<LambdaPrimeCheck> {
    let analytic = lambda_prime_numeric(cc, hp)?;
    let continued = continued_root_derivative(cc, hp);
    Ok(LambdaPrimeCheck {
        analytic,
        continued,
        relative_gap: continued.map(|c| (c - analytic).norm() / analytic.norm().max(f64::MIN_POSITIVE)),
    })
}

/// Everything computed along the way from the model to the report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfAnalysis {
    pub cc: CharCoefficients,
    pub point: HopfPoint,
    pub pairing: ComplexPairing,
    pub g: GCoefficients,
    pub report: HopfReport,
}

/// Full pipeline at wavenumber `k` on the first crossing branch.
pub fn analyze_hopf(p: &ModelParameters, diff: &Diffusivities, k: f64, variant: Variant) -> Result<HopfAnalysis> {
    let eq = crate::model::interior_equilibrium(p)?;
    let lc = crate::model::linearization_coeffs(&eq, p)?;
    let cc = crate::linear::char_coeffs(p, &eq, diff, k)?;
    let point = crate::linear::hopf_point(&cc, 0)?
        .ok_or_else(|| Error::Domain(format!("no purely imaginary crossing at k = {k}")))?;
    let pairing = eigen_pairing(&lc, diff, k, point.omega0, point.tau_star)?;
    let g = g_coefficients(
        &pairing,
        &Nonlinearity::from_params(p),
        &lc,
        diff,
        k,
        point.omega0,
        point.tau_star,
        variant,
    )?;
    let lp = lambda_prime_numeric(&cc, &point)?;
    let report = hopf_quantities(&g, point.omega0, point.tau_star, lp)?;
    Ok(HopfAnalysis {
        cc,
        point,
        pairing,
        g,
        report,
    })
}

/// `<psi, phi>` for `psi(s) = (1, conj-free v) exp(i w s)` scaled by
/// `n` and `phi(xi) = u exp(i nu xi)`, evaluated with composite Gauss-Legendre
/// quadrature over the delay interval. Serves as an independent check of the
/// closed-form normalization.
pub fn bilinear_form(
    lc: &LinearizationCoefficients,
    tau_star: f64,
    n: Complex64,
    psi_vec: CVec2,
    psi_freq: f64,
    phi_vec: CVec2,
    phi_freq: f64,
) -> Complex64 {
    // psi(s) = n psi_vec e^{i psi_freq s}; phi(xi) = phi_vec e^{i phi_freq xi}.
    let psi_bar = |s: f64| {
        let f = (n * (I * psi_freq * s).exp()).conj();
        [f * psi_vec[0].conj(), f * psi_vec[1].conj()]
    };
    let phi = |xi: f64| {
        let f = (I * phi_freq * xi).exp();
        [f * phi_vec[0], f * phi_vec[1]]
    };
    let p0 = psi_bar(0.0);
    let f0 = phi(0.0);
    let point_term = p0[0] * f0[0] + p0[1] * f0[1];
    // tau* * int_{-1}^{0} psi_bar(xi + 1) L1 phi(xi) d xi, L1 = [[0,0],[b21,b22]].
    let integrand = |xi: f64| {
        let ps = psi_bar(xi + 1.0);
        let ph = phi(xi);
        ps[1] * (lc.b21 * ph[0] + lc.b22 * ph[1])
    };
    const NODES: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let panels = 64;
    let h = 1.0 / panels as f64;
    let mut total = Complex64::from(0.0);
    for j in 0..panels {
        let a = -1.0 + j as f64 * h;
        let mid = a + 0.5 * h;
        for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
            total += 0.5 * h * w * integrand(mid + 0.5 * h * x);
        }
    }
    point_term + tau_star * total
}
