//! Simulation and analysis of a delayed predator-prey model with a modified
//! Leslie-Gower predator and a Beddington-DeAngelis functional response.
//!
//! The crate covers finite-time blow-up (adaptive ODE/DDE integration with
//! blow-up bracketing and closed-form comparison bounds), reaction-diffusion
//! pattern formation (IMEX method of lines with Neumann boundaries, Turing
//! conditions, dispersion curves) and delay-induced Hopf bifurcation (critical
//! delay, transversality and normal-form coefficients).

pub mod blowup;
pub mod error;
pub mod export;
pub mod integrator;
pub mod linear;
pub mod model;
pub mod normal_form;
pub mod repro;
pub mod spatial;
mod rk;

pub use error::{Error, Result};
pub use integrator::{
    estimate_blowup_time, integrate_dde, integrate_ode, integrate_system, BlowupEstimate, HistoryBuffer,
    SimOutcome, StepControl, Trajectory,
};
pub use model::{
    equilibria, interior_equilibrium, jacobian_fd, jacobian_fd_split, linearization_coeffs, rhs_delayed,
    rhs_nondelayed, Equilibrium, EquilibriumKind, LinearizationCoefficients, Mat2, ModelParameters, StateVector,
};
pub use blowup::{
    check_nondelayed_condition, comparison_blowup_time, lower_prey_envelope, scan_delta1, threshold_bisection,
    BlowupCertificate, ThresholdResult,
};
pub use linear::{
    admissible_modes, char_coeffs, char_coeffs_structural, coefficients_agree, continue_root,
    continued_root_derivative, crossing_frequencies, dispersion_curve, hopf_point, hopf_point_at, mode_eigenvalues,
    newton_root, routh_hurwitz_tau0, transversality, turing_conditions, CharCoefficients, Diffusivities,
    DispersionSample, HopfPoint, Transversality, TuringReport,
};
pub use normal_form::{
    analyze_hopf, bilinear_form, eigen_pairing, g_coefficients, hopf_quantities, lambda_prime_checked,
    lambda_prime_numeric, ComplexPairing, Direction, GCoefficients, HopfAnalysis, HopfReport, LambdaPrimeCheck,
    Nonlinearity, OrbitStability, PeriodTrend, Variant,
};
pub use spatial::{
    cos2_perturbation, cosine_mode, laplacian, mode_amplitudes, simulate_rd, simulate_rd_delayed, DiffusionScheme,
    FieldHistory, Grid, LinearReaction, PdeControl, PdeRun, Reaction, SpatialField,
};
