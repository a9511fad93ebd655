use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
///
/// Numerical outcomes such as a detected blow-up are *not* errors; they are
/// reported through [`crate::integrator::SimOutcome`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid step control: {0}")]
    InvalidControl(String),

    #[error("finite-difference tolerance not met: {0}")]
    Tolerance(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("inconsistent result: {0}")]
    Inconsistency(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("singular linear system (resonance): {0}")]
    Resonance(String),

    #[error("transversality failure: {0}")]
    Transversality(String),

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("internal invariant breached: {0}")]
    Internal(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
