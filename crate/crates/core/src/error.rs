use thiserror::Error;

/// Errors raised by the workbench operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("basis vectors are linearly dependent (rank {rank} < {count})")]
    DependentBasis { rank: usize, count: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point is not on the critical set (|d_v phi| = {residual:e})")]
    NotCritical { residual: f64 },

    #[error("point outside chart domain: {0}")]
    OutOfDomain(String),

    #[error("no numerically transversal coordinate: {0}")]
    NoTransversalCoordinate(String),

    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    #[error("ill-conditioned fit (condition number {condition:e}); {hint}")]
    IllConditioned { condition: f64, hint: String },

    #[error("decay check failed: {0}")]
    DecayCheck(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
