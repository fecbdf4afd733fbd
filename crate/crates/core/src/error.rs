use thiserror::Error;

/// Errors raised by state validation, the basis optimizers and the protocol executor.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace deviates from 1 (got {0})")]
    TraceDeviation(f64),

    #[error("matrix has a negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("partial trace needs a nonempty set of kept factors")]
    EmptyKeep,

    #[error("factor index {index} out of range for {count} factors")]
    InvalidFactor { index: usize, count: usize },

    #[error("basis is not orthonormal/complete (deviation {0:e})")]
    IncompleteBasis(f64),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("ownership violation: {0}")]
    Ownership(String),

    #[error("post-check failed: {0}")]
    PostCheck(String),

    #[error("state file: {0}")]
    StateFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
