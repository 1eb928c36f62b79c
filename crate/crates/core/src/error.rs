use thiserror::Error;

/// Errors raised by the certification kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix that must be inverted is singular to working precision.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// An iterative kernel failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A caller-side contract (Hermitian input, commutation, ...) is violated.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A bilateral series did not reach its tail tolerance within the cap.
    #[error("truncation failure: {0}")]
    Truncation(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Malformed file or wire input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
