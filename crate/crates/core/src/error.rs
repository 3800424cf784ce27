use thiserror::Error;

/// Errors produced by construction, validation, and the solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("duplicate system label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown system label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("trace is {got:.12} (expected {expected})")]
    BadTrace { got: f64, expected: f64 },
    #[error("vector norm is {0:.12} (expected 1)")]
    BadNorm(f64),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("synthesis precondition violated: {0}")]
    SynthesisPrecondition(String),
    #[error("solver did not converge after {iterations} iterations (gap {gap:.3e})")]
    NonConvergence { iterations: usize, gap: f64 },
    #[error("unknown tolerance key `{0}`")]
    UnknownTolerance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
