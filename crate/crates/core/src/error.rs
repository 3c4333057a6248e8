use thiserror::Error;

/// Errors raised by the Fock-space numerics and everything built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid truncation dimension {dim}: {reason}")]
    InvalidDim { dim: usize, reason: String },

    #[error("truncation tail {tail:e} exceeds tolerance {tolerance:e} (dim {dim})")]
    Truncation {
        tail: f64,
        tolerance: f64,
        dim: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator on mode {mode} is not Hermitian (deviation {deviation:e})")]
    NonHermitianOperator { mode: usize, deviation: f64 },

    #[error("numerical consistency violated: {0}")]
    NumericalConsistency(String),

    #[error("conditioning probability {probability:e} is below {threshold:e}")]
    DegenerateConditioning { probability: f64, threshold: f64 },

    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
