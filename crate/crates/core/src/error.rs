//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("polynomial has non-integer coefficients")]
    NonIntegerCoefficients,
    #[error("invalid block sequence: {0}")]
    InvalidSequence(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("normalization failed: {0}")]
    Normalization(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("size budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, WitError>;
