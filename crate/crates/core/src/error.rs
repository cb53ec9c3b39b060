use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not Hermitian: max |M_ij - conj(M_ji)| = {deviation:e} exceeds bound {bound:e}")]
    NotHermitian { deviation: f64, bound: f64 },

    #[error("invalid tensor shape: {0}")]
    Shape(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("solver did not converge after {iterations} iterations (primal {primal:e}, dual {dual:e}, gap {gap:e}): {reason}")]
    Convergence {
        iterations: usize,
        primal: f64,
        dual: f64,
        gap: f64,
        reason: String,
    },

    #[error("pointer extraction failed: {0}")]
    Extraction(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
