use thiserror::Error;

/// Errors produced by the separability toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix of size {rows}x{cols} exceeds the dimension limit {limit}")]
    Size {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("operator is not Hermitian (max |M - M^†| = {0:e})")]
    NotHermitian(f64),

    #[error("trace {0} differs from one")]
    Trace(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("witness construction failed: {0}")]
    Construction(String),

    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
