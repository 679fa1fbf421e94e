use thiserror::Error;

/// Errors produced by solvers, oracles and I/O helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("operator kind {found:?} not accepted here (expected {expected})")]
    KindMismatch { expected: &'static str, found: crate::Symmetry },

    #[error("preconditioner is not positive semidefinite (<z, Mz> = {0:e})")]
    NotPsd(f64),

    #[error("degenerate lifting denominator |<rhat, rbreve>| = {0:e}")]
    DegenerateLifting(f64),

    #[error("matrix is not {0} within tolerance")]
    NotSymmetric(&'static str),

    #[error("incompatible preconditioner source: {0}")]
    IncompatibleSource(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("image format error at byte {offset}: {message}")]
    Image { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
