use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value at cell {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported dimension {found} (expected {expected})")]
    Dimension { expected: String, found: usize },

    #[error("axis {0} is periodic; the operation needs a bounded axis")]
    PeriodicAxis(usize),

    #[error("operation requires a fully periodic grid")]
    NotPeriodic,

    #[error("data is not mean-zero (mean = {0:e})")]
    NotMeanZero(f64),

    #[error("index {index} out of range for axis of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("derivative undefined at the zero field")]
    ZeroField,

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
