use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid transform size {n}: {reason}")]
    InvalidSize { n: usize, reason: &'static str },
    #[error("index {index} out of range for size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("duplicate index {0}")]
    DuplicateIndex(usize),
    #[error("invalid row selection: {0}")]
    InvalidSelection(String),
    #[error("sparsity {k} must be smaller than the number of measurements {m}")]
    InvalidSparsity { k: usize, m: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep its rendering.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError(e.to_string()))
    }
}
