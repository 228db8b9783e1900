use alloc::string::String;

/// Broad classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters or configuration.
    Validation,
    /// Input data that cannot support the requested operation.
    Data,
    /// A numerical procedure failed.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("series too short: need at least {needed} observations, have {have}")]
    TooShort { needed: usize, have: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-positive value {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::UnknownFeature(_) => ErrorKind::Validation,
            Error::DimensionMismatch { .. }
            | Error::TooShort { .. }
            | Error::Empty(_)
            | Error::NonPositive { .. }
            | Error::ZeroVariance(_)
            | Error::Degenerate(_) => ErrorKind::Data,
            Error::Numerical(_) => ErrorKind::Numerical,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
