use thiserror::Error;

/// Errors raised by encoding, decoding and channel operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HdcError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("symbol {symbol} at position {position} is outside the alphabet of size {alphabet}")]
    SymbolOutOfRange {
        position: usize,
        symbol: usize,
        alphabet: usize,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("linear-regression readout requires a covariance model")]
    MissingCovariance,

    #[error("covariance model was built for v={built}, decoder asked for v={requested}")]
    CovarianceMismatch { built: usize, requested: usize },

    #[error("covariance matrix is singular even after ridge regularization")]
    SingularCovariance,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, HdcError>;
