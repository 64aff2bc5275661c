use thiserror::Error;

/// Errors raised by state construction, channel construction and the checks built on them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("backend mismatch: {0}")]
    BackendMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("states do not commute (commutator norm {norm:.3e})")]
    NonCommuting { norm: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(what: &str, left: usize, right: usize) -> Error {
    Error::DimensionMismatch(format!("{what}: {left} vs {right}"))
}
