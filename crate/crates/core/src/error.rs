use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is out of range or inconsistent.
    #[error("argument error: {0}")]
    Argument(String),

    /// A state or matrix violates one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested tensor would exceed the configured amplitude cap.
    #[error("size limit exceeded: {requested} amplitudes requested, cap is {cap}")]
    SizeLimit { requested: usize, cap: usize },

    /// A state file could not be decoded.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
