//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A file or descriptor could not be parsed or has the wrong layout.
    #[error("format error: {0}")]
    Format(String),
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// An iterative method stopped before reaching its tolerance.
    #[error("did not converge: {0}")]
    NotConverged(String),
    /// Equivalent uniform expansion exceeds the configured size limits.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// The filter bank is not a frame at some frequency.
    #[error("frame failure: {0}")]
    Frame(String),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 2,
            Error::Format(_) | Error::Io(_) => 3,
            Error::NotConverged(_) | Error::Capacity(_) | Error::Frame(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
