use thiserror::Error;

/// Crate-wide error type, split into the categories surfaced as CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or construction parameters.
    #[error("config error: {0}")]
    Config(String),
    /// Data that does not match the expected geometry, shape, or format.
    #[error("data error: {0}")]
    Data(String),
    /// Numerical failure (singular system, non-finite value, missing feature).
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code category: config=2, data=3, numeric=4, io=5.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) => 3,
            Error::Numeric(_) => 4,
            Error::Io(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
