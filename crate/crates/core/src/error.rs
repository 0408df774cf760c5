use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied arguments that violate an operation's preconditions.
    #[error("{0}")]
    Usage(String),

    /// Input data could not be parsed or failed validation.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    InvalidData(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A computation would exceed its configured resource budget.
    #[error("{0}")]
    Resource(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    /// Short machine-readable category used by the CLI's error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Parse { .. } | Error::InvalidData(_) | Error::EmptyInput(_) => "data",
            Error::Resource(_) => "resource",
            Error::Io { .. } => "io",
        }
    }
}
