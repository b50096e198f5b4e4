//! Error type shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Config file could not be parsed.
    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },

    /// I/O failure, annotated with the offending path.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Rejects non-finite values and anything not strictly positive.
    pub(crate) fn require_positive(value: f64, name: &str) -> Result<()> {
        if value.is_finite() && value > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{name} must be strictly positive, got {value}"
            )))
        }
    }

    /// Rejects non-finite and negative values.
    pub(crate) fn require_nonnegative(value: f64, name: &str) -> Result<()> {
        if value.is_finite() && value >= 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("{name} must be >= 0, got {value}")))
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
