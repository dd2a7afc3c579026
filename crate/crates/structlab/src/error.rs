//! Crate-wide error type and exit-code mapping.

use thiserror::Error;

/// Errors surfaced by any structlab component.
#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible shapes, invalid topology, or inconsistent run settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed s-expression input.
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// Malformed corpus, embedding, or model file.
    #[error("data error at line {line}: {message}")]
    Data { line: usize, message: String },

    /// Tree and sentence do not describe the same token sequence.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// Caller misuse of the library or CLI surface.
    #[error("usage error: {0}")]
    Usage(String),

    /// Training produced a non-finite loss.
    #[error("divergence: non-finite loss at epoch {epoch}, minibatch {minibatch}")]
    Divergence { epoch: usize, minibatch: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 usage/configuration, 2 data, 3 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 1,
            Error::Parse { .. } | Error::Data { .. } | Error::Alignment(_) | Error::Io(_) => 2,
            Error::Divergence { .. } => 3,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn data(line: usize, msg: impl Into<String>) -> Self {
        Error::Data {
            line,
            message: msg.into(),
        }
    }
}
