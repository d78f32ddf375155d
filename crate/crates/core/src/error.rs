use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A record violates a data invariant (span bounds, duplicate ids, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// A caller broke an operation's precondition (empty input, length mismatch, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Numeric domain error, e.g. the cosine of a zero vector.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("encoder transport failed after {retries} retries: {message}")]
    Transport { retries: u32, message: String },

    #[error("encoder protocol error: {0}")]
    Protocol(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            Error::Io { .. } => 1,
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Precondition(_)
            | Error::Domain(_)
            | Error::Config(_) => 3,
            Error::Transport { .. } | Error::Protocol(_) => 4,
        }
    }
}
