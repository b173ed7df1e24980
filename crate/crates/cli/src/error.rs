use std::path::PathBuf;

use jsamode::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] jsamode::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: jsamode::Error,
    },

    #[error("{0}")]
    Precondition(String),

    #[error("{path} was produced under config hash {found}, current config hashes to {expected} (use --force to override)")]
    HashMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn file(path: impl Into<PathBuf>, source: jsamode::Error) -> Self {
        CliError::File {
            path: path.into(),
            source,
        }
    }

    /// 0 ok, 1 precondition or config, 2 corrupt data, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        let kind = match self {
            CliError::Core(e) | CliError::File { source: e, .. } => e.kind(),
            CliError::Io { .. } | CliError::Precondition(_) | CliError::HashMismatch { .. } => {
                ErrorKind::Precondition
            }
        };
        match kind {
            ErrorKind::Precondition | ErrorKind::Io => 1,
            ErrorKind::Corruption => 2,
            ErrorKind::Numerical => 3,
        }
    }
}
