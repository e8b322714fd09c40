use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid value for {key}: {message}")]
    InvalidValue { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] mcdimpute::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        CliError::InvalidValue {
            key: key.to_owned(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage, 2 data, 3 numeric divergence.
    pub fn exit_code(&self) -> i32 {
        use mcdimpute::Error as E;
        match self {
            CliError::Usage(_) | CliError::InvalidValue { .. } => 1,
            CliError::Io { .. } => 2,
            CliError::Core(E::Divergence { .. } | E::NonFiniteGradient) => 3,
            CliError::Core(E::InvalidArgument(_)) => 1,
            CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
