use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The document does not match the config schema.
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    /// Well-formed but out-of-range value.
    #[error("invalid value at `{path}`: {message}")]
    Value { path: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(#[from] fockmeas::error::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl CliError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn value(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Value {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Value { .. } | CliError::UnknownPreset(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
