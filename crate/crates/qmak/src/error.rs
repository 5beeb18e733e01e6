use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] qmak_core::Error),

    #[error("{failed} of {total} checks failed")]
    CheckFailed { failed: usize, total: usize },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// 2 for malformed input or config, 3 for refused preconditions and
    /// caps, 4 for failed checks, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        use qmak_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Config(_) => 2,
            CliError::Core(e) if e.is_precondition() => 3,
            CliError::Core(E::InvalidInstance(_) | E::InvalidParameter(_)) => 2,
            CliError::CheckFailed { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
