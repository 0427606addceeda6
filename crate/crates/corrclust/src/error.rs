use std::path::{Path, PathBuf};

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Line 0 means the problem is not tied to one line (e.g. a missing header).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Core(#[from] corrclust_core::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("usage: {0}")]
    Usage(String),

    /// A runtime check of a guarantee failed; the report was still written.
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for usage errors (as clap), 3 for failed assertions, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Assertion(_) => 3,
            _ => 1,
        }
    }
}
