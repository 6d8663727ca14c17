use std::path::PathBuf;

use thiserror::Error;

/// Failures of the runner, mapped onto process exit codes by [`RunError::exit_code`].
#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no run artifacts found in {0}")]
    MissingArtifacts(PathBuf),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] regenset_core::Error),
    #[error(
        "{failures} of {n} replicas depend on the window edge (T = {half_width}); raise T"
    )]
    WindowTooSmall { failures: usize, n: usize, half_width: f64 },
    #[error("verification failed in: {}", .0.join(", "))]
    Verification(Vec<String>),
}

impl RunError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }

    /// 2 for unusable input, 1 for failed verification or runtime errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::MissingArtifacts(_) => 2,
            _ => 1,
        }
    }
}

pub type RunResult<T> = Result<T, RunError>;
