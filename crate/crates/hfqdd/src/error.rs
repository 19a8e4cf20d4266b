use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

/// Failures of the harness, grouped by the exit code they map to.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read config file {}: {source}", path.display())]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config file {}: {source}", path.display())]
    ConfigParse { path: PathBuf, source: serde_json::Error },
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] hfqdd_core::Error),
    #[error("degenerate order fit: {0}")]
    FitDegenerate(String),
    #[error("self-test failed: {0}")]
    SelfTestFailed(String),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl HarnessError {
    /// `2` for configuration problems, `3` for numerical failures, `1` for
    /// everything else (IO, thread pool).
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::ConfigRead { .. } | HarnessError::ConfigParse { .. } | HarnessError::ConfigInvalid(_) => 2,
            HarnessError::Numerical(_) | HarnessError::FitDegenerate(_) | HarnessError::SelfTestFailed(_) => 3,
            HarnessError::Output { .. } | HarnessError::ThreadPool(_) => 1,
        }
    }

    pub(crate) fn invalid(err: impl std::fmt::Display) -> Self {
        HarnessError::ConfigInvalid(err.to_string())
    }
}
