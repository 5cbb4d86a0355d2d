use thiserror::Error;

use crate::scenario::ScenarioError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("`{0}` is neither a scenario file nor a bundled scenario name")]
    NotFound(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 2 for parse and validation errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Scenario(_) | RunError::NotFound(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

/// Wraps a core error raised while computing.
pub fn numerical<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Numerical(e.to_string())
}
