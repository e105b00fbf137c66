//! Application errors and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    /// Bad configuration or arguments; nothing was written.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] laneflow_core::Error),
    #[error("{0}")]
    Io(String),
}

impl AppError {
    /// 1 for validation failures, 2 for failures during a run or while writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 1,
            AppError::Model(e) if e.is_runtime() => 2,
            AppError::Model(_) => 1,
            AppError::Io(_) => 2,
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Io(e.to_string())
    }
}
