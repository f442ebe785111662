use thiserror::Error;

use crate::model::ModelError;

/// Process exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Model(#[from] ModelError),
    /// Bad flags, unusable model content, unreadable side files.
    #[error("{0}")]
    Input(String),
    /// A computation that was asked for did not complete.
    #[error("{0}")]
    Failure(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => EXIT_FAILURE,
            _ => EXIT_INPUT,
        }
    }
}
