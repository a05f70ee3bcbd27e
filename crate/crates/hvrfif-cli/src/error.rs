//! CLI error type with the exit-code contract: 1 for validation failures,
//! 2 for verification failures, 3 for I/O errors.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("verification failed: {failed} of {total} checks did not pass")]
    Verify { failed: usize, total: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Verify { .. } => 2,
            CliError::Io(_) => 3,
        }
    }
}
