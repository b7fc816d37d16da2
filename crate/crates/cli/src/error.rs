//! CLI error type with process exit codes: 1 for validation problems in
//! inputs or configuration, 2 for runtime and numerical failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl From<icct::Error> for CliError {
    fn from(e: icct::Error) -> Self {
        use icct::Error::*;
        match &e {
            Domain(_) | DimensionMismatch(_) | InvalidInput(_) | EmptyChain => {
                CliError::Validation(e.to_string())
            }
            NonFinite(_) | Simulation(_) | Sweep { .. } => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
