//! Failure classes and their process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for usage and configuration errors, 3 for solver and output failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<strip_vortex::Error> for CliError {
    fn from(e: strip_vortex::Error) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
