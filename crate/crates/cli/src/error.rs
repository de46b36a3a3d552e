//! Errors and their exit codes.

use insightkit::knowledge::GraphError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A file could not be read or written.
    #[error("{0}")]
    Io(String),
    /// Input that does not parse: JSON, CSV or a command-line value.
    #[error("{0}")]
    Parse(String),
    /// Well-formed input that breaks a rule, names something unknown or
    /// fails a check.
    #[error("{0}")]
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Semantic(_) => 1,
            CliError::Io(_) | CliError::Parse(_) => 2,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Json(_) => CliError::Parse(e.to_string()),
            other => CliError::Semantic(other.to_string()),
        }
    }
}
