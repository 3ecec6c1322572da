//! Experiment runner around `fblab-core`: configuration files, the four
//! canonical experiments, and CSV/JSON/SVG artifact emission.

pub mod config;
pub mod experiments;
pub mod fieldio;
pub mod report;

use thiserror::Error;

/// Failure modes of a run, split by the exit code they map to: configuration
/// and shape problems exit with 2, numeric preconditions and runtime
/// failures with 3.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, unparseable, or ill-shaped configuration (exit 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// A numeric precondition or runtime requirement failed (exit 3).
    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl From<fblab_core::Error> for CliError {
    fn from(e: fblab_core::Error) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Precondition(format!("i/o failure: {e}"))
    }
}
