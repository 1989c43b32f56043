//! Configuration-driven runner for the `infobound` case studies.
//!
//! [`cases::run_case`] executes one case end to end and returns its report
//! together with the text of every output file; [`verify::verify`] runs the
//! whole invariant suite at reduced sample counts.

pub mod cases;
pub mod config;
pub mod output;
pub mod report;
pub mod verify;

use thiserror::Error;

pub use cases::{run_case, CaseOutput, RunOptions};
pub use config::{CaseKind, RunConfig};
pub use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] infobound::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 for usage and configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Model(infobound::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}
