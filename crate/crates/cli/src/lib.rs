//! Config-driven runs of the cs-emission pipeline: spectra, decay rates,
//! validation reports and θ-trajectories written as JSON and CSV.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;

use thiserror::Error;

pub use commands::{execute, Command, Outcome};
pub use config::{ConfigError, RunConfig, Settings};
pub use report::RunResult;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Pipeline(#[from] cs_emission::Error),
    #[error("output: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Pipeline(e) if e.is_precondition() => EXIT_CONFIG,
            CliError::Pipeline(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}
