//! Experiment harness around [`saga_core`]: dataset loading, synthetic
//! benchmark generators, seeded repeated runs, and table/trace emission.
//!
//! The binary (`saga`) is a thin argument parser over this library; every
//! operation here is callable directly so tests and downstream code can
//! drive experiments without touching the filesystem-facing CLI.

pub mod config;
pub mod csv_io;
pub mod harness;
pub mod synth;
pub mod tables;

pub use config::{Arm, ExperimentConfig};
pub use harness::{run_experiment, run_on_table, ExperimentResult, WallClock};

use saga_core::{DataError, GaError};

/// Top-level error split by exit code: configuration problems exit 1,
/// dataset problems exit 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("data: {0}")]
    Dataset(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Data(_) | CliError::Dataset(_) => 2,
        }
    }
}

impl From<GaError> for CliError {
    fn from(err: GaError) -> Self {
        match err {
            GaError::Data(data) => CliError::Data(data),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Config(err.to_string())
    }
}
