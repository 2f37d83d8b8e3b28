//! Experiment harness for the AHT laboratory: TOML configuration, CSV/JSON
//! output, gated reports, and the five `aht` subcommands.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;

pub use config::ExperimentConfig;
pub use report::{Gate, Report};

/// `<crate version>+<git describe>` when built inside a checkout.
pub const VERSION: &str = env!("AHT_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] aht_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// Process exit code: 2 configuration, 3 numerics, 4 output.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Numeric(_) => 3,
            _ => 4,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
