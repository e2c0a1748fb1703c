//! Experiment orchestration behind the `owwe` command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] owwe::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} stability classification(s) disagree with the expectations table")]
    Mismatch(usize),
}

impl CliError {
    /// Process exit code: 2 for usage, 3 for classification mismatches,
    /// 4 for the instability alarm, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Json(_) => 2,
            CliError::Mismatch(_) => 3,
            CliError::Core(owwe::Error::Unstable { .. }) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
