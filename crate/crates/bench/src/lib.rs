//! Experiment harness for pseudoinverse GCNs: dataset loading, cached
//! eigensolves, multi-run training with summary statistics, rank sweeps,
//! learned-weight analysis and the dense-oracle self checks.

pub mod config;
pub mod experiment;
pub mod oracle;
pub mod stats;
pub mod sweep;
pub mod weights;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] pinvgcn::Error),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Input(String),
}

pub use config::ExperimentConfig;
