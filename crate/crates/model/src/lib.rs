//! A hierarchical transformer that reads decomposed specifications and writes
//! AIGER circuits, with training and beam-search decoding.

pub mod config;
pub mod data;
pub mod decode;
pub mod gradcheck;
pub mod params;
pub mod train;
pub mod transformer;

pub use config::{ModelConfig, OptimizerConfig};
pub use data::{Batch, Example};
pub use decode::{beam_search, greedy, BeamHypothesis};
pub use params::Checkpoint;
pub use train::{train, MetricRow, TrainConfig, TrainReport};
pub use transformer::Transformer;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Tensor(#[from] candle::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Tokenizer(#[from] ltlsyn_core::tokenizer::TokenizerError),
    #[error("training diverged at step {step}: loss {loss}")]
    Divergence { step: usize, loss: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("input does not fit the model: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
