//! Syntactic and semantic accuracy of circuit predictions under beam search.

pub mod harness;
pub mod predictor;
pub mod reference;

pub use harness::{evaluate, filter_benchmarks, write_report, BeamMetrics, BinMetrics, EvalConfig, EvalReport, SampleOutcome};
pub use predictor::{ModelPredictor, Predictor};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Model(#[from] ltlsyn_model::ModelError),
    #[error(transparent)]
    Tokenizer(#[from] ltlsyn_core::tokenizer::TokenizerError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid evaluation setup: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, EvalError>;
