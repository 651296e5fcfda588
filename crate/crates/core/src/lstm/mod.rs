//! From-scratch LSTM forecaster for log mortality series.

mod dataset;
mod network;
mod train;

pub use dataset::{build_dataset, build_dataset_with, RateTransform, Regime, SequenceDataset, SeriesOrigin, TrainEnd};
pub use network::{Dense, Dims, Gate, GateRecord, GateWeights, LstmGradients, LstmNetwork, NetworkDocument};
pub use train::{forecast_recursive, train, ModelDocument, Standardizer, TrainedLstm, TrainingConfig};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LstmError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in the cell at step {step}")]
    Numeric { step: usize },
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("empty batch")]
    EmptyBatch,
    #[error("no training windows could be produced: {0}")]
    EmptyDataset(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("history has {got} values, need at least {needed}")]
    InsufficientHistory { needed: usize, got: usize },
    #[error("{country}: series ends in {last_year}, before the training cutoff {cutoff}")]
    SeriesTooShort {
        country: String,
        last_year: i32,
        cutoff: i32,
    },
}
