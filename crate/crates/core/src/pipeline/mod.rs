//! From SMILES files to trained checkpoints and generated molecules.

pub mod checkpoint;
pub mod dataset;
pub mod ingest;
pub mod sample;
pub mod train;

use std::io;

use thiserror::Error;

use crate::nn::NnError;
use crate::optim::OptimError;

pub use checkpoint::{Checkpoint, EpochLoss, RngState};
pub use dataset::{split, subsample, Dataset, DatasetRecord};
pub use ingest::{ingest, IngestOptions, IngestResult, RejectReason, Rejection};
pub use sample::{read_generation, sample, write_generation, Generated, GenerationSet};
pub use train::{TrainingConfig, Trainer};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("non-finite {component} at epoch {epoch}, batch {batch}")]
    Divergence {
        epoch: usize,
        batch: usize,
        component: &'static str,
    },
    #[error("condition does not match the checkpoint: {0}")]
    ConditionMismatch(String),
    #[error("condition value off the grid for {0}; pass --allow-offgrid to use it")]
    OffGrid(String),
    #[error("{0}")]
    Empty(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}
