//! Streaming evaluation: dataset ingestion, preprocessing, the online
//! F-measure loop, and synthetic streams with known reference classifiers.

mod dataset;
mod metrics;
mod preprocess;
mod runner;
mod shift;
mod synthetic;

use thiserror::Error;

pub use dataset::{parse_dataset, read_dataset, write_dataset, DatasetStream, RawDataset, RawExample};
pub use metrics::{Confusion, StreamMetrics, TrajectoryPoint};
pub use preprocess::{binarize_by_percentile, percentile, rescale_features};
pub use runner::{baseline_active_size, drive, run_stream, BudgetSpec, RunOutput};
pub use shift::{shift_term, trace_term, ShiftTerm};
pub use synthetic::{generate_synthetic, ReferenceTaskSet, SyntheticConfig};

use crate::learners::LearnerError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: task {task} out of range 1..={k}")]
    TaskOutOfRange { line: usize, task: i64, k: usize },
    #[error("line {line}: label {value} is not ±1; binarize first")]
    NonBinaryLabel { line: usize, value: f64 },
    #[error("stream is empty")]
    EmptyStream,
    #[error("invalid budget `{0}`")]
    InvalidBudget(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reference sets have inconsistent dimensions")]
    DimensionMismatch,
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
