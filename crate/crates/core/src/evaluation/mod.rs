//! Author-grouped cross-validation and the feature set × classifier
//! experiment grid.

mod bundle;
mod cv;
mod folds;
mod pipeline;
mod table;

use thiserror::Error;

use crate::features::FeatureError;
use crate::learners::LearnError;

pub use bundle::{ModelBundle, TrainSummary};
pub use cv::{cross_validate, cross_validate_with, Classifier, Confusion, CvConfig, CvReport, Fingerprint, FoldReport, Training};
pub use folds::{group_folds, make_grouped_folds, FoldAssignment};
pub use pipeline::{FittedPipeline, PipelineConfig};
pub use table::{reference_accuracy, run_experiment_table, ExperimentTable};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{authors} distinct authors cannot fill {k} folds; use fewer folds")]
    TooFewAuthors { authors: usize, k: usize },
    #[error("fold count must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("fold {fold}: training partition contains only one class")]
    SingleClassFold { fold: usize },
    #[error("fold assignment covers {expected} tweets but the corpus has {found}")]
    FoldMismatch { expected: usize, found: usize },
    #[error("model file line {line}: {reason}")]
    Bundle { line: usize, reason: String },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Learn(#[from] LearnError),
}
