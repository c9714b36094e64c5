//! Stratified cross-validation, confusion-matrix metrics and the ratio of
//! best performance.

mod confusion;
mod cv;
mod folds;
mod report;
mod scores;

pub use confusion::{
    accuracy, class_counts, kappa, metrics_from_counts, per_class_metrics, ClassCounts,
    ClassMetrics, ConfusionMatrix,
};
pub use cv::{cross_validate, cross_validate_with, CvOutcome, FoldResult, Learner};
pub use folds::{stratified_folds, FoldAssignment};
pub use report::EvalReport;
pub use scores::{rbp, RbpResult, ScoreMatrix};

use crate::classifiers::ClassifierError;
use crate::corpus::Characterization;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no examples to evaluate")]
    EmptyInput,
    #[error("cannot make {k} folds from {n} examples (need 2 <= k <= n)")]
    InvalidFolds { k: usize, n: usize },
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("label {0} is not in the confusion matrix")]
    UnknownClass(Characterization),
    #[error("confusion matrices have different class lists")]
    ClassListMismatch,
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        source: ClassifierError,
    },
    #[error("score matrix: {0}")]
    ScoreMatrix(String),
    #[error("i/o error: {0}")]
    Io(String),
}
