//! Prediction tasks, bagged decision trees, feature selection and metrics.

mod cv;
mod dataset;
mod ensemble;
mod metrics;
mod selection;
mod tasks;
mod tree;

use crate::features::FeatureError;

pub use cv::{cross_validate, CvConfig, CvReport};
pub use dataset::{Dataset, InstanceId};
pub use ensemble::{train_bagged_trees, BaggedTree, Scorer, TreeEnsemble, DEFAULT_TREES};
pub use metrics::{
    auc, average_precision, evaluate, positive_bias_baseline, write_metrics_table, MetricsReport, PositiveBiasBaseline,
};
pub use selection::{stepwise_forward_selection, SelectionConfig, SelectionStep};
pub use tasks::{build_length_task, build_reentry_task, length_dataset, reentry_dataset, split_by_thread};
pub use tree::{bootstrap_weights, DecisionTree, Node, TreeParams};

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("labels contain a single class")]
    SingleClass,
    #[error("schema mismatch: expected {expected} features, got {got}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no qualifying threads: {0}")]
    NoQualifyingThreads(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = LearnError> = std::result::Result<T, E>;
