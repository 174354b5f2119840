//! Meta-models: one decision tree per FE component and a model ranker.

mod bundle;
pub mod linear;
mod seeding;
mod train;
mod tree;

use thiserror::Error;

use crate::tabular::TaskKind;

pub use bundle::{
    ModelRanker, RankerReport, SkeletonPredictorBundle, TrainingReport, BUNDLE_FORMAT,
};
pub use seeding::{
    applicable_kinds, column_satisfies, extract_decision_path, fallback_columns,
    generate_skeletons, infer_relevant_columns, predict_fe, rank_models, relevant_columns,
    seed_pipelines, FeComponent, FePrediction, SeedConfig, Seeding, Skeleton,
};
pub use train::{
    cross_validate, frequency_ranker, order_by_score, select_features, train_fe_tree,
    train_model_ranker, FeTreeReport, ModelScorer, TaskRanker, TrainConfig,
};
pub use tree::{CmpOp, Condition, DecisionTree, Node, TrainingSet};

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("`{fe}` is present in all or none of the corpus records")]
    OneClassOnly { fe: String },
    #[error("{task} needs at least 2 models in the corpus, found {found}")]
    InsufficientModels { task: TaskKind, found: usize },
    #[error("constant predictor has no decision path")]
    EmptyPath,
    #[error("invalid bundle: {0}")]
    Bundle(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
