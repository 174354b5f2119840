//! Pipeline synthesis for tabular supervised learning.
//!
//! The online flow is: compute [`MetaFeatureVector`] of a dataset, predict a
//! set of FE components and rank models with a trained
//! [`SkeletonPredictorBundle`], order and instantiate each skeleton into a
//! script, then run the scripts on an internal split and keep the best.

pub mod corpus;
pub mod engine;
mod graph;
pub mod instantiate;
pub mod meta_features;
pub mod metrics;
pub mod num;
pub mod predictor;
pub mod stats;
pub mod tabular;
pub mod validation;

pub use corpus::{MetaCorpus, OrderDag, Taxonomy};
pub use meta_features::{compute_meta_features, MetaFeatureName, MetaFeatureVector};
pub use num::Scalar;
pub use predictor::{SkeletonPredictorBundle, TrainConfig};
pub use tabular::{load_csv, Dataset, TaskKind};

/// Decision tree with `f64` thresholds and probabilities.
pub type DecisionTree = predictor::DecisionTree<f64>;
pub type Condition = predictor::Condition<f64>;
pub type ModelRanker = predictor::ModelRanker<f64>;
pub type TaskRanker = predictor::TaskRanker<f64>;
