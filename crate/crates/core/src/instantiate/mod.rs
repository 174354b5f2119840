//! Turns skeletons into ordered, concrete candidate scripts.

mod emit;
mod order;
pub mod templates;

use thiserror::Error;

pub use emit::{
    build_candidates, instantiate_pipeline, python_literal, scan_script, write_candidates,
    CandidateManifestEntry, CandidatePipeline, InstantiationContext, Metric, ScriptScan,
    RESULT_MARKER,
};
pub use order::{
    construct_dag, discard_redundant, order_components, total_order, OrderedSkeleton, SkeletonDag,
};
pub use templates::{SnippetTemplate, TemplatePack, TemplateStage, Variant};

#[derive(Debug, Error)]
pub enum InstantiationError {
    #[error("component `{0}` is not in the order DAG")]
    UnknownComponent(String),
    #[error("order DAG contains a cycle")]
    CycleDetected,
    #[error("pre-detach component `{0}` is ordered after a post-detach one")]
    StageConflict(String),
    #[error("no template for {0}")]
    MissingTemplate(String),
    #[error("`{0}` has no columns to act on")]
    EmptyColumnHole(String),
    #[error("`{component}` refers to column `{column}`, which is not a feature of the dataset")]
    UnknownColumn { component: String, column: String },
    #[error("no skeletons to instantiate")]
    NoSkeletons,
    #[error("invalid template pack: {0}")]
    TemplatePack(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
