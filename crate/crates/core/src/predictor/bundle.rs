use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::train::{
    frequency_ranker, train_fe_tree, train_model_ranker, FeTreeReport, TaskRanker, TrainConfig,
};
use super::tree::DecisionTree;
use super::PredictorError;
use crate::corpus::{mine_order_dag, MetaCorpus, OrderDag, Taxonomy};
use crate::num::Scalar;
use crate::tabular::TaskKind;

pub const BUNDLE_FORMAT: u32 = 1;

/// Per-task model rankers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ModelRanker<F> {
    pub classification: TaskRanker<F>,
    pub regression: TaskRanker<F>,
}

impl<F: Scalar> ModelRanker<F> {
    pub fn for_task(&self, task: TaskKind) -> &TaskRanker<F> {
        match task {
            TaskKind::Classification => &self.classification,
            TaskKind::Regression => &self.regression,
        }
    }
}

/// Everything the online phase needs, trained from one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonPredictorBundle {
    pub format: u32,
    pub taxonomy_version: String,
    pub corpus_hash: String,
    pub corpus_records: usize,
    pub config: TrainConfig,
    pub taxonomy: Taxonomy,
    pub fe_trees: BTreeMap<String, DecisionTree<f64>>,
    pub ranker: ModelRanker<f64>,
    pub order_dag: OrderDag,
    /// Corpus occurrence count per component, used for tie-breaking.
    pub frequencies: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerReport {
    pub task: TaskKind,
    pub learned: bool,
    pub models: Vec<String>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub corpus_hash: String,
    pub corpus_records: usize,
    pub fe: Vec<FeTreeReport>,
    pub rankers: Vec<RankerReport>,
}

impl TrainingReport {
    pub fn fe_report(&self, label: &str) -> Option<&FeTreeReport> {
        self.fe.iter().find(|r| r.label == label)
    }
}

impl SkeletonPredictorBundle {
    /// Trains one tree per taxonomy FE label, a ranker per task, and mines
    /// the ordering DAG.
    pub fn train(
        corpus: &MetaCorpus,
        cfg: &TrainConfig,
    ) -> (SkeletonPredictorBundle, TrainingReport) {
        let taxonomy = &corpus.taxonomy;
        let mut fe_trees = BTreeMap::new();
        let mut fe_reports = Vec::new();
        for fe in taxonomy.fe_names() {
            let (tree, report) = train_fe_tree::<f64>(corpus, fe, cfg);
            if let Some(why) = &report.constant {
                log::warn!("{fe}: constant predictor ({why})");
            }
            fe_trees.insert(fe.to_string(), tree);
            fe_reports.push(report);
        }

        let mut rankers = Vec::new();
        let mut ranker_for = |task: TaskKind| match train_model_ranker::<f64>(corpus, task, cfg) {
            Ok(r) => {
                rankers.push(RankerReport {
                    task,
                    learned: true,
                    models: r.models(),
                    note: None,
                });
                r
            }
            Err(e) => {
                log::warn!("{task} ranker falls back to corpus frequency: {e}");
                let r = frequency_ranker::<f64>(corpus, task);
                rankers.push(RankerReport {
                    task,
                    learned: false,
                    models: r.models(),
                    note: Some(e.to_string()),
                });
                r
            }
        };
        let ranker = ModelRanker {
            classification: ranker_for(TaskKind::Classification),
            regression: ranker_for(TaskKind::Regression),
        };

        let corpus_hash = corpus.content_hash();
        let bundle = SkeletonPredictorBundle {
            format: BUNDLE_FORMAT,
            taxonomy_version: taxonomy.version.clone(),
            corpus_hash: corpus_hash.clone(),
            corpus_records: corpus.len(),
            config: cfg.clone(),
            taxonomy: taxonomy.clone(),
            fe_trees,
            ranker,
            order_dag: mine_order_dag(corpus, cfg.min_support),
            frequencies: corpus.frequencies(),
        };
        let report = TrainingReport {
            corpus_hash,
            corpus_records: corpus.len(),
            fe: fe_reports,
            rankers,
        };
        (bundle, report)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, PredictorError> {
        let b: SkeletonPredictorBundle =
            serde_json::from_str(s).map_err(|e| PredictorError::Bundle(e.to_string()))?;
        if b.format != BUNDLE_FORMAT {
            return Err(PredictorError::Bundle(format!(
                "unsupported bundle format {}",
                b.format
            )));
        }
        b.order_dag
            .validate()
            .map_err(|e| PredictorError::Bundle(e.to_string()))?;
        Ok(b)
    }

    pub fn save(&self, path: &Path) -> Result<(), PredictorError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PredictorError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn frequency(&self, name: &str) -> usize {
        self.frequencies.get(name).copied().unwrap_or(0)
    }
}
