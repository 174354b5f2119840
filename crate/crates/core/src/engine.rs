//! End-to-end runs: training a bundle and synthesizing a pipeline for one
//! dataset into an artifact directory.
//!
//! Artifact layout written by [`synthesize`]:
//!
//! ```text
//! meta_features.json   38 meta-features of the training data
//! skeletons.json       predictions, columns, ranked models, ordered skeletons
//! candidates/          one script per candidate + manifest.json
//! runs/                per-candidate workdirs with logs
//! results.json         evaluation result per candidate
//! best_pipeline.py     the selected script
//! final/               full-train / test run of the selected script
//! summary.json         selection and scores
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, HyperparamCatalog, MetaCorpus};
use crate::instantiate::{
    build_candidates, order_components, write_candidates, CandidatePipeline, InstantiationContext,
    InstantiationError, Metric, OrderedSkeleton, TemplatePack,
};
use crate::predictor::{
    seed_pipelines, FeComponent, FePrediction, PredictorError, SeedConfig, SkeletonPredictorBundle,
    TrainConfig, TrainingReport,
};
use crate::tabular::{DataError, Dataset, TaskKind};
use crate::validation::{
    finalize, internal_split, run_candidates, select_best, DataFiles, EvalResult, ExecutorConfig,
    ValidationError,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Instantiation(#[from] InstantiationError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl EngineError {
    /// 1 when no candidate could be evaluated, 3 for problems with the
    /// input data, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            EngineError::Validation(ValidationError::AllCandidatesFailed { .. })
            | EngineError::Validation(ValidationError::FinalizeFailed { .. }) => 1,
            EngineError::Data(_) | EngineError::Validation(ValidationError::Data(_)) => 3,
            _ => 2,
        }
    }
}

/// Trains a bundle and writes it with its training report alongside
/// (`<bundle stem>.report.json`).
pub fn train(
    corpus: &MetaCorpus,
    cfg: &TrainConfig,
    out: &Path,
) -> Result<(SkeletonPredictorBundle, TrainingReport), EngineError> {
    let (bundle, report) = SkeletonPredictorBundle::train(corpus, cfg);
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    bundle.save(out)?;
    write_json(&report_path(out), &report)?;
    Ok((bundle, report))
}

pub fn report_path(bundle: &Path) -> PathBuf {
    let stem = bundle
        .file_stem()
        .map_or_else(|| "bundle".into(), |s| s.to_string_lossy().into_owned());
    bundle.with_file_name(format!("{stem}.report.json"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    /// Number of top-ranked models turned into skeletons.
    pub k: usize,
    pub fe_cutoff: f64,
    pub seed: u64,
    /// Defaults to macro F1 for classification and R² for regression.
    pub metric: Option<Metric>,
    pub executor: ExecutorConfig,
    /// Template pack directory; the built-in pack when absent.
    pub templates: Option<PathBuf>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        let seed = SeedConfig::default();
        SynthesisConfig {
            k: seed.k,
            fe_cutoff: seed.fe_cutoff,
            seed: 0,
            metric: None,
            executor: ExecutorConfig::default(),
            templates: None,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.k == 0 {
            return Err(EngineError::Config("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.fe_cutoff) {
            return Err(EngineError::Config(format!(
                "fe_cutoff {} outside [0, 1]",
                self.fe_cutoff
            )));
        }
        self.executor.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonReport {
    pub model: String,
    pub model_rank: usize,
    pub model_score: f64,
    /// Components in emission order.
    pub ordered: Vec<FeComponent>,
    pub removed: Vec<String>,
}

/// Contents of `skeletons.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonsFile {
    pub task: TaskKind,
    pub fe_predictions: Vec<FePrediction>,
    pub fe_components: Vec<FeComponent>,
    pub dropped: Vec<String>,
    pub ranked_models: Vec<(String, f64)>,
    pub skeletons: Vec<SkeletonReport>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSummary {
    pub task: TaskKind,
    pub target: Vec<String>,
    pub train_rows: usize,
    pub test_rows: Option<usize>,
    pub metric: Metric,
    pub corpus_hash: String,
    pub template_version: String,
    pub seed: u64,
    pub candidates: usize,
    pub ok_candidates: usize,
    pub best: Option<String>,
    pub best_model: Option<String>,
    pub validation_score: Option<f64>,
    pub final_test_score: Option<f64>,
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), EngineError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| EngineError::Config(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn relative_logs(results: &mut [EvalResult], out: &Path) {
    let base = std::fs::canonicalize(out).unwrap_or_else(|_| out.to_path_buf());
    for r in results {
        if let Ok(rel) = r.log_path.strip_prefix(&base) {
            r.log_path = rel.to_path_buf();
        }
    }
}

/// Runs seeding, instantiation and validation for `train` and writes the
/// artifact directory `out`. With a test set, the selected pipeline is
/// retrained on all of `train` and scored on it.
pub fn synthesize(
    bundle: &SkeletonPredictorBundle,
    train: &Dataset,
    test: Option<&Dataset>,
    out: &Path,
    cfg: &SynthesisConfig,
) -> Result<SynthesisSummary, EngineError> {
    cfg.validate()?;
    let pack = match &cfg.templates {
        Some(dir) => TemplatePack::load_dir(dir)?,
        None => TemplatePack::builtin(),
    };
    let metric = cfg
        .metric
        .unwrap_or_else(|| Metric::default_for(train.task));
    std::fs::create_dir_all(out)?;

    let seeding = seed_pipelines(
        bundle,
        train,
        &SeedConfig {
            k: cfg.k,
            fe_cutoff: cfg.fe_cutoff,
        },
    );
    write_json(&out.join("meta_features.json"), &seeding.meta_features)?;
    let freq = |n: &str| bundle.frequency(n);
    let ordered: Vec<OrderedSkeleton> = seeding
        .skeletons
        .iter()
        .map(|s| {
            order_components(
                &s.fe,
                &s.model,
                s.model_rank,
                &bundle.order_dag,
                &bundle.taxonomy,
                freq,
            )
        })
        .collect::<Result<_, _>>()?;
    let skeletons = SkeletonsFile {
        task: train.task,
        fe_predictions: seeding.fe_predictions.clone(),
        fe_components: seeding.fe_components.clone(),
        dropped: seeding.dropped.clone(),
        ranked_models: seeding.ranked_models.clone(),
        skeletons: seeding
            .skeletons
            .iter()
            .zip(&ordered)
            .map(|(s, o)| SkeletonReport {
                model: s.model.clone(),
                model_rank: s.model_rank,
                model_score: s.model_score,
                ordered: o.fe_ordered.clone(),
                removed: o.removed.clone(),
            })
            .collect(),
    };
    write_json(&out.join("skeletons.json"), &skeletons)?;

    let schema = train.schema();
    let catalog = HyperparamCatalog::builtin();
    let ctx = InstantiationContext {
        order_dag: &bundle.order_dag,
        taxonomy: &bundle.taxonomy,
        templates: &pack,
        catalog: &catalog,
        schema: &schema,
        metric,
        frequencies: &bundle.frequencies,
    };
    let cands = build_candidates(&seeding.skeletons, &ctx)?;
    write_candidates(&out.join("candidates"), &cands)?;
    log::info!("{} candidates written", cands.len());

    let (inner_train, inner_valid) = internal_split(train, cfg.seed)?;
    let data_dir = out.join("data");
    std::fs::create_dir_all(&data_dir)?;
    let data = DataFiles {
        training: data_dir.join("inner_training.csv"),
        test: data_dir.join("inner_test.csv"),
    };
    inner_train.write_csv(&data.training)?;
    inner_valid.write_csv(&data.test)?;
    let mut results = run_candidates(&cands, &data, &out.join("runs"), &cfg.executor)?;
    relative_logs(&mut results, out);
    write_json(&out.join("results.json"), &results)?;

    let mut summary = SynthesisSummary {
        task: train.task,
        target: train.target_names.clone(),
        train_rows: train.n_rows,
        test_rows: test.map(|t| t.n_rows),
        metric,
        corpus_hash: bundle.corpus_hash.clone(),
        template_version: pack.version.clone(),
        seed: cfg.seed,
        candidates: cands.len(),
        ok_candidates: results.iter().filter(|r| r.score.is_some()).count(),
        best: None,
        best_model: None,
        validation_score: None,
        final_test_score: None,
    };
    let outcome = match select_best(&results, &cands) {
        Ok(o) => o,
        Err(e) => {
            write_json(&out.join("summary.json"), &summary)?;
            return Err(e.into());
        }
    };
    let best: &CandidatePipeline = cands
        .iter()
        .find(|c| c.script_id == outcome.best)
        .expect("winner is a candidate");
    std::fs::write(out.join("best_pipeline.py"), &best.source)?;
    summary.best = Some(best.script_id.clone());
    summary.best_model = Some(best.skeleton.model.clone());
    summary.validation_score = Some(outcome.validation_score);
    write_json(&out.join("summary.json"), &summary)?;

    let fin = finalize(best, train, test, &out.join("final"), &cfg.executor)?;
    summary.final_test_score = fin.and_then(|r| r.score);
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
