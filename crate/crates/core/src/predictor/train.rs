use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::{
    fit_linear_svm, fit_logistic, fit_platt, signed_log1p, LinearConfig, LinearScorer,
    PlattSigmoid, Standardizer,
};
use super::tree::{DecisionTree, TrainingSet};
use super::PredictorError;
use crate::corpus::MetaCorpus;
use crate::meta_features::{MetaFeatureName, MetaFeatureVector};
use crate::metrics::macro_f1;
use crate::num::Scalar;
use crate::stats;
use crate::tabular::TaskKind;

/// Training knobs. Stored verbatim in the bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    /// Minimum |point-biserial r| for a meta-feature to feed an FE tree.
    pub pb_threshold: f64,
    /// Features kept when none clears `pb_threshold`.
    pub fallback_top: usize,
    pub depth_grid: Vec<usize>,
    pub cv_folds: usize,
    /// Majority ratio required for a mined ordering edge.
    pub min_support: f64,
    pub linear: LinearConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            pb_threshold: 0.1,
            fallback_top: 3,
            depth_grid: vec![2, 3, 4, 5],
            cv_folds: 5,
            min_support: 0.8,
            linear: LinearConfig::default(),
        }
    }
}

fn column<F: Scalar>(mfs: &[&MetaFeatureVector], f: MetaFeatureName) -> Vec<F> {
    mfs.iter().map(|m| F::of(m.get(f))).collect()
}

fn cmp_rows<F: Scalar>(a: &[F], b: &[F]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Meta-features whose |point-biserial r| with the presence of `fe` reaches
/// `threshold`, in canonical order. Falls back to the `fallback_top`
/// strongest non-degenerate features when none qualifies.
pub fn select_features(
    corpus: &MetaCorpus,
    fe: &str,
    threshold: f64,
    fallback_top: usize,
) -> Result<Vec<MetaFeatureName>, PredictorError> {
    let y: Vec<bool> = corpus.records.iter().map(|r| r.has_fe(fe)).collect();
    if y.iter().all(|&p| p) || y.iter().all(|&p| !p) {
        return Err(PredictorError::OneClassOnly { fe: fe.to_string() });
    }
    let mfs: Vec<&MetaFeatureVector> = corpus.records.iter().map(|r| &r.meta_features).collect();
    let scored: Vec<(MetaFeatureName, f64)> = MetaFeatureName::ALL
        .iter()
        .filter_map(|&f| {
            let r = stats::point_biserial(&column::<f64>(&mfs, f), &y);
            (!r.degenerate).then_some((f, r.value.abs()))
        })
        .collect();
    let selected: Vec<MetaFeatureName> = scored
        .iter()
        .filter(|(_, r)| *r >= threshold)
        .map(|(f, _)| *f)
        .collect();
    if !selected.is_empty() {
        return Ok(selected);
    }
    let mut ranked = scored;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut top: Vec<MetaFeatureName> = ranked
        .into_iter()
        .take(fallback_top)
        .map(|(f, _)| f)
        .collect();
    if top.is_empty() {
        top = MetaFeatureName::ALL
            .iter()
            .copied()
            .take(fallback_top)
            .collect();
    }
    top.sort();
    Ok(top)
}

/// Deterministic stratified fold assignment.
fn stratified_folds(y: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    let mut offset = 0;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        for (j, i) in idx.into_iter().enumerate() {
            fold[i] = (offset + j) % k;
        }
        offset += y.iter().filter(|&&c| c == class).count();
    }
    fold
}

/// Mean macro-F1 of a depth-limited tree over `k` stratified folds.
pub fn cross_validate<F: Scalar>(
    features: &[MetaFeatureName],
    x: &[Vec<F>],
    y: &[bool],
    max_depth: usize,
    k: usize,
    seed: u64,
) -> f64 {
    let folds = stratified_folds(y, k, seed);
    let mut total = 0.0;
    let mut used = 0;
    for f in 0..k {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| folds[i] == f);
        if test.is_empty() || train.is_empty() {
            continue;
        }
        let tx: Vec<Vec<F>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<bool> = train.iter().map(|&i| y[i]).collect();
        let w = super::linear::balanced_weights::<F>(&ty);
        let tree = DecisionTree::fit(
            &TrainingSet {
                features,
                x: &tx,
                y: &ty,
                weights: &w,
            },
            max_depth,
        );
        let vx: Vec<Vec<F>> = test.iter().map(|&i| x[i].clone()).collect();
        let vy: Vec<bool> = test.iter().map(|&i| y[i]).collect();
        total += macro_f1(&vy, &tree.predict_rows(features, &vx));
        used += 1;
    }
    if used == 0 {
        0.0
    } else {
        total / used as f64
    }
}

/// What happened while fitting one FE tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeTreeReport {
    pub label: String,
    pub positives: usize,
    pub records: usize,
    pub selected_features: Vec<MetaFeatureName>,
    pub max_depth: Option<usize>,
    pub cv_macro_f1: Option<f64>,
    /// Set when the tree is a constant predictor.
    pub constant: Option<String>,
}

/// Fits the tree for one FE label, choosing `max_depth` from the grid by
/// cross-validated macro-F1 (ties go to the shallower tree).
///
/// Records are put into a canonical order first, so the result does not
/// depend on the corpus order.
pub fn train_fe_tree<F: Scalar>(
    corpus: &MetaCorpus,
    fe: &str,
    cfg: &TrainConfig,
) -> (DecisionTree<F>, FeTreeReport) {
    let n = corpus.len();
    let positives = corpus.records.iter().filter(|r| r.has_fe(fe)).count();
    let mut report = FeTreeReport {
        label: fe.to_string(),
        positives,
        records: n,
        selected_features: Vec::new(),
        max_depth: None,
        cv_macro_f1: None,
        constant: None,
    };
    if corpus.is_excluded(fe) || positives == 0 {
        report.constant = Some(format!(
            "{fe} occurs {positives} times; excluded as a meta-target"
        ));
        return (DecisionTree::constant(F::zero()), report);
    }
    let features = match select_features(corpus, fe, cfg.pb_threshold, cfg.fallback_top) {
        Ok(f) => f,
        Err(e) => {
            let prior = F::of_usize(positives) / F::of_usize(n);
            report.constant = Some(e.to_string());
            return (DecisionTree::constant(prior), report);
        }
    };
    report.selected_features = features.clone();

    let mut rows: Vec<(Vec<F>, bool)> = corpus
        .records
        .iter()
        .map(|r| {
            (
                features
                    .iter()
                    .map(|&f| F::of(r.meta_features.get(f)))
                    .collect(),
                r.has_fe(fe),
            )
        })
        .collect();
    rows.sort_by(|a, b| cmp_rows(&a.0, &b.0).then(a.1.cmp(&b.1)));
    let (x, y): (Vec<Vec<F>>, Vec<bool>) = rows.into_iter().unzip();

    let k = cfg.cv_folds.min(n).max(2);
    let mut best: Option<(usize, f64)> = None;
    for &depth in &cfg.depth_grid {
        let score = cross_validate(&features, &x, &y, depth, k, cfg.seed);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((depth, score));
        }
    }
    let (depth, score) = best.unwrap_or((cfg.depth_grid.first().copied().unwrap_or(2), 0.0));
    report.max_depth = Some(depth);
    report.cv_macro_f1 = Some(score);
    let w = super::linear::balanced_weights::<F>(&y);
    let tree = DecisionTree::fit(
        &TrainingSet {
            features: &features,
            x: &x,
            y: &y,
            weights: &w,
        },
        depth,
    );
    (tree, report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ModelScorer<F> {
    pub model: String,
    pub logistic: LinearScorer<F>,
    pub svm: LinearScorer<F>,
    pub platt: PlattSigmoid<F>,
}

impl<F: Scalar> ModelScorer<F> {
    /// `(p_LR, p_SVM)` for a standardized row.
    pub fn probabilities(&self, z: &[F]) -> (F, F) {
        (
            super::linear::sigmoid(self.logistic.decision(z)),
            self.platt.prob(self.svm.decision(z)),
        )
    }
}

/// Ranks the models applicable to one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar", tag = "kind", rename_all = "snake_case")]
pub enum TaskRanker<F> {
    /// One-vs-rest logistic + calibrated SVM per model.
    Learned {
        standardizer: Standardizer<F>,
        models: Vec<ModelScorer<F>>,
    },
    /// Corpus frequency, used when fewer than two models could be learned.
    Frequency { scores: Vec<(String, F)> },
}

/// Sorts by descending score, then name.
pub fn order_by_score<F: Scalar>(mut scores: Vec<(String, F)>) -> Vec<(String, F)> {
    scores.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    scores
}

impl<F: Scalar> TaskRanker<F> {
    /// Per-model `(p_LR, p_SVM)`; empty for the frequency fallback.
    pub fn learner_probabilities(&self, mf: &MetaFeatureVector) -> Vec<(String, F, F)> {
        match self {
            TaskRanker::Learned {
                standardizer,
                models,
            } => {
                let z = standardizer.apply(&ranker_inputs(mf));
                models
                    .iter()
                    .map(|m| {
                        let (a, b) = m.probabilities(&z);
                        (m.model.clone(), a, b)
                    })
                    .collect()
            }
            TaskRanker::Frequency { .. } => Vec::new(),
        }
    }

    /// Models with their scores, best first.
    pub fn rank(&self, mf: &MetaFeatureVector) -> Vec<(String, F)> {
        match self {
            TaskRanker::Learned { .. } => order_by_score(
                self.learner_probabilities(mf)
                    .into_iter()
                    .map(|(m, a, b)| (m, (a + b) / F::of(2.0)))
                    .collect(),
            ),
            TaskRanker::Frequency { scores } => order_by_score(scores.clone()),
        }
    }

    pub fn is_learned(&self) -> bool {
        matches!(self, TaskRanker::Learned { .. })
    }

    pub fn models(&self) -> Vec<String> {
        match self {
            TaskRanker::Learned { models, .. } => models.iter().map(|m| m.model.clone()).collect(),
            TaskRanker::Frequency { scores } => scores.iter().map(|s| s.0.clone()).collect(),
        }
    }
}

/// Ranker inputs: every meta-feature, log-compressed.
fn ranker_inputs<F: Scalar>(mf: &MetaFeatureVector) -> Vec<F> {
    mf.values()
        .iter()
        .map(|&v| signed_log1p(F::of(v)))
        .collect()
}

/// Trains the one-vs-rest ensemble for `task`. Models below the occurrence
/// cutoff do not get a scorer but their records still serve as negatives.
pub fn train_model_ranker<F: Scalar>(
    corpus: &MetaCorpus,
    task: TaskKind,
    cfg: &TrainConfig,
) -> Result<TaskRanker<F>, PredictorError> {
    let mut rows: Vec<(Vec<F>, &str)> = corpus
        .records
        .iter()
        .filter(|r| r.task == task)
        .map(|r| (ranker_inputs(&r.meta_features), r.model.name.as_str()))
        .collect();
    rows.sort_by(|a, b| cmp_rows(&a.0, &b.0).then(a.1.cmp(b.1)));
    let mut models: Vec<&str> = rows
        .iter()
        .map(|r| r.1)
        .filter(|m| !corpus.is_excluded(m))
        .collect();
    models.sort_unstable();
    models.dedup();
    if models.len() < 2 {
        return Err(PredictorError::InsufficientModels {
            task,
            found: models.len(),
        });
    }

    let raw: Vec<Vec<F>> = rows.iter().map(|r| r.0.clone()).collect();
    let standardizer = Standardizer::fit(&raw);
    let x: Vec<Vec<F>> = raw.iter().map(|r| standardizer.apply(r)).collect();
    let scorers = models
        .iter()
        .map(|&m| {
            let y: Vec<bool> = rows.iter().map(|r| r.1 == m).collect();
            let logistic = fit_logistic(&x, &y, &cfg.linear);
            let svm = fit_linear_svm(&x, &y, &cfg.linear);
            let margins: Vec<F> = x.iter().map(|r| svm.decision(r)).collect();
            let platt = fit_platt(&margins, &y, cfg.linear.platt_iterations);
            ModelScorer {
                model: m.to_string(),
                logistic,
                svm,
                platt,
            }
        })
        .collect();
    Ok(TaskRanker::Learned {
        standardizer,
        models: scorers,
    })
}

/// Share of `task` records using each applicable taxonomy model.
pub fn frequency_ranker<F: Scalar>(corpus: &MetaCorpus, task: TaskKind) -> TaskRanker<F> {
    let records: Vec<_> = corpus.records.iter().filter(|r| r.task == task).collect();
    let total = records.len().max(1);
    let scores = corpus
        .taxonomy
        .models_for(task)
        .map(|m| {
            let c = records.iter().filter(|r| r.model.name == m).count();
            (m.to_string(), F::of_usize(c) / F::of_usize(total))
        })
        .collect();
    TaskRanker::Frequency {
        scores: order_by_score(scores),
    }
}
