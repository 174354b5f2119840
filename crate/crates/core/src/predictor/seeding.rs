//! Online use of a trained bundle: which FE components, on which columns,
//! with which models.

use serde::{Deserialize, Serialize};

use super::bundle::SkeletonPredictorBundle;
use super::tree::{CmpOp, Condition, DecisionTree};
use super::PredictorError;
use crate::meta_features::{
    column_feature_value, compute_meta_features, ColumnReading, MetaFeatureVector,
};
use crate::num::Scalar;
use crate::tabular::{Column, ColumnKind, Dataset, TaskKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FePrediction {
    pub label: String,
    pub prob: f64,
}

/// FE labels whose tree probability reaches `cutoff`, by descending
/// probability then name.
pub fn predict_fe(
    bundle: &SkeletonPredictorBundle,
    mf: &MetaFeatureVector,
    cutoff: f64,
) -> Vec<FePrediction> {
    let mut out: Vec<FePrediction> = bundle
        .fe_trees
        .iter()
        .map(|(label, tree)| FePrediction {
            label: label.clone(),
            prob: tree.predict_proba(mf),
        })
        .filter(|p| p.prob >= cutoff)
        .collect();
    out.sort_by(|a, b| {
        b.prob
            .total_cmp(&a.prob)
            .then_with(|| a.label.cmp(&b.label))
    });
    out
}

pub fn extract_decision_path<F: Scalar>(
    tree: &DecisionTree<F>,
    mf: &MetaFeatureVector,
) -> Result<Vec<Condition<F>>, PredictorError> {
    if tree.is_constant() {
        return Err(PredictorError::EmptyPath);
    }
    Ok(tree.decision_path(mf))
}

/// Whether one column satisfies one path condition.
///
/// Predicate features (presence/count over a column property) are read as
/// the property itself: a `GE` condition with a positive threshold asks for
/// columns that have it. `LT` conditions on predicates describe what the
/// dataset lacks and select nothing. Value features compare the column's
/// statistic with the threshold directly.
pub fn column_satisfies<F: Scalar>(col: &Column, cond: &Condition<F>) -> bool {
    let Some(v) = column_feature_value(col, cond.feature) else {
        return false;
    };
    match cond.feature.column_reading() {
        ColumnReading::Global => false,
        ColumnReading::Predicate => cond.op == CmpOp::GE && cond.threshold > F::zero() && v >= 0.5,
        ColumnReading::Value => cond.holds(F::of(v)),
    }
}

/// Feature columns satisfying at least one condition of `path`, in dataset
/// order.
pub fn infer_relevant_columns<F: Scalar>(path: &[Condition<F>], d: &Dataset) -> Vec<String> {
    d.features()
        .filter(|c| path.iter().any(|cond| column_satisfies(c, cond)))
        .map(|c| c.name.clone())
        .collect()
}

/// Column kinds an FE component can act on; `None` means any.
pub fn applicable_kinds(fe: &str) -> Option<&'static [ColumnKind]> {
    match fe {
        "OrdinalEncoder" | "OneHotEncoder" => {
            Some(&[ColumnKind::StringCategory, ColumnKind::NumberCategory])
        }
        "TextPreprocessor" | "TextVectorizer" => Some(&[ColumnKind::Text]),
        "DateFeaturization" => Some(&[ColumnKind::Date]),
        _ => None,
    }
}

/// Columns used when a path yields none.
pub fn fallback_columns(fe: &str, d: &Dataset) -> Vec<String> {
    let pick = |f: &dyn Fn(&Column) -> bool| {
        d.features()
            .filter(|c| f(c))
            .map(|c| c.name.clone())
            .collect()
    };
    match (fe, applicable_kinds(fe)) {
        ("Imputer", _) => pick(&|c| c.has_missing()),
        (_, Some(kinds)) => pick(&|c| kinds.contains(&c.kind)),
        (_, None) => pick(&|_| true),
    }
}

/// Path-inferred columns restricted to the kinds `fe` acts on, falling
/// back to [`fallback_columns`] when nothing remains.
pub fn relevant_columns<F: Scalar>(
    fe: &str,
    tree: &DecisionTree<F>,
    mf: &MetaFeatureVector,
    d: &Dataset,
) -> Vec<String> {
    let inferred = match extract_decision_path(tree, mf) {
        Ok(path) => infer_relevant_columns(&path, d),
        Err(_) => Vec::new(),
    };
    let kept: Vec<String> = match applicable_kinds(fe) {
        Some(kinds) => inferred
            .into_iter()
            .filter(|n| d.column(n).is_some_and(|c| kinds.contains(&c.kind)))
            .collect(),
        None => inferred,
    };
    if kept.is_empty() {
        fallback_columns(fe, d)
    } else {
        kept
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeComponent {
    pub label: String,
    pub prob: f64,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub fe: Vec<FeComponent>,
    pub model: String,
    pub model_score: f64,
    /// 1-based.
    pub model_rank: usize,
}

pub fn rank_models(
    bundle: &SkeletonPredictorBundle,
    mf: &MetaFeatureVector,
    task: TaskKind,
) -> Vec<(String, f64)> {
    bundle
        .ranker
        .for_task(task)
        .rank(mf)
        .into_iter()
        .filter(|(m, _)| {
            bundle
                .taxonomy
                .model_spec(m)
                .is_some_and(|s| s.supports(task))
        })
        .collect()
}

/// One skeleton per top-`k` model, all sharing the FE components.
pub fn generate_skeletons(fe: &[FeComponent], ranked: &[(String, f64)], k: usize) -> Vec<Skeleton> {
    if k > ranked.len() {
        log::warn!("requested {k} models but only {} are ranked", ranked.len());
    }
    ranked
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, (m, s))| Skeleton {
            fe: fe.to_vec(),
            model: m.clone(),
            model_score: *s,
            model_rank: i + 1,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedConfig {
    pub k: usize,
    pub fe_cutoff: f64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        SeedConfig {
            k: 3,
            fe_cutoff: 0.5,
        }
    }
}

/// Output of the seeding stage for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeding {
    pub meta_features: MetaFeatureVector,
    pub fe_predictions: Vec<FePrediction>,
    pub fe_components: Vec<FeComponent>,
    /// Predicted components dropped because no column qualified.
    pub dropped: Vec<String>,
    pub ranked_models: Vec<(String, f64)>,
    pub skeletons: Vec<Skeleton>,
}

/// Runs the whole seeding stage on a training dataset.
pub fn seed_pipelines(bundle: &SkeletonPredictorBundle, d: &Dataset, cfg: &SeedConfig) -> Seeding {
    let mf = compute_meta_features(d);
    let fe_predictions = predict_fe(bundle, &mf, cfg.fe_cutoff);
    let mut fe_components = Vec::new();
    let mut dropped = Vec::new();
    for p in &fe_predictions {
        let columns = relevant_columns(&p.label, &bundle.fe_trees[&p.label], &mf, d);
        if columns.is_empty() {
            log::warn!(
                "{} predicted ({:.2}) but no column qualifies; dropped",
                p.label,
                p.prob
            );
            dropped.push(p.label.clone());
        } else {
            fe_components.push(FeComponent {
                label: p.label.clone(),
                prob: p.prob,
                columns,
            });
        }
    }
    let ranked_models = rank_models(bundle, &mf, d.task);
    let skeletons = generate_skeletons(&fe_components, &ranked_models, cfg.k);
    Seeding {
        meta_features: mf,
        fe_predictions,
        fe_components,
        dropped,
        ranked_models,
        skeletons,
    }
}
