//! Meta-learning corpus of abstract pipelines.
//!
//! A corpus is a JSON-Lines file; each line holds the meta-features of one
//! dataset and the component labels of one pipeline written for it:
//!
//! ```text
//! {"dataset_id":"titanic","task":"C","meta_features":{...38 keys...},
//!  "fe_sequence":["SimpleImputer","LabelEncoder"],"model":"RandomForestClassifier"}
//! ```
//!
//! Raw API names are canonicalized through the [`Taxonomy`] on load.

mod dag;
mod synthetic;
mod taxonomy;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::meta_features::MetaFeatureVector;
use crate::tabular::TaskKind;

pub use dag::{mine_order_dag, DagEdge, OrderDag, MODEL_NODE};
pub use synthetic::{
    generate_synthetic_corpus, planted_best_model, sample_meta_vector, SyntheticRecord,
};
pub use taxonomy::{ComponentKind, ComponentLabel, FeSpec, ModelSpec, Stage, Taxonomy};

/// Components seen fewer times than this are not used as meta-targets.
pub const MIN_OCCURRENCES: usize = 5;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("{}unknown component label `{name}`", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    UnknownLabel { line: Option<usize>, name: String },
    #[error("line {line}: model `{model}` is not applicable to {task}")]
    ApplicabilityMismatch {
        line: usize,
        model: String,
        task: TaskKind,
    },
    #[error("invalid asset: {0}")]
    Asset(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One pipeline reduced to its component labels.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractPipeline {
    pub dataset_id: String,
    pub task: TaskKind,
    pub meta_features: MetaFeatureVector,
    pub fe_sequence: Vec<ComponentLabel>,
    pub model: ComponentLabel,
}

impl AbstractPipeline {
    pub fn has_fe(&self, name: &str) -> bool {
        self.fe_sequence.iter().any(|l| l.name == name)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    dataset_id: String,
    task: String,
    meta_features: MetaFeatureVector,
    fe_sequence: Vec<String>,
    model: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaCorpus {
    pub records: Vec<AbstractPipeline>,
    pub taxonomy: Taxonomy,
    /// Component names below [`MIN_OCCURRENCES`].
    pub excluded: BTreeSet<String>,
}

impl MetaCorpus {
    pub fn new(records: Vec<AbstractPipeline>, taxonomy: Taxonomy) -> Self {
        let mut c = MetaCorpus {
            records,
            taxonomy,
            excluded: BTreeSet::new(),
        };
        c.excluded = c
            .frequencies()
            .into_iter()
            .filter(|(_, n)| *n < MIN_OCCURRENCES)
            .map(|(name, _)| name)
            .collect();
        c
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Occurrence count of every component name (FE and model) in the corpus.
    pub fn frequencies(&self) -> BTreeMap<String, usize> {
        let mut f = BTreeMap::new();
        for r in &self.records {
            for l in r.fe_sequence.iter().chain(std::iter::once(&r.model)) {
                *f.entry(l.name.clone()).or_insert(0) += 1;
            }
        }
        f
    }

    pub fn is_excluded(&self, name: &str) -> bool {
        self.excluded.contains(name)
    }

    /// Serializes to JSON-Lines using canonical names.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let raw = RawRecord {
                dataset_id: r.dataset_id.clone(),
                task: r.task.code().to_string(),
                meta_features: r.meta_features,
                fe_sequence: r.fe_sequence.iter().map(|l| l.name.clone()).collect(),
                model: r.model.name.clone(),
            };
            out.push_str(&serde_json::to_string(&raw).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical JSON-Lines form.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }

    pub fn write(&self, path: &Path) -> Result<(), CorpusError> {
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }
}

/// Parses a corpus from JSON-Lines text. Blank lines are skipped.
pub fn parse_corpus_str(text: &str, taxonomy: &Taxonomy) -> Result<MetaCorpus, CorpusError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| CorpusError::Schema {
            line: line_no,
            message: e.to_string(),
        })?;
        let task = TaskKind::from_code(&raw.task).ok_or_else(|| CorpusError::Schema {
            line: line_no,
            message: format!("task must be \"C\" or \"R\", got {:?}", raw.task),
        })?;
        let with_line = |e: CorpusError| match e {
            CorpusError::UnknownLabel { name, .. } => CorpusError::UnknownLabel {
                line: Some(line_no),
                name,
            },
            other => other,
        };
        let mut fe_sequence = Vec::with_capacity(raw.fe_sequence.len());
        for name in &raw.fe_sequence {
            let label = taxonomy.canonicalize(name).map_err(with_line)?;
            if label.kind != ComponentKind::Fe {
                return Err(CorpusError::Schema {
                    line: line_no,
                    message: format!("`{name}` is a model, not an FE component"),
                });
            }
            if fe_sequence.contains(&label) {
                return Err(CorpusError::Schema {
                    line: line_no,
                    message: format!("duplicate FE component {label}"),
                });
            }
            fe_sequence.push(label);
        }
        let model = taxonomy.canonicalize(&raw.model).map_err(with_line)?;
        if model.kind != ComponentKind::Model {
            return Err(CorpusError::Schema {
                line: line_no,
                message: format!("`{}` is not a model", raw.model),
            });
        }
        let spec = taxonomy
            .model_spec(&model.name)
            .expect("canonical model has a spec");
        if !spec.supports(task) {
            return Err(CorpusError::ApplicabilityMismatch {
                line: line_no,
                model: model.name,
                task,
            });
        }
        records.push(AbstractPipeline {
            dataset_id: raw.dataset_id,
            task,
            meta_features: raw.meta_features,
            fe_sequence,
            model,
        });
    }
    if records.is_empty() {
        log::warn!("corpus is empty");
    }
    let corpus = MetaCorpus::new(records, taxonomy.clone());
    if !corpus.excluded.is_empty() {
        log::info!(
            "components seen fewer than {MIN_OCCURRENCES} times are not meta-targets: {:?}",
            corpus.excluded
        );
    }
    Ok(corpus)
}

pub fn parse_corpus(path: &Path, taxonomy: &Taxonomy) -> Result<MetaCorpus, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    parse_corpus_str(&text, taxonomy)
}

/// Hyperparameter sets per model, tried in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperparamCatalog {
    pub sets: BTreeMap<String, Vec<BTreeMap<String, serde_json::Value>>>,
}

impl HyperparamCatalog {
    pub fn builtin() -> Self {
        Self::from_json(include_str!("../../assets/hyperparams.json"))
            .expect("bundled catalog is valid")
    }

    pub fn from_json(s: &str) -> Result<Self, CorpusError> {
        serde_json::from_str(s).map_err(|e| CorpusError::Asset(e.to_string()))
    }

    /// Sets for `model`; a single empty set when the model has none listed.
    pub fn sets_for(&self, model: &str) -> Vec<BTreeMap<String, serde_json::Value>> {
        match self.sets.get(model) {
            Some(v) if !v.is_empty() => v.clone(),
            _ => vec![BTreeMap::new()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta_features::MetaFeatureName;

    fn line(task: &str, fe: &[&str], model: &str) -> String {
        let mf = serde_json::to_string(&MetaFeatureVector::default()).unwrap();
        format!(
            r#"{{"dataset_id":"d","task":"{task}","meta_features":{mf},"fe_sequence":{},"model":"{model}"}}"#,
            serde_json::to_string(fe).unwrap()
        )
    }

    #[test]
    fn accepts_known_components() {
        let t = Taxonomy::builtin();
        let c =
            parse_corpus_str(&line("C", &["Imputer", "OrdinalEncoder"], "CatBoost"), &t).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(
            c.records[0].fe_sequence,
            vec![
                ComponentLabel::fe("Imputer"),
                ComponentLabel::fe("OrdinalEncoder")
            ]
        );
        assert!(c.is_excluded("CatBoost"));
    }

    #[test]
    fn canonicalizes_aliases() {
        let t = Taxonomy::builtin();
        let c = parse_corpus_str(
            &line("R", &["fillna", "StandardScaler"], "XGBRegressor"),
            &t,
        )
        .unwrap();
        assert_eq!(c.records[0].fe_sequence[1].name, "LinearScaler");
        assert_eq!(c.records[0].model.name, "XGBoost");
    }

    #[test]
    fn rejects_bad_records() {
        let t = Taxonomy::builtin();
        let text = format!(
            "{}\n{}",
            line("C", &[], "CatBoost"),
            line("C", &[], "Lasso")
        );
        assert!(matches!(
            parse_corpus_str(&text, &t),
            Err(CorpusError::ApplicabilityMismatch { line: 2, ref model, .. }) if model == "Lasso"
        ));
        assert!(matches!(
            parse_corpus_str(&line("C", &["made_up_api"], "CatBoost"), &t),
            Err(CorpusError::UnknownLabel { line: Some(1), .. })
        ));
        assert!(matches!(
            parse_corpus_str(&line("X", &[], "CatBoost"), &t),
            Err(CorpusError::Schema { line: 1, .. })
        ));
        assert!(matches!(
            parse_corpus_str(&line("C", &["Imputer", "fillna"], "CatBoost"), &t),
            Err(CorpusError::Schema { line: 1, .. })
        ));
        let missing_key = line("C", &[], "CatBoost").replace("\"corr_max\":0.0,", "");
        assert!(matches!(
            parse_corpus_str(&missing_key, &t),
            Err(CorpusError::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn empty_corpus() {
        let c = parse_corpus_str("", &Taxonomy::builtin()).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn round_trip_through_jsonl() {
        let c = generate_synthetic_corpus(3, 60, &Taxonomy::builtin());
        let back = parse_corpus_str(&c.to_jsonl(), &Taxonomy::builtin()).unwrap();
        assert_eq!(back, c);
        assert_eq!(
            back.records[7].meta_features[MetaFeatureName::NRows],
            c.records[7].meta_features[MetaFeatureName::NRows]
        );
    }

    #[test]
    fn catalog_defaults() {
        let cat = HyperparamCatalog::builtin();
        let t = Taxonomy::builtin();
        for m in &t.models {
            assert_eq!(cat.sets_for(&m.name).len(), 1);
        }
        assert_eq!(cat.sets_for("Unlisted"), vec![BTreeMap::new()]);
    }
}
