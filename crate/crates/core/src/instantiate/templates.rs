//! Versioned library of code snippets with named holes.
//!
//! A pack is a directory holding `manifest.json` plus one text file per
//! snippet. Holes are written `{NAME}` with `NAME` in upper snake case; every
//! hole in a body must be declared in the manifest and vice versa.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::InstantiationError;
use crate::tabular::TaskKind;

macro_rules! embedded {
    ($($file:literal),* $(,)?) => {
        &[$(($file, include_str!(concat!("../../templates/v1/", $file)))),*]
    };
}

const BUILTIN_V1: &[(&str, &str)] = embedded!(
    "manifest.json",
    "load.py",
    "imputer_numeric.py",
    "imputer_string.py",
    "ordinal_encoder.py",
    "one_hot_encoder.py",
    "text_preprocessor.py",
    "text_vectorizer.py",
    "date_featurization.py",
    "detach.py",
    "log_scaler.py",
    "linear_scaler.py",
    "data_balancer.py",
    "model.py",
    "evaluation.py",
);

/// Labels of the non-component sections every pack must provide.
pub const LOAD: &str = "LOAD";
pub const DETACH: &str = "DETACH";
pub const MODEL: &str = "MODEL";
pub const EVALUATION: &str = "EVALUATION";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Default,
    NumericColumns,
    StringColumns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemplateStage {
    PreDetach,
    PostDetach,
    Model,
    /// Fixed scaffolding: loading, target detach, evaluation.
    Frame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnippetTemplate {
    pub label: String,
    pub variant: Variant,
    pub stage: TemplateStage,
    pub holes: Vec<String>,
    pub body: String,
}

/// Import location of a model class for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBinding {
    pub module: String,
    pub class: String,
    /// Used when `module` cannot be imported.
    pub fallback_module: Option<String>,
    pub fallback_class: Option<String>,
    #[serde(default)]
    pub defaults: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelTemplates {
    pub classification: Option<ModelBinding>,
    pub regression: Option<ModelBinding>,
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    label: String,
    variant: Variant,
    stage: TemplateStage,
    holes: Vec<String>,
    file: String,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    version: String,
    snippets: Vec<ManifestEntry>,
    metrics: BTreeMap<String, String>,
    models: BTreeMap<String, ModelTemplates>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplatePack {
    pub version: String,
    pub snippets: Vec<SnippetTemplate>,
    /// Metric name to expression over `__target_test` and `__y_pred`.
    pub metrics: BTreeMap<String, String>,
    pub models: BTreeMap<String, ModelTemplates>,
}

/// Hole names used in `body`, in order of first appearance.
pub fn holes_in(body: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut rest = body;
    while let Some(start) = rest.find('{') {
        rest = &rest[start + 1..];
        let Some(end) = rest.find('}') else { break };
        let name = &rest[..end];
        if !name.is_empty()
            && name.chars().all(|c| c.is_ascii_uppercase() || c == '_')
            && !out.iter().any(|h| h == name)
        {
            out.push(name.to_string());
        }
    }
    out
}

/// Replaces each `{NAME}` by its value. Every hole must be given.
pub fn fill(body: &str, values: &[(&str, &str)]) -> String {
    let mut s = body.to_string();
    for (name, value) in values {
        s = s.replace(&format!("{{{name}}}"), value);
    }
    s
}

impl TemplatePack {
    /// Pack v1, compiled into the binary.
    pub fn builtin() -> TemplatePack {
        let files: BTreeMap<&str, &str> = BUILTIN_V1.iter().copied().collect();
        TemplatePack::from_files(|name| files.get(name).map(|s| s.to_string()))
            .expect("bundled template pack is valid")
    }

    pub fn load_dir(dir: &Path) -> Result<TemplatePack, InstantiationError> {
        TemplatePack::from_files(|name| std::fs::read_to_string(dir.join(name)).ok())
    }

    fn from_files(
        read: impl Fn(&str) -> Option<String>,
    ) -> Result<TemplatePack, InstantiationError> {
        let bad = |m: String| InstantiationError::TemplatePack(m);
        let manifest_text =
            read("manifest.json").ok_or_else(|| bad("manifest.json not found".into()))?;
        let manifest: Manifest =
            serde_json::from_str(&manifest_text).map_err(|e| bad(e.to_string()))?;
        let mut snippets = Vec::new();
        let mut seen = BTreeSet::new();
        for e in manifest.snippets {
            let body = read(&e.file).ok_or_else(|| bad(format!("{} not found", e.file)))?;
            let declared: BTreeSet<&str> = e.holes.iter().map(String::as_str).collect();
            let found = holes_in(&body);
            let used: BTreeSet<&str> = found.iter().map(String::as_str).collect();
            if declared != used {
                return Err(bad(format!(
                    "{}: declared holes {declared:?} but body uses {used:?}",
                    e.file
                )));
            }
            if !seen.insert((e.label.clone(), e.variant)) {
                return Err(bad(format!(
                    "duplicate snippet {} {:?}",
                    e.label, e.variant
                )));
            }
            snippets.push(SnippetTemplate {
                label: e.label,
                variant: e.variant,
                stage: e.stage,
                holes: e.holes,
                body,
            });
        }
        let pack = TemplatePack {
            version: manifest.version,
            snippets,
            metrics: manifest.metrics,
            models: manifest.models,
        };
        for frame in [LOAD, DETACH, MODEL, EVALUATION] {
            if pack.snippet(frame, Variant::Default).is_none() {
                return Err(bad(format!("missing {frame} snippet")));
            }
        }
        Ok(pack)
    }

    pub fn snippet(&self, label: &str, variant: Variant) -> Option<&SnippetTemplate> {
        self.snippets
            .iter()
            .find(|s| s.label == label && s.variant == variant)
    }

    pub fn has_variant(&self, label: &str, variant: Variant) -> bool {
        self.snippet(label, variant).is_some()
    }

    pub fn model_binding(&self, model: &str, task: TaskKind) -> Option<&ModelBinding> {
        let m = self.models.get(model)?;
        match task {
            TaskKind::Classification => m.classification.as_ref(),
            TaskKind::Regression => m.regression.as_ref(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Taxonomy;

    #[test]
    fn builtin_covers_taxonomy() {
        let pack = TemplatePack::builtin();
        assert_eq!(pack.version, "1");
        let tax = Taxonomy::builtin();
        for fe in tax.fe_names() {
            let label = format!("FE:{fe}");
            assert!(
                pack.has_variant(&label, Variant::Default)
                    || pack.has_variant(&label, Variant::NumericColumns),
                "{fe}"
            );
        }
        for m in &tax.models {
            for task in [TaskKind::Classification, TaskKind::Regression] {
                assert_eq!(
                    pack.model_binding(&m.name, task).is_some(),
                    m.supports(task),
                    "{} {task}",
                    m.name
                );
            }
        }
        for metric in ["macro_f1", "r2", "accuracy"] {
            assert!(pack.metrics.contains_key(metric));
        }
    }

    #[test]
    fn hole_scanning() {
        assert_eq!(
            holes_in("x = {COLUMNS}\nd = {'a': 1}\n{TARGET}{COLUMNS}"),
            ["COLUMNS", "TARGET"]
        );
        assert_eq!(
            fill("a={A} b={B} a={A}", &[("A", "1"), ("B", "2")]),
            "a=1 b=2 a=1"
        );
    }

    #[test]
    fn directory_pack_checks_holes() {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in BUILTIN_V1 {
            std::fs::write(dir.path().join(name), body).unwrap();
        }
        assert_eq!(
            TemplatePack::load_dir(dir.path()).unwrap(),
            TemplatePack::builtin()
        );
        std::fs::write(
            dir.path().join("log_scaler.py"),
            "x = {COLUMNS} + {UNDECLARED}\n",
        )
        .unwrap();
        assert!(matches!(
            TemplatePack::load_dir(dir.path()),
            Err(InstantiationError::TemplatePack(_))
        ));
    }
}
