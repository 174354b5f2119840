use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::tabular::TaskKind;

const BUILTIN: &str = include_str!("../../assets/taxonomy.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComponentKind {
    #[serde(rename = "FE")]
    Fe,
    #[serde(rename = "MODEL")]
    Model,
}

/// Canonical component label such as `FE:Imputer` or `MODEL:CatBoost`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentLabel {
    pub kind: ComponentKind,
    pub name: String,
}

impl ComponentLabel {
    pub fn fe(name: impl Into<String>) -> Self {
        Self {
            kind: ComponentKind::Fe,
            name: name.into(),
        }
    }

    pub fn model(name: impl Into<String>) -> Self {
        Self {
            kind: ComponentKind::Model,
            name: name.into(),
        }
    }
}

impl fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ComponentKind::Fe => write!(f, "FE:{}", self.name),
            ComponentKind::Model => write!(f, "MODEL:{}", self.name),
        }
    }
}

/// Where an FE component sits relative to the target-detach step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    PreDetach,
    PostDetach,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeSpec {
    pub name: String,
    pub stage: Stage,
    /// Position in the default ordering; used to break ties.
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub classification: bool,
    pub regression: bool,
}

impl ModelSpec {
    pub fn supports(&self, task: TaskKind) -> bool {
        match task {
            TaskKind::Classification => self.classification,
            TaskKind::Regression => self.regression,
        }
    }
}

/// Component vocabulary: canonical labels, raw API aliases, model applicability
/// and FE stage placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub version: String,
    pub fe: Vec<FeSpec>,
    pub models: Vec<ModelSpec>,
    /// Raw API name to `FE:<name>` / `MODEL:<name>`.
    pub aliases: BTreeMap<String, String>,
}

impl Taxonomy {
    /// The taxonomy shipped with the crate.
    pub fn builtin() -> Taxonomy {
        Taxonomy::from_json(BUILTIN).expect("bundled taxonomy is valid")
    }

    pub fn from_json(s: &str) -> Result<Taxonomy, CorpusError> {
        let t: Taxonomy = serde_json::from_str(s).map_err(|e| CorpusError::Asset(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), CorpusError> {
        for (raw, target) in &self.aliases {
            let ok = match parse_prefixed(target) {
                Some((ComponentKind::Fe, name)) => self.fe_spec(name).is_some(),
                Some((ComponentKind::Model, name)) => self.model_spec(name).is_some(),
                None => false,
            };
            if !ok {
                return Err(CorpusError::Asset(format!(
                    "alias `{raw}` maps to unknown label `{target}`"
                )));
            }
        }
        Ok(())
    }

    pub fn fe_spec(&self, name: &str) -> Option<&FeSpec> {
        self.fe.iter().find(|f| f.name == name)
    }

    pub fn model_spec(&self, name: &str) -> Option<&ModelSpec> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn fe_names(&self) -> impl Iterator<Item = &str> {
        self.fe.iter().map(|f| f.name.as_str())
    }

    /// Models applicable to `task`, in taxonomy order.
    pub fn models_for(&self, task: TaskKind) -> impl Iterator<Item = &str> {
        self.models
            .iter()
            .filter(move |m| m.supports(task))
            .map(|m| m.name.as_str())
    }

    pub fn stage(&self, fe: &str) -> Option<Stage> {
        self.fe_spec(fe).map(|f| f.stage)
    }

    pub fn priority(&self, fe: &str) -> u32 {
        self.fe_spec(fe).map(|f| f.priority).unwrap_or(u32::MAX)
    }

    /// Maps a raw API name (or a canonical name, optionally prefixed with
    /// `FE:`/`MODEL:`) to its canonical label.
    pub fn canonicalize(&self, api_name: &str) -> Result<ComponentLabel, CorpusError> {
        let unknown = || CorpusError::UnknownLabel {
            line: None,
            name: api_name.to_string(),
        };
        let (kind_hint, bare) = match parse_prefixed(api_name) {
            Some((k, rest)) => (Some(k), rest),
            None => (None, api_name),
        };
        let label = if self.fe_spec(bare).is_some() {
            ComponentLabel::fe(bare)
        } else if self.model_spec(bare).is_some() {
            ComponentLabel::model(bare)
        } else if let Some(target) = self.aliases.get(bare) {
            let (kind, name) = parse_prefixed(target).ok_or_else(unknown)?;
            ComponentLabel {
                kind,
                name: name.to_string(),
            }
        } else {
            return Err(unknown());
        };
        match kind_hint {
            Some(k) if k != label.kind => Err(unknown()),
            _ => Ok(label),
        }
    }
}

fn parse_prefixed(s: &str) -> Option<(ComponentKind, &str)> {
    if let Some(rest) = s.strip_prefix("FE:") {
        Some((ComponentKind::Fe, rest))
    } else {
        s.strip_prefix("MODEL:")
            .map(|rest| (ComponentKind::Model, rest))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_matches_meta_target_table() {
        let t = Taxonomy::builtin();
        assert_eq!(t.fe.len(), 9);
        assert_eq!(t.models_for(TaskKind::Classification).count(), 15);
        assert_eq!(t.models_for(TaskKind::Regression).count(), 14);
        assert!(!t.model_spec("Lasso").unwrap().classification);
        assert!(!t.model_spec("MultinomialNB").unwrap().regression);
        assert!(!t.model_spec("GaussianNB").unwrap().regression);
        assert_eq!(t.stage("Imputer"), Some(Stage::PreDetach));
        assert_eq!(t.stage("DataBalancer"), Some(Stage::PostDetach));
    }

    #[test]
    fn aliases_canonicalize() {
        let t = Taxonomy::builtin();
        for raw in [
            "fillna",
            "interpolate",
            "SimpleImputer",
            "KNNImputer",
            "FE:fillna",
            "Imputer",
        ] {
            assert_eq!(
                t.canonicalize(raw).unwrap(),
                ComponentLabel::fe("Imputer"),
                "{raw}"
            );
        }
        assert_eq!(
            t.canonicalize("CatBoostClassifier").unwrap(),
            ComponentLabel::model("CatBoost")
        );
        assert_eq!(
            t.canonicalize("MODEL:CatBoost").unwrap().to_string(),
            "MODEL:CatBoost"
        );
        assert!(matches!(
            t.canonicalize("made_up_api"),
            Err(CorpusError::UnknownLabel { name, .. }) if name == "made_up_api"
        ));
        assert!(t.canonicalize("MODEL:fillna").is_err());
    }

    #[test]
    fn rejects_dangling_alias() {
        let mut t = Taxonomy::builtin();
        t.aliases.insert("foo".into(), "FE:Nope".into());
        let s = serde_json::to_string(&t).unwrap();
        assert!(matches!(
            Taxonomy::from_json(&s),
            Err(CorpusError::Asset(_))
        ));
    }
}
