//! Template-based emission of candidate scripts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::order::{order_components, OrderedSkeleton};
use super::templates::{
    fill, TemplatePack, TemplateStage, Variant, DETACH, EVALUATION, LOAD, MODEL,
};
use super::InstantiationError;
use crate::corpus::{HyperparamCatalog, OrderDag, Stage, Taxonomy};
use crate::predictor::{FeComponent, Skeleton};
use crate::tabular::{Schema, TaskKind};

/// Marker prefixing the score line every script prints last.
pub const RESULT_MARKER: &str = "RESULT:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MacroF1,
    R2,
    Accuracy,
}

impl Metric {
    pub fn default_for(task: TaskKind) -> Metric {
        match task {
            TaskKind::Classification => Metric::MacroF1,
            TaskKind::Regression => Metric::R2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::MacroF1 => "macro_f1",
            Metric::R2 => "r2",
            Metric::Accuracy => "accuracy",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "macro_f1" => Ok(Metric::MacroF1),
            "r2" => Ok(Metric::R2),
            "accuracy" => Ok(Metric::Accuracy),
            _ => Err(format!(
                "unknown metric `{s}` (expected macro_f1, r2 or accuracy)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePipeline {
    pub script_id: String,
    pub source: String,
    pub skeleton: OrderedSkeleton,
    pub model_rank: usize,
    pub hp_index: usize,
    pub hyperparams: BTreeMap<String, Value>,
    pub template_version: String,
}

impl CandidatePipeline {
    pub fn source_sha256(&self) -> String {
        hex::encode(Sha256::digest(self.source.as_bytes()))
    }

    pub fn file_name(&self) -> String {
        format!("{}.py", self.script_id)
    }
}

/// Python literal for a JSON value.
pub fn python_literal(v: &Value) -> String {
    match v {
        Value::Null => "None".into(),
        Value::Bool(true) => "True".into(),
        Value::Bool(false) => "False".into(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => Value::String(s.clone()).to_string(),
        Value::Array(a) => format!(
            "[{}]",
            a.iter().map(python_literal).collect::<Vec<_>>().join(", ")
        ),
        Value::Object(o) => format!(
            "{{{}}}",
            o.iter()
                .map(|(k, v)| format!("{}: {}", Value::String(k.clone()), python_literal(v)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

fn kwargs(hp: &BTreeMap<String, Value>) -> String {
    hp.iter()
        .map(|(k, v)| format!("{k}={}", python_literal(v)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn string_list(names: &[String]) -> String {
    serde_json::to_string(names).expect("strings serialize")
}

struct Block {
    title: String,
    body: String,
}

fn fe_blocks(
    c: &FeComponent,
    schema: &Schema,
    pack: &TemplatePack,
) -> Result<Vec<(Variant, Vec<String>, String)>, InstantiationError> {
    for col in &c.columns {
        if schema.column(col).is_none() || schema.target_names.contains(col) {
            return Err(InstantiationError::UnknownColumn {
                component: c.label.clone(),
                column: col.clone(),
            });
        }
    }
    let label = format!("FE:{}", c.label);
    let split = pack.has_variant(&label, Variant::NumericColumns)
        || pack.has_variant(&label, Variant::StringColumns);
    let parts: Vec<(Variant, Vec<String>)> = if split {
        let (numeric, other): (Vec<String>, Vec<String>) = c
            .columns
            .iter()
            .cloned()
            .partition(|n| schema.column(n).is_some_and(|s| s.kind.is_numeric()));
        [
            (Variant::NumericColumns, numeric),
            (Variant::StringColumns, other),
        ]
        .into_iter()
        .filter(|(_, cols)| !cols.is_empty())
        .collect()
    } else {
        vec![(Variant::Default, c.columns.clone())]
    };
    let mut out = Vec::new();
    for (variant, cols) in parts {
        let t = pack
            .snippet(&label, variant)
            .ok_or_else(|| InstantiationError::MissingTemplate(format!("{label} {variant:?}")))?;
        if t.holes.iter().any(|h| h == "COLUMNS") && cols.is_empty() {
            return Err(InstantiationError::EmptyColumnHole(c.label.clone()));
        }
        out.push((
            variant,
            cols.clone(),
            fill(&t.body, &[("COLUMNS", &string_list(&cols))]),
        ));
    }
    if out.is_empty() {
        return Err(InstantiationError::EmptyColumnHole(c.label.clone()));
    }
    Ok(out)
}

fn variant_suffix(v: Variant) -> &'static str {
    match v {
        Variant::Default => "",
        Variant::NumericColumns => " (numeric columns)",
        Variant::StringColumns => " (string columns)",
    }
}

/// Emits the script for one ordered skeleton and hyperparameter set.
pub fn instantiate_pipeline(
    os: &OrderedSkeleton,
    hp_index: usize,
    hp: &BTreeMap<String, Value>,
    schema: &Schema,
    taxonomy: &Taxonomy,
    pack: &TemplatePack,
    metric: Metric,
) -> Result<CandidatePipeline, InstantiationError> {
    let frame = |label: &str| {
        pack.snippet(label, Variant::Default)
            .expect("pack validated on load")
    };
    let binding = pack.model_binding(&os.model, schema.task).ok_or_else(|| {
        InstantiationError::MissingTemplate(format!("MODEL:{} for {}", os.model, schema.task))
    })?;
    let metric_expr = pack
        .metrics
        .get(metric.name())
        .ok_or_else(|| InstantiationError::MissingTemplate(format!("metric {metric}")))?;
    let mut params = binding.defaults.clone();
    params.extend(hp.iter().map(|(k, v)| (k.clone(), v.clone())));

    let mut pre = Vec::new();
    let mut post = Vec::new();
    for c in &os.fe_ordered {
        for (variant, _, body) in fe_blocks(c, schema, pack)? {
            let stage = pack
                .snippet(&format!("FE:{}", c.label), variant)
                .map(|t| t.stage);
            let is_post = match stage {
                Some(TemplateStage::PostDetach) => true,
                Some(TemplateStage::PreDetach) => false,
                _ => taxonomy.stage(&c.label) == Some(Stage::PostDetach),
            };
            let block = (format!("{}{}", c.label, variant_suffix(variant)), body);
            if is_post {
                post.push(block);
            } else {
                pre.push(block);
            }
        }
    }

    let script_id = format!("c{:02}_h{:02}_{}", os.model_rank, hp_index, os.model);
    let mut blocks = vec![Block {
        title: "LOAD DATA".into(),
        body: frame(LOAD).body.clone(),
    }];
    let n_pre = pre.len();
    for (i, (title, body)) in pre.into_iter().enumerate() {
        blocks.push(Block {
            title: format!("FE TRANSFORM {}: {title}", i + 1),
            body,
        });
    }
    blocks.push(Block {
        title: "DETACH TARGET".into(),
        body: fill(
            &frame(DETACH).body,
            &[("TARGET", &string_list(&schema.target_names))],
        ),
    });
    for (i, (title, body)) in post.into_iter().enumerate() {
        blocks.push(Block {
            title: format!("FE TRANSFORM {}: {title}", n_pre + i + 1),
            body,
        });
    }
    let fallback_module = binding
        .fallback_module
        .as_deref()
        .unwrap_or(&binding.module);
    let fallback_class = binding.fallback_class.as_deref().unwrap_or(&binding.class);
    blocks.push(Block {
        title: format!("MODEL: {}", os.model),
        body: fill(
            &frame(MODEL).body,
            &[
                ("MODEL_MODULE", &binding.module),
                ("MODEL_CLASS", &binding.class),
                ("FALLBACK_MODULE", fallback_module),
                ("FALLBACK_CLASS", fallback_class),
                ("HYPERPARAMS", &kwargs(&params)),
            ],
        ),
    });
    blocks.push(Block {
        title: "EVALUATION".into(),
        body: fill(&frame(EVALUATION).body, &[("METRIC", metric_expr)]),
    });

    let mut source = format!(
        "# {script_id} (template pack v{}, metric {metric})\n",
        pack.version
    );
    for b in blocks {
        source.push_str(&format!("\n# {}\n", b.title));
        source.push_str(&b.body);
        if !b.body.ends_with('\n') {
            source.push('\n');
        }
    }
    Ok(CandidatePipeline {
        script_id,
        source,
        skeleton: os.clone(),
        model_rank: os.model_rank,
        hp_index,
        hyperparams: hp.clone(),
        template_version: pack.version.clone(),
    })
}

/// Inputs shared by every candidate of one synthesis run.
pub struct InstantiationContext<'a> {
    pub order_dag: &'a OrderDag,
    pub taxonomy: &'a Taxonomy,
    pub templates: &'a TemplatePack,
    pub catalog: &'a HyperparamCatalog,
    pub schema: &'a Schema,
    pub metric: Metric,
    pub frequencies: &'a BTreeMap<String, usize>,
}

/// One candidate per skeleton and hyperparameter set, ordered by model rank
/// then hyperparameter index.
pub fn build_candidates(
    skeletons: &[Skeleton],
    ctx: &InstantiationContext<'_>,
) -> Result<Vec<CandidatePipeline>, InstantiationError> {
    if skeletons.is_empty() {
        return Err(InstantiationError::NoSkeletons);
    }
    let mut sorted: Vec<&Skeleton> = skeletons.iter().collect();
    sorted.sort_by_key(|s| s.model_rank);
    let freq = |n: &str| ctx.frequencies.get(n).copied().unwrap_or(0);
    let mut out = Vec::new();
    for s in sorted {
        let os = order_components(
            &s.fe,
            &s.model,
            s.model_rank,
            ctx.order_dag,
            ctx.taxonomy,
            freq,
        )?;
        for (i, hp) in ctx.catalog.sets_for(&s.model).iter().enumerate() {
            out.push(instantiate_pipeline(
                &os,
                i,
                hp,
                ctx.schema,
                ctx.taxonomy,
                ctx.templates,
                ctx.metric,
            )?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateManifestEntry {
    pub script_id: String,
    pub file: String,
    pub model: String,
    pub model_rank: usize,
    pub hp_index: usize,
    pub hyperparams: BTreeMap<String, Value>,
    pub components: Vec<FeComponent>,
    pub removed: Vec<String>,
    pub sha256: String,
}

/// Writes one script per candidate plus `manifest.json` into `dir`.
pub fn write_candidates(dir: &Path, cands: &[CandidatePipeline]) -> Result<(), InstantiationError> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = Vec::new();
    for c in cands {
        std::fs::write(dir.join(c.file_name()), &c.source)?;
        manifest.push(CandidateManifestEntry {
            script_id: c.script_id.clone(),
            file: c.file_name(),
            model: c.skeleton.model.clone(),
            model_rank: c.model_rank,
            hp_index: c.hp_index,
            hyperparams: c.hyperparams.clone(),
            components: c.skeleton.fe_ordered.clone(),
            removed: c.skeleton.removed.clone(),
            sha256: c.source_sha256(),
        });
    }
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

/// What a static read of an emitted script finds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScriptScan {
    /// Lines containing the result marker.
    pub result_lines: usize,
    /// Section comment titles in order.
    pub sections: Vec<String>,
    /// Component labels of the FE TRANSFORM sections, in order.
    pub fe_labels: Vec<String>,
    /// Names in `_NAME = [...]` string-list literals.
    pub column_literals: Vec<String>,
}

pub fn scan_script(source: &str) -> ScriptScan {
    let mut scan = ScriptScan::default();
    for line in source.lines() {
        if line.contains(RESULT_MARKER) {
            scan.result_lines += 1;
        }
        if let Some(title) = line.strip_prefix("# ") {
            let known = ["LOAD DATA", "DETACH TARGET", "EVALUATION"].contains(&title)
                || title.starts_with("FE TRANSFORM ")
                || title.starts_with("MODEL: ");
            if known {
                scan.sections.push(title.to_string());
            }
            if let Some(rest) = title.strip_prefix("FE TRANSFORM ") {
                if let Some((_, label)) = rest.split_once(": ") {
                    let label = label.split(" (").next().unwrap_or(label);
                    if scan.fe_labels.last().map(String::as_str) != Some(label) {
                        scan.fe_labels.push(label.to_string());
                    }
                }
            }
        }
        if let Some((lhs, rhs)) = line.split_once(" = ") {
            if lhs.starts_with('_')
                && !lhs.starts_with("__")
                && lhs
                    .chars()
                    .skip(1)
                    .all(|c| c.is_ascii_uppercase() || c == '_')
            {
                if let Ok(names) = serde_json::from_str::<Vec<String>>(rhs) {
                    scan.column_literals.extend(names);
                }
            }
        }
    }
    scan
}
