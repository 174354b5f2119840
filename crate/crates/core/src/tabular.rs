//! CSV ingestion, column kind inference and deterministic row splitting.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: file is empty or has no data rows")]
    EmptyFile { path: String },
    #[error("target column `{0}` not found in header")]
    MissingTarget(String),
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("regression requires a numeric target, `{0}` is not numeric")]
    NonNumericTarget(String),
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Kind of a column, decided once at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    NumberCategory,
    StringCategory,
    Text,
    Date,
}

impl ColumnKind {
    pub const ALL: [ColumnKind; 5] = [
        ColumnKind::Numeric,
        ColumnKind::NumberCategory,
        ColumnKind::StringCategory,
        ColumnKind::Text,
        ColumnKind::Date,
    ];

    /// Whether cells of this kind are stored as numbers.
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnKind::Numeric | ColumnKind::NumberCategory)
    }

    pub fn is_categorical(self) -> bool {
        matches!(
            self,
            ColumnKind::NumberCategory | ColumnKind::StringCategory
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    Classification,
    Regression,
}

impl TaskKind {
    /// Short code used in corpus files and on the command line.
    pub fn code(self) -> &'static str {
        match self {
            TaskKind::Classification => "C",
            TaskKind::Regression => "R",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        match s {
            "C" | "c" => Some(TaskKind::Classification),
            "R" | "r" => Some(TaskKind::Regression),
            _ => None,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::Classification => f.write_str("classification"),
            TaskKind::Regression => f.write_str("regression"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Missing,
    Number(f64),
    Text(String),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub cells: Vec<Cell>,
}

impl Column {
    pub fn has_missing(&self) -> bool {
        self.cells.iter().any(Cell::is_missing)
    }

    /// Non-missing numeric values in row order.
    pub fn numbers(&self) -> Vec<f64> {
        self.cells.iter().filter_map(Cell::as_number).collect()
    }
}

/// Thresholds used by [`infer_column_kind`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KindConfig {
    pub numcat_max_distinct: usize,
    pub numcat_max_ratio: f64,
    pub text_min_mean_tokens: f64,
    pub text_min_distinct_ratio: f64,
    pub date_min_fraction: f64,
    pub missing_markers: Vec<String>,
}

impl Default for KindConfig {
    fn default() -> Self {
        Self {
            numcat_max_distinct: 20,
            numcat_max_ratio: 0.05,
            text_min_mean_tokens: 3.0,
            text_min_distinct_ratio: 0.5,
            date_min_fraction: 0.9,
            missing_markers: vec!["".into(), "NA".into(), "NaN".into(), "null".into()],
        }
    }
}

impl KindConfig {
    pub fn is_missing(&self, raw: &str) -> bool {
        let t = raw.trim();
        self.missing_markers
            .iter()
            .any(|m| m.eq_ignore_ascii_case(t))
    }
}

const DATE_FORMATS: [&str; 3] = ["%Y-%m-%d", "%m/%d/%Y", "%d-%m-%Y"];
const DATETIME_FORMATS: [&str; 3] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S%.f",
];

/// True for ISO 8601 dates (optionally with a time part), `MM/DD/YYYY` and `DD-MM-YYYY`.
pub fn looks_like_date(raw: &str) -> bool {
    let t = raw.trim();
    let t = t.strip_suffix('Z').unwrap_or(t);
    DATE_FORMATS
        .iter()
        .any(|f| NaiveDate::parse_from_str(t, f).is_ok())
        || DATETIME_FORMATS
            .iter()
            .any(|f| NaiveDateTime::parse_from_str(t, f).is_ok())
}

fn parse_number(raw: &str) -> Option<f64> {
    let v: f64 = raw.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Infers the kind of a column from its raw cells.
///
/// The decision depends only on the multiset of cells. An all-missing column
/// is reported as `StringCategory`.
pub fn infer_column_kind<S: AsRef<str>>(cells: &[S], cfg: &KindConfig) -> ColumnKind {
    let present: Vec<&str> = cells
        .iter()
        .map(|c| c.as_ref())
        .filter(|c| !cfg.is_missing(c))
        .collect();
    if present.is_empty() {
        log::warn!("all-missing column, treating as string category");
        return ColumnKind::StringCategory;
    }
    let n = present.len() as f64;

    let dates = present.iter().filter(|c| looks_like_date(c)).count() as f64;
    if dates / n >= cfg.date_min_fraction {
        return ColumnKind::Date;
    }

    let numbers: Option<Vec<f64>> = present.iter().map(|c| parse_number(c)).collect();
    if let Some(numbers) = numbers {
        let distinct: HashSet<u64> = numbers.iter().map(|v| canonical_bits(*v)).collect();
        let d = distinct.len();
        return if d <= cfg.numcat_max_distinct || d as f64 / n <= cfg.numcat_max_ratio {
            ColumnKind::NumberCategory
        } else {
            ColumnKind::Numeric
        };
    }

    let distinct: HashSet<&str> = present.iter().map(|c| c.trim()).collect();
    let tokens: usize = present.iter().map(|c| c.split_whitespace().count()).sum();
    let mean_tokens = tokens as f64 / n;
    if mean_tokens > cfg.text_min_mean_tokens
        || distinct.len() as f64 / n > cfg.text_min_distinct_ratio
    {
        ColumnKind::Text
    } else {
        ColumnKind::StringCategory
    }
}

/// Bit pattern with `-0.0` folded onto `0.0`, for hashing numeric values.
pub(crate) fn canonical_bits(v: f64) -> u64 {
    if v == 0.0 {
        0.0_f64.to_bits()
    } else {
        v.to_bits()
    }
}

/// A loaded dataset. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<Column>,
    pub n_rows: usize,
    pub target_names: Vec<String>,
    pub task: TaskKind,
}

/// Column names and kinds of a dataset, without the cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<SchemaColumn>,
    pub target_names: Vec<String>,
    pub task: TaskKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaColumn {
    pub name: String,
    pub kind: ColumnKind,
    pub has_missing: bool,
}

impl Schema {
    pub fn column(&self, name: &str) -> Option<&SchemaColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| !self.target_names.contains(&c.name))
            .map(|c| c.name.clone())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub kinds: KindConfig,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            kinds: KindConfig::default(),
        }
    }
}

impl Dataset {
    /// Builds a dataset from raw string records; `header` names the columns.
    pub fn from_records(
        header: Vec<String>,
        rows: Vec<Vec<String>>,
        target_names: &[String],
        task_hint: Option<TaskKind>,
        cfg: &KindConfig,
    ) -> Result<Dataset, DataError> {
        for t in target_names {
            if !header.contains(t) {
                return Err(DataError::MissingTarget(t.clone()));
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != header.len() {
                return Err(DataError::RaggedRows {
                    row: i + 2,
                    expected: header.len(),
                    found: r.len(),
                });
            }
        }
        let columns: Vec<Column> = header
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let raw: Vec<&str> = rows.iter().map(|r| r[j].as_str()).collect();
                let kind = infer_column_kind(&raw, cfg);
                let cells = raw
                    .iter()
                    .map(|c| {
                        if cfg.is_missing(c) {
                            Cell::Missing
                        } else if kind.is_numeric() {
                            parse_number(c).map(Cell::Number).unwrap_or(Cell::Missing)
                        } else {
                            Cell::Text((*c).to_string())
                        }
                    })
                    .collect();
                Column {
                    name: name.clone(),
                    kind,
                    cells,
                }
            })
            .collect();

        let target_kinds: Vec<(String, ColumnKind)> = target_names
            .iter()
            .map(|t| {
                (
                    t.clone(),
                    columns.iter().find(|c| &c.name == t).unwrap().kind,
                )
            })
            .collect();
        let task = match task_hint {
            Some(t) => t,
            None if target_kinds.iter().all(|(_, k)| *k == ColumnKind::Numeric) => {
                TaskKind::Regression
            }
            None => TaskKind::Classification,
        };
        if task == TaskKind::Regression {
            if let Some((name, _)) = target_kinds.iter().find(|(_, k)| !k.is_numeric()) {
                return Err(DataError::NonNumericTarget(name.clone()));
            }
        }
        Ok(Dataset {
            columns,
            n_rows: rows.len(),
            target_names: target_names.to_vec(),
            task,
        })
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn is_target(&self, name: &str) -> bool {
        self.target_names.iter().any(|t| t == name)
    }

    /// Non-target columns in file order.
    pub fn features(&self) -> impl Iterator<Item = &Column> {
        self.columns
            .iter()
            .filter(move |c| !self.is_target(&c.name))
    }

    pub fn targets(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(move |c| self.is_target(&c.name))
    }

    pub fn schema(&self) -> Schema {
        Schema {
            columns: self
                .columns
                .iter()
                .map(|c| SchemaColumn {
                    name: c.name.clone(),
                    kind: c.kind,
                    has_missing: c.has_missing(),
                })
                .collect(),
            target_names: self.target_names.clone(),
            task: self.task,
        }
    }

    /// New dataset holding the given rows (in the given order). Kinds are kept.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    kind: c.kind,
                    cells: rows.iter().map(|&i| c.cells[i].clone()).collect(),
                })
                .collect(),
            n_rows: rows.len(),
            target_names: self.target_names.clone(),
            task: self.task,
        }
    }

    /// Writes the dataset as CSV. Numbers use the shortest representation
    /// that parses back to the same `f64`; missing cells are empty.
    pub fn write_csv(&self, path: &Path) -> Result<(), DataError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for i in 0..self.n_rows {
            w.write_record(self.columns.iter().map(|c| match &c.cells[i] {
                Cell::Missing => String::new(),
                Cell::Number(v) => format!("{v}"),
                Cell::Text(s) => s.clone(),
            }))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Loads a CSV file with a header row.
pub fn load_csv(
    path: &Path,
    target_names: &[String],
    task_hint: Option<TaskKind>,
    opts: &LoadOptions,
) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .flexible(true)
        .has_headers(true)
        .from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let empty = || DataError::EmptyFile {
        path: path.display().to_string(),
    };
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(empty());
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    if rows.is_empty() {
        return Err(empty());
    }
    Dataset::from_records(header, rows, target_names, task_hint, &opts.kinds)
}

/// Shuffles row indices with `seed` and splits them; the first part gets
/// `round(ratio * n)` rows.
pub fn split_rows(d: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    let (a, b) = split_indices(d.n_rows, ratio, seed)?;
    Ok((d.select_rows(&a), d.select_rows(&b)))
}

pub(crate) fn split_indices(
    n: usize,
    ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DataError::DegenerateSplit(format!(
            "ratio {ratio} outside (0, 1)"
        )));
    }
    let first = (ratio * n as f64).round() as usize;
    if first == 0 || first >= n {
        return Err(DataError::DegenerateSplit(format!(
            "{n} rows at ratio {ratio} leaves one side empty"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let second = idx.split_off(first);
    Ok((idx, second))
}

/// String key of a non-missing cell, used for class labels and value counts.
pub(crate) fn cell_key(c: &Cell) -> Option<String> {
    match c {
        Cell::Missing => None,
        Cell::Number(v) => Some(format!("{}", f64::from_bits(canonical_bits(*v)))),
        Cell::Text(s) => Some(s.clone()),
    }
}
