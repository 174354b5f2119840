//! Dataset-level meta-features and their per-column analogues.
//!
//! Thresholds for the banded features:
//!
//! | feature                  | column predicate                                        |
//! |--------------------------|---------------------------------------------------------|
//! | `frac_skew_normal`       | `abs(g1) <= 0.5`                                        |
//! | `frac_skew_tailed`       | `abs(g1) > 2`                                           |
//! | `frac_kurt_normal`       | `abs(g2) <= 1`                                          |
//! | `frac_kurt_tailed`       | `g2 > 3`                                                |
//! | `*_normal`               | `abs(g1) <= 0.3 && abs(g2) <= 1`                        |
//! | `*_uniform`              | `abs(g2 + 1.2) <= 0.3 && abs(g1) <= 0.3`                |
//! | `*_poisson`              | non-negative integers, `abs(var / mean - 1) <= 0.2`     |
//! | `outlier_few_count`      | Tukey outlier fraction in `(0, 0.01]`                   |
//! | `outlier_many_count`     | Tukey outlier fraction `> 0.05`                         |
//! | `sparse_count`           | zero or empty cells `>= 0.5` of rows                    |
//! | `dominant_count`         | top value frequency `>= 0.8`                            |
//! | `imbalanced_count`       | top value frequency in `[0.6, 0.8)`                     |
//! | `target_imbalanced`      | minority / majority class count `<= 0.2`                |
//!
//! `g1` is the moment skewness and `g2` the excess kurtosis of the non-missing
//! values. Statistics over "numeric" columns use `Numeric` and
//! `NumberCategory` feature columns.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::stats;
use crate::tabular::{cell_key, Cell, Column, ColumnKind, Dataset, TaskKind};

macro_rules! meta_feature_names {
    ($($variant:ident => $name:literal,)*) => {
        /// The 38 meta-features, in canonical order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum MetaFeatureName {
            $($variant,)*
        }

        impl MetaFeatureName {
            pub const ALL: [MetaFeatureName; 38] = [$(MetaFeatureName::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(MetaFeatureName::$variant => $name,)*
                }
            }
        }

        impl FromStr for MetaFeatureName {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(MetaFeatureName::$variant),)*
                    _ => Err(format!("unknown meta-feature `{s}`")),
                }
            }
        }
    };
}

meta_feature_names! {
    NRows => "n_rows",
    NFeatures => "n_features",
    NTargets => "n_targets",
    HasMissing => "has_missing",
    HasNumeric => "has_numeric",
    HasNumcat => "has_numcat",
    HasStrcat => "has_strcat",
    HasText => "has_text",
    HasDate => "has_date",
    CountNumeric => "count_numeric",
    CountNumcat => "count_numcat",
    CountStrcat => "count_strcat",
    CountText => "count_text",
    CountDate => "count_date",
    FracSkewNormal => "frac_skew_normal",
    FracSkewTailed => "frac_skew_tailed",
    FracKurtNormal => "frac_kurt_normal",
    FracKurtTailed => "frac_kurt_tailed",
    FracFeatNormal => "frac_feat_normal",
    FracFeatUniform => "frac_feat_uniform",
    FracFeatPoisson => "frac_feat_poisson",
    TargetIsNormal => "target_is_normal",
    TargetIsUniform => "target_is_uniform",
    TargetIsPoisson => "target_is_poisson",
    NormMean => "norm_mean",
    NormStd => "norm_std",
    MeanCv => "mean_cv",
    CorrMin => "corr_min",
    CorrMax => "corr_max",
    CorrCount => "corr_count",
    OutlierFewCount => "outlier_few_count",
    OutlierManyCount => "outlier_many_count",
    SparseCount => "sparse_count",
    ImbalancedCount => "imbalanced_count",
    DominantCount => "dominant_count",
    TargetImbalanced => "target_imbalanced",
    TargetContinuous => "target_continuous",
    TargetCategorical => "target_categorical",
}

/// High-level property a meta-feature belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureGroup {
    Shape,
    Missing,
    FeatureTypes,
    Symmetry,
    Distribution,
    TendencyDispersion,
    Correlation,
    Outliers,
    ValueFrequency,
    TargetProperty,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 10] = [
        FeatureGroup::Shape,
        FeatureGroup::Missing,
        FeatureGroup::FeatureTypes,
        FeatureGroup::Symmetry,
        FeatureGroup::Distribution,
        FeatureGroup::TendencyDispersion,
        FeatureGroup::Correlation,
        FeatureGroup::Outliers,
        FeatureGroup::ValueFrequency,
        FeatureGroup::TargetProperty,
    ];
}

/// How a meta-feature reads on a single column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnReading {
    /// Dataset-global; no per-column analogue.
    Global,
    /// Presence/count over a column predicate; the column value is 0 or 1.
    Predicate,
    /// A real-valued statistic of the column.
    Value,
}

use MetaFeatureName as M;

impl MetaFeatureName {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn group(self) -> FeatureGroup {
        match self {
            M::NRows | M::NFeatures | M::NTargets => FeatureGroup::Shape,
            M::HasMissing => FeatureGroup::Missing,
            M::HasNumeric
            | M::HasNumcat
            | M::HasStrcat
            | M::HasText
            | M::HasDate
            | M::CountNumeric
            | M::CountNumcat
            | M::CountStrcat
            | M::CountText
            | M::CountDate => FeatureGroup::FeatureTypes,
            M::FracSkewNormal | M::FracSkewTailed | M::FracKurtNormal | M::FracKurtTailed => {
                FeatureGroup::Symmetry
            }
            M::FracFeatNormal
            | M::FracFeatUniform
            | M::FracFeatPoisson
            | M::TargetIsNormal
            | M::TargetIsUniform
            | M::TargetIsPoisson => FeatureGroup::Distribution,
            M::NormMean | M::NormStd | M::MeanCv => FeatureGroup::TendencyDispersion,
            M::CorrMin | M::CorrMax | M::CorrCount => FeatureGroup::Correlation,
            M::OutlierFewCount | M::OutlierManyCount => FeatureGroup::Outliers,
            M::SparseCount | M::ImbalancedCount | M::DominantCount => FeatureGroup::ValueFrequency,
            M::TargetImbalanced | M::TargetContinuous | M::TargetCategorical => {
                FeatureGroup::TargetProperty
            }
        }
    }

    pub fn column_reading(self) -> ColumnReading {
        match self {
            M::NRows
            | M::NTargets
            | M::CorrMin
            | M::CorrMax
            | M::CorrCount
            | M::TargetIsNormal
            | M::TargetIsUniform
            | M::TargetIsPoisson
            | M::TargetImbalanced
            | M::TargetContinuous
            | M::TargetCategorical => ColumnReading::Global,
            M::NormMean | M::NormStd | M::MeanCv => ColumnReading::Value,
            _ => ColumnReading::Predicate,
        }
    }

    pub fn column_probe(self) -> ColumnFeatureProbe {
        ColumnFeatureProbe {
            meta_feature: self,
            applicable: self.column_reading() != ColumnReading::Global,
        }
    }
}

impl fmt::Display for MetaFeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for MetaFeatureName {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for MetaFeatureName {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Per-column view of one meta-feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnFeatureProbe {
    pub meta_feature: MetaFeatureName,
    pub applicable: bool,
}

impl ColumnFeatureProbe {
    pub fn value(&self, col: &Column) -> Option<f64> {
        column_feature_value(col, self.meta_feature)
    }
}

/// Meta-feature values indexed by [`MetaFeatureName`].
///
/// Serializes as a flat JSON object whose keys follow the canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaFeatureVector {
    values: [f64; 38],
}

impl Default for MetaFeatureVector {
    fn default() -> Self {
        Self { values: [0.0; 38] }
    }
}

impl MetaFeatureVector {
    pub fn from_values(values: [f64; 38]) -> Self {
        Self { values }
    }

    pub fn get(&self, name: MetaFeatureName) -> f64 {
        self.values[name.index()]
    }

    pub fn set(&mut self, name: MetaFeatureName, v: f64) {
        self.values[name.index()] = v;
    }

    pub fn values(&self) -> &[f64; 38] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (MetaFeatureName, f64)> + '_ {
        MetaFeatureName::ALL
            .iter()
            .map(move |&n| (n, self.values[n.index()]))
    }
}

impl std::ops::Index<MetaFeatureName> for MetaFeatureVector {
    type Output = f64;
    fn index(&self, name: MetaFeatureName) -> &f64 {
        &self.values[name.index()]
    }
}

impl Serialize for MetaFeatureVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(38))?;
        for (name, v) in self.iter() {
            map.serialize_entry(name.as_str(), &v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for MetaFeatureVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = MetaFeatureVector;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object with all 38 meta-features")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut values = [f64::NAN; 38];
                let mut seen = [false; 38];
                while let Some(key) = map.next_key::<String>()? {
                    let name: MetaFeatureName = key.parse().map_err(de::Error::custom)?;
                    let v: f64 = map.next_value()?;
                    if !v.is_finite() {
                        return Err(de::Error::custom(format!(
                            "meta-feature `{key}` is not finite"
                        )));
                    }
                    if seen[name.index()] {
                        return Err(de::Error::custom(format!("duplicate meta-feature `{key}`")));
                    }
                    seen[name.index()] = true;
                    values[name.index()] = v;
                }
                if let Some(i) = seen.iter().position(|s| !s) {
                    return Err(de::Error::custom(format!(
                        "missing meta-feature `{}`",
                        MetaFeatureName::ALL[i]
                    )));
                }
                Ok(MetaFeatureVector { values })
            }
        }
        d.deserialize_map(V)
    }
}

// Banding thresholds.
const SKEW_NORMAL: f64 = 0.5;
const SKEW_TAILED: f64 = 2.0;
const KURT_NORMAL: f64 = 1.0;
const KURT_TAILED: f64 = 3.0;
const DIST_SKEW: f64 = 0.3;
const DIST_KURT: f64 = 1.0;
const UNIFORM_KURT: f64 = -1.2;
const UNIFORM_TOL: f64 = 0.3;
const POISSON_TOL: f64 = 0.2;
const CORR_STRONG: f64 = 0.8;
const CORR_MAX_ROWS: usize = 10_000;
const CORR_MAX_COLS: usize = 50;
const OUTLIER_FEW: f64 = 0.01;
const OUTLIER_MANY: f64 = 0.05;
const SPARSE: f64 = 0.5;
const DOMINANT: f64 = 0.8;
const IMBALANCED: f64 = 0.6;
const TARGET_IMBALANCE: f64 = 0.2;
const CV_MIN_MEAN: f64 = 1e-12;

/// Moment summary of one numeric column.
#[derive(Debug, Clone, Copy)]
struct Shape {
    skew: Option<f64>,
    kurt: Option<f64>,
}

impl Shape {
    fn of(values: &[f64]) -> Shape {
        let s = stats::skewness(values);
        let k = stats::kurtosis(values);
        Shape {
            skew: (!s.degenerate).then_some(s.value),
            kurt: (!k.degenerate).then_some(k.value),
        }
    }

    fn both(&self) -> Option<(f64, f64)> {
        Some((self.skew?, self.kurt?))
    }
}

fn is_normal(values: &[f64]) -> bool {
    Shape::of(values)
        .both()
        .is_some_and(|(g1, g2)| g1.abs() <= DIST_SKEW && g2.abs() <= DIST_KURT)
}

fn is_uniform(values: &[f64]) -> bool {
    Shape::of(values)
        .both()
        .is_some_and(|(g1, g2)| (g2 - UNIFORM_KURT).abs() <= UNIFORM_TOL && g1.abs() <= DIST_SKEW)
}

fn is_poisson(values: &[f64]) -> bool {
    if values.is_empty() || !values.iter().all(|&v| v >= 0.0 && v.fract() == 0.0) {
        return false;
    }
    let m = stats::mean(values);
    if m <= 0.0 {
        return false;
    }
    (stats::variance(values) / m - 1.0).abs() <= POISSON_TOL
}

/// `(mean, std)` of the min-max normalized values; zeros for a constant column.
fn normalized_moments(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Some((0.0, 0.0));
    }
    let scaled: Vec<f64> = values.iter().map(|v| (v - lo) / (hi - lo)).collect();
    Some((stats::mean(&scaled), stats::std_dev(&scaled)))
}

fn coefficient_of_variation(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let m = stats::mean(values);
    (m.abs() > CV_MIN_MEAN).then(|| stats::std_dev(values) / m.abs())
}

/// Frequency of the most common non-missing value.
fn top_frequency(col: &Column) -> Option<f64> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut n = 0usize;
    for k in col.cells.iter().filter_map(cell_key) {
        *counts.entry(k).or_default() += 1;
        n += 1;
    }
    let top = counts.values().copied().max()?;
    Some(top as f64 / n as f64)
}

fn is_sparse(col: &Column) -> bool {
    if col.cells.is_empty() {
        return false;
    }
    let empty = col
        .cells
        .iter()
        .filter(|c| match c {
            Cell::Missing => true,
            Cell::Number(v) => *v == 0.0,
            Cell::Text(s) => s.trim().is_empty(),
        })
        .count();
    empty as f64 / col.cells.len() as f64 >= SPARSE
}

fn b(v: bool) -> f64 {
    if v {
        1.0
    } else {
        0.0
    }
}

/// Per-column analogue of a meta-feature.
///
/// Predicate features return 0 or 1; statistic features over numeric values
/// are absent for non-numeric columns; dataset-global features are absent.
pub fn column_feature_value(col: &Column, name: MetaFeatureName) -> Option<f64> {
    let kind_is = |k: ColumnKind| Some(b(col.kind == k));
    let numeric = col.kind.is_numeric();
    let numbers = || if numeric { Some(col.numbers()) } else { None };
    match name {
        M::NRows | M::NTargets | M::CorrMin | M::CorrMax | M::CorrCount => None,
        M::TargetIsNormal | M::TargetIsUniform | M::TargetIsPoisson => None,
        M::TargetImbalanced | M::TargetContinuous | M::TargetCategorical => None,
        M::NFeatures => Some(1.0),
        M::HasMissing => Some(b(col.has_missing())),
        M::HasNumeric | M::CountNumeric => kind_is(ColumnKind::Numeric),
        M::HasNumcat | M::CountNumcat => kind_is(ColumnKind::NumberCategory),
        M::HasStrcat | M::CountStrcat => kind_is(ColumnKind::StringCategory),
        M::HasText | M::CountText => kind_is(ColumnKind::Text),
        M::HasDate | M::CountDate => kind_is(ColumnKind::Date),
        M::FracSkewNormal => {
            numbers().map(|v| b(Shape::of(&v).skew.is_some_and(|g| g.abs() <= SKEW_NORMAL)))
        }
        M::FracSkewTailed => {
            numbers().map(|v| b(Shape::of(&v).skew.is_some_and(|g| g.abs() > SKEW_TAILED)))
        }
        M::FracKurtNormal => {
            numbers().map(|v| b(Shape::of(&v).kurt.is_some_and(|g| g.abs() <= KURT_NORMAL)))
        }
        M::FracKurtTailed => {
            numbers().map(|v| b(Shape::of(&v).kurt.is_some_and(|g| g > KURT_TAILED)))
        }
        M::FracFeatNormal => numbers().map(|v| b(is_normal(&v))),
        M::FracFeatUniform => numbers().map(|v| b(is_uniform(&v))),
        M::FracFeatPoisson => numbers().map(|v| b(is_poisson(&v))),
        M::NormMean => numbers().and_then(|v| normalized_moments(&v)).map(|m| m.0),
        M::NormStd => numbers().and_then(|v| normalized_moments(&v)).map(|m| m.1),
        M::MeanCv => numbers().and_then(|v| coefficient_of_variation(&v)),
        M::OutlierFewCount => numbers().map(|v| {
            let f = if v.is_empty() {
                0.0
            } else {
                stats::outlier_fraction(&v)
            };
            b(f > 0.0 && f <= OUTLIER_FEW)
        }),
        M::OutlierManyCount => {
            numbers().map(|v| b(!v.is_empty() && stats::outlier_fraction(&v) > OUTLIER_MANY))
        }
        M::SparseCount => Some(b(is_sparse(col))),
        M::DominantCount => Some(b(top_frequency(col).is_some_and(|f| f >= DOMINANT))),
        M::ImbalancedCount => Some(b(
            top_frequency(col).is_some_and(|f| (IMBALANCED..DOMINANT).contains(&f))
        )),
    }
}

/// Evenly strided subset of `0..n` with at most `max` elements.
fn stride_sample(n: usize, max: usize) -> Vec<usize> {
    if n <= max {
        return (0..n).collect();
    }
    (0..max).map(|i| i * n / max).collect()
}

fn correlation_features(numeric: &[&Column], n_rows: usize) -> (f64, f64, f64) {
    let cols: Vec<&Column> = stride_sample(numeric.len(), CORR_MAX_COLS)
        .into_iter()
        .map(|i| numeric[i])
        .collect();
    let rows = stride_sample(n_rows, CORR_MAX_ROWS);
    let mut rs = Vec::new();
    for i in 0..cols.len() {
        for j in (i + 1)..cols.len() {
            let (mut x, mut y) = (Vec::new(), Vec::new());
            for &r in &rows {
                if let (Some(a), Some(b)) =
                    (cols[i].cells[r].as_number(), cols[j].cells[r].as_number())
                {
                    x.push(a);
                    y.push(b);
                }
            }
            rs.push(stats::pearson(&x, &y).value);
        }
    }
    if rs.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let min = rs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let strong = rs.iter().filter(|r| r.abs() >= CORR_STRONG).count();
    (min, max, strong as f64)
}

fn target_imbalanced(target: &Column) -> bool {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for k in target.cells.iter().filter_map(cell_key) {
        *counts.entry(k).or_default() += 1;
    }
    let (Some(&lo), Some(&hi)) = (counts.values().min(), counts.values().max()) else {
        return false;
    };
    counts.len() >= 2 && lo as f64 / hi as f64 <= TARGET_IMBALANCE
}

fn fraction(count: usize, of: usize) -> f64 {
    if of == 0 {
        0.0
    } else {
        count as f64 / of as f64
    }
}

/// Computes all 38 meta-features of a dataset.
///
/// Target-property and target-distribution features are computed on the
/// first target column.
pub fn compute_meta_features(d: &Dataset) -> MetaFeatureVector {
    let mut mf = MetaFeatureVector::default();
    let features: Vec<&Column> = d.features().collect();
    let count_kind = |k: ColumnKind| features.iter().filter(|c| c.kind == k).count();

    mf.set(M::NRows, d.n_rows as f64);
    mf.set(M::NFeatures, features.len() as f64);
    mf.set(M::NTargets, d.target_names.len() as f64);
    mf.set(M::HasMissing, b(features.iter().any(|c| c.has_missing())));
    for (has, count, kind) in [
        (M::HasNumeric, M::CountNumeric, ColumnKind::Numeric),
        (M::HasNumcat, M::CountNumcat, ColumnKind::NumberCategory),
        (M::HasStrcat, M::CountStrcat, ColumnKind::StringCategory),
        (M::HasText, M::CountText, ColumnKind::Text),
        (M::HasDate, M::CountDate, ColumnKind::Date),
    ] {
        let n = count_kind(kind);
        mf.set(has, b(n > 0));
        mf.set(count, n as f64);
    }

    let numeric: Vec<&Column> = features
        .iter()
        .copied()
        .filter(|c| c.kind.is_numeric())
        .collect();
    let nn = numeric.len();
    let count_where = |name: MetaFeatureName| {
        numeric
            .iter()
            .filter(|c| column_feature_value(c, name) == Some(1.0))
            .count()
    };
    for name in [
        M::FracSkewNormal,
        M::FracSkewTailed,
        M::FracKurtNormal,
        M::FracKurtTailed,
        M::FracFeatNormal,
        M::FracFeatUniform,
        M::FracFeatPoisson,
    ] {
        mf.set(name, fraction(count_where(name), nn));
    }

    let norm: Vec<(f64, f64)> = numeric
        .iter()
        .filter_map(|c| normalized_moments(&c.numbers()))
        .collect();
    let means: Vec<f64> = norm.iter().map(|m| m.0).collect();
    let stds: Vec<f64> = norm.iter().map(|m| m.1).collect();
    mf.set(M::NormMean, stats::mean(&means));
    mf.set(M::NormStd, stats::mean(&stds));
    let cvs: Vec<f64> = numeric
        .iter()
        .filter_map(|c| coefficient_of_variation(&c.numbers()))
        .collect();
    mf.set(M::MeanCv, stats::mean(&cvs));

    let (cmin, cmax, ccount) = correlation_features(&numeric, d.n_rows);
    mf.set(M::CorrMin, cmin);
    mf.set(M::CorrMax, cmax);
    mf.set(M::CorrCount, ccount);

    mf.set(M::OutlierFewCount, count_where(M::OutlierFewCount) as f64);
    mf.set(M::OutlierManyCount, count_where(M::OutlierManyCount) as f64);
    for name in [M::SparseCount, M::ImbalancedCount, M::DominantCount] {
        let n = features
            .iter()
            .filter(|c| column_feature_value(c, name) == Some(1.0))
            .count();
        mf.set(name, n as f64);
    }

    if let Some(target) = d.targets().next() {
        let values = if target.kind.is_numeric() {
            target.numbers()
        } else {
            Vec::new()
        };
        mf.set(M::TargetIsNormal, b(is_normal(&values)));
        mf.set(M::TargetIsUniform, b(is_uniform(&values)));
        mf.set(M::TargetIsPoisson, b(is_poisson(&values)));
        let classification = d.task == TaskKind::Classification;
        mf.set(
            M::TargetImbalanced,
            b(classification && target_imbalanced(target)),
        );
        mf.set(M::TargetContinuous, b(!classification));
        mf.set(M::TargetCategorical, b(classification));
    }
    mf
}
