//! Synthetic corpus with planted component rules.
//!
//! Meta-feature vectors are sampled directly (no datasets behind them) and the
//! pipeline labels follow these rules:
//!
//! * `has_missing` ⇒ `Imputer` with probability 0.95, never otherwise
//! * `has_strcat` ⇒ one encoder (`OrdinalEncoder` 0.55, `OneHotEncoder` 0.40)
//! * `has_text` ⇒ `TextPreprocessor` (0.7) and `TextVectorizer` (0.95)
//! * `has_date` ⇒ `DateFeaturization` (0.9)
//! * `frac_skew_tailed > 0.3` ⇒ `LogScaler` (0.8), else 0.05
//! * `has_numeric` ⇒ `LinearScaler` (0.6), else 0.05
//! * `target_imbalanced` ⇒ `DataBalancer` (0.9), never otherwise
//!
//! The model follows [`planted_best_model`] except for 5% label noise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AbstractPipeline, ComponentLabel, MetaCorpus, Taxonomy};
use crate::meta_features::{MetaFeatureName as M, MetaFeatureVector};
use crate::tabular::TaskKind;

/// Row count above which the planted rule switches to a boosting model.
const LARGE_ROWS: f64 = 10_000.0;
const MODEL_NOISE: f64 = 0.05;

/// A sampled meta-vector with its task.
#[derive(Debug, Clone)]
pub struct SyntheticRecord {
    pub task: TaskKind,
    pub meta_features: MetaFeatureVector,
}

/// The model the planted rule assigns to a meta-vector.
pub fn planted_best_model(mf: &MetaFeatureVector, task: TaskKind) -> &'static str {
    let large = mf[M::NRows] > LARGE_ROWS;
    match task {
        TaskKind::Classification if large => "CatBoost",
        TaskKind::Classification if mf[M::HasText] >= 0.5 => "LogisticRegression",
        TaskKind::Classification => "RandomForest",
        TaskKind::Regression if large => "LightGBM",
        TaskKind::Regression => "RandomForest",
    }
}

fn flag(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.gen_bool(p)
}

/// Samples one meta-vector. Row counts are drawn from two separated bands
/// (`[50, 8000]` and `[20000, 500000]`) so the size rule has a margin.
pub fn sample_meta_vector(rng: &mut ChaCha8Rng, task: TaskKind) -> MetaFeatureVector {
    let mut mf = MetaFeatureVector::default();
    let n_rows = if flag(rng, 0.5) {
        rng.gen_range(50..=8_000)
    } else {
        rng.gen_range(20_000..=500_000)
    };
    mf.set(M::NRows, n_rows as f64);
    mf.set(M::NTargets, 1.0);
    mf.set(M::HasMissing, f64::from(u8::from(flag(rng, 0.5))));

    let kinds = [
        (M::HasNumeric, M::CountNumeric, 0.85),
        (M::HasNumcat, M::CountNumcat, 0.4),
        (M::HasStrcat, M::CountStrcat, 0.5),
        (M::HasText, M::CountText, 0.15),
        (M::HasDate, M::CountDate, 0.15),
    ];
    let mut n_features = 0;
    for (has, count, p) in kinds {
        if flag(rng, p) {
            let c = rng.gen_range(1..=30);
            mf.set(has, 1.0);
            mf.set(count, c as f64);
            n_features += c;
        }
    }
    if n_features == 0 {
        mf.set(M::HasNumeric, 1.0);
        mf.set(M::CountNumeric, 1.0);
        n_features = 1;
    }
    mf.set(M::NFeatures, n_features as f64);

    let numeric = mf[M::CountNumeric] + mf[M::CountNumcat];
    if numeric > 0.0 {
        let skew_normal: f64 = rng.gen();
        mf.set(M::FracSkewNormal, skew_normal);
        mf.set(M::FracSkewTailed, rng.gen::<f64>() * (1.0 - skew_normal));
        let kurt_normal: f64 = rng.gen();
        mf.set(M::FracKurtNormal, kurt_normal);
        mf.set(M::FracKurtTailed, rng.gen::<f64>() * (1.0 - kurt_normal));
        let normal: f64 = rng.gen::<f64>() * 0.5;
        let uniform: f64 = rng.gen::<f64>() * (1.0 - normal) * 0.5;
        mf.set(M::FracFeatNormal, normal);
        mf.set(M::FracFeatUniform, uniform);
        mf.set(
            M::FracFeatPoisson,
            rng.gen::<f64>() * (1.0 - normal - uniform),
        );
        mf.set(M::NormMean, rng.gen_range(0.1..0.9));
        mf.set(M::NormStd, rng.gen_range(0.05..0.4));
        mf.set(M::MeanCv, rng.gen_range(0.0..3.0));
        mf.set(M::CorrMin, rng.gen_range(-1.0..0.0));
        mf.set(M::CorrMax, rng.gen_range(0.0..1.0));
        let n = numeric as u32;
        mf.set(M::CorrCount, f64::from(rng.gen_range(0..=n)));
        mf.set(M::OutlierFewCount, f64::from(rng.gen_range(0..=n)));
        mf.set(M::OutlierManyCount, f64::from(rng.gen_range(0..=n)));
    }
    let nf = n_features as u32;
    mf.set(M::SparseCount, f64::from(rng.gen_range(0..=nf / 4)));
    mf.set(M::ImbalancedCount, f64::from(rng.gen_range(0..=nf / 3)));
    mf.set(M::DominantCount, f64::from(rng.gen_range(0..=nf / 3)));

    match task {
        TaskKind::Classification => {
            mf.set(M::TargetImbalanced, f64::from(u8::from(flag(rng, 0.3))));
            mf.set(M::TargetCategorical, 1.0);
        }
        TaskKind::Regression => {
            mf.set(M::TargetIsNormal, f64::from(u8::from(flag(rng, 0.4))));
            mf.set(M::TargetIsUniform, f64::from(u8::from(flag(rng, 0.2))));
            mf.set(M::TargetIsPoisson, f64::from(u8::from(flag(rng, 0.1))));
            mf.set(M::TargetContinuous, 1.0);
        }
    }
    mf
}

fn planted_fe(rng: &mut ChaCha8Rng, mf: &MetaFeatureVector) -> Vec<&'static str> {
    let mut fe = Vec::new();
    if mf[M::HasMissing] >= 0.5 && flag(rng, 0.95) {
        fe.push("Imputer");
    }
    if mf[M::HasStrcat] >= 0.5 {
        let u: f64 = rng.gen();
        if u < 0.55 {
            fe.push("OrdinalEncoder");
        } else if u < 0.95 {
            fe.push("OneHotEncoder");
        }
    }
    if mf[M::HasText] >= 0.5 {
        if flag(rng, 0.7) {
            fe.push("TextPreprocessor");
        }
        if flag(rng, 0.95) {
            fe.push("TextVectorizer");
        }
    }
    if mf[M::HasDate] >= 0.5 && flag(rng, 0.9) {
        fe.push("DateFeaturization");
    }
    let log_p = if mf[M::FracSkewTailed] > 0.3 {
        0.8
    } else {
        0.05
    };
    if flag(rng, log_p) {
        fe.push("LogScaler");
    }
    let lin_p = if mf[M::HasNumeric] >= 0.5 { 0.6 } else { 0.05 };
    if flag(rng, lin_p) {
        fe.push("LinearScaler");
    }
    if mf[M::TargetImbalanced] >= 0.5 && flag(rng, 0.9) {
        fe.push("DataBalancer");
    }
    fe
}

/// Generates `n` records (70% classification) from the planted rules.
///
/// The output is a pure function of `(seed, n)`.
pub fn generate_synthetic_corpus(seed: u64, n: usize, taxonomy: &Taxonomy) -> MetaCorpus {
    if n < 50 {
        log::warn!("synthetic corpus of {n} records is below the recommended minimum of 50");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let task = if flag(&mut rng, 0.7) {
            TaskKind::Classification
        } else {
            TaskKind::Regression
        };
        let mf = sample_meta_vector(&mut rng, task);
        let fe = planted_fe(&mut rng, &mf);
        let model = if flag(&mut rng, MODEL_NOISE) {
            let options: Vec<&str> = taxonomy.models_for(task).collect();
            options[rng.gen_range(0..options.len())].to_string()
        } else {
            planted_best_model(&mf, task).to_string()
        };
        records.push(AbstractPipeline {
            dataset_id: format!("synthetic-{seed}-{i:05}"),
            task,
            meta_features: mf,
            fe_sequence: fe.into_iter().map(ComponentLabel::fe).collect(),
            model: ComponentLabel::model(model),
        });
    }
    MetaCorpus::new(records, taxonomy.clone())
}
