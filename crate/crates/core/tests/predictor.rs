use std::sync::OnceLock;

use pipeforge::corpus::{
    generate_synthetic_corpus, parse_corpus_str, planted_best_model, sample_meta_vector, Taxonomy,
};
use pipeforge::predictor::{relevant_columns, seed_pipelines, SeedConfig, TrainingReport};
use pipeforge::tabular::{Dataset, KindConfig, TaskKind};
use pipeforge::{MetaFeatureName, SkeletonPredictorBundle, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn trained() -> &'static (SkeletonPredictorBundle, TrainingReport) {
    static B: OnceLock<(SkeletonPredictorBundle, TrainingReport)> = OnceLock::new();
    B.get_or_init(|| {
        let corpus = generate_synthetic_corpus(42, 500, &Taxonomy::builtin());
        SkeletonPredictorBundle::train(&corpus, &TrainConfig::default())
    })
}

#[test]
fn imputer_rule_is_recovered() {
    let (bundle, report) = trained();
    let r = report.fe_report("Imputer").unwrap();
    assert!(r.cv_macro_f1.unwrap() >= 0.95, "{r:?}");
    assert_eq!(
        bundle.fe_trees["Imputer"].root_feature(),
        Some(MetaFeatureName::HasMissing)
    );
}

#[test]
fn model_rule_is_recovered_on_held_out_vectors() {
    let (bundle, _) = trained();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for task in [TaskKind::Classification, TaskKind::Regression] {
        let hits = (0..100)
            .filter(|_| {
                let mf = sample_meta_vector(&mut rng, task);
                bundle.ranker.for_task(task).rank(&mf)[0].0 == planted_best_model(&mf, task)
            })
            .count();
        assert!(hits >= 90, "{task}: {hits}/100");
    }
}

#[test]
fn bundle_survives_json_and_retraining() {
    let (bundle, _) = trained();
    let text = bundle.to_json();
    assert_eq!(&SkeletonPredictorBundle::from_json(&text).unwrap(), bundle);
    let corpus = generate_synthetic_corpus(42, 500, &Taxonomy::builtin());
    let (again, _) = SkeletonPredictorBundle::train(&corpus, &TrainConfig::default());
    assert_eq!(again.to_json(), text);
}

#[test]
fn single_record_corpus_gives_constant_trees() {
    let corpus = generate_synthetic_corpus(1, 1, &Taxonomy::builtin());
    let text = corpus.to_jsonl();
    let corpus = parse_corpus_str(&text, &Taxonomy::builtin()).unwrap();
    let (bundle, report) = SkeletonPredictorBundle::train(&corpus, &TrainConfig::default());
    assert!(bundle.fe_trees.values().all(|t| t.is_constant()));
    assert!(report.fe.iter().all(|r| r.constant.is_some()));
    assert!(report.rankers.iter().all(|r| !r.learned));
}

/// Missing values only in `A` and `B`, string categories only in `C`.
fn abc_dataset() -> Dataset {
    let header = ["A", "B", "C", "D", "y"].map(String::from).to_vec();
    let rows = (0..60)
        .map(|i| {
            vec![
                if i % 6 == 0 {
                    String::new()
                } else {
                    format!("{}.5", i * 7 % 50)
                },
                if i % 9 == 0 {
                    "NA".into()
                } else {
                    format!("{}", (i * 13) % 71)
                },
                ["red", "green", "blue"][i % 3].to_string(),
                format!("{}.25", i * 3),
                if i % 4 == 0 { "1" } else { "0" }.to_string(),
            ]
        })
        .collect();
    Dataset::from_records(
        header,
        rows,
        &["y".to_string()],
        None,
        &KindConfig::default(),
    )
    .unwrap()
}

#[test]
fn relevant_columns_follow_the_data() {
    let (bundle, _) = trained();
    let d = abc_dataset();
    let mf = pipeforge::compute_meta_features(&d);
    assert_eq!(
        relevant_columns("Imputer", &bundle.fe_trees["Imputer"], &mf, &d),
        ["A", "B"]
    );
    assert_eq!(
        relevant_columns(
            "OrdinalEncoder",
            &bundle.fe_trees["OrdinalEncoder"],
            &mf,
            &d
        ),
        ["C"]
    );

    let seeding = seed_pipelines(bundle, &d, &SeedConfig::default());
    let imputer = seeding
        .fe_components
        .iter()
        .find(|c| c.label == "Imputer")
        .expect("Imputer predicted");
    assert_eq!(imputer.columns, ["A", "B"]);
    assert!(seeding
        .fe_components
        .iter()
        .all(|c| !c.columns.contains(&"y".to_string())));
    assert_eq!(seeding.skeletons.len(), 3);
}
