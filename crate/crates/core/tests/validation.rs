use std::path::{Path, PathBuf};
use std::time::Instant;

use pipeforge::instantiate::{CandidatePipeline, OrderedSkeleton};
use pipeforge::tabular::{Dataset, KindConfig, TaskKind};
use pipeforge::validation::{
    finalize, parse_result_line, run_candidates, select_best, DataFiles, EvalResult,
    ExecutorConfig, HarnessReport, RunStatus, ValidationError,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Candidates here are shell scripts; the executor runs them with `sh`.
fn cand(id: &str, rank: usize, hp: usize, source: &str) -> CandidatePipeline {
    CandidatePipeline {
        script_id: id.into(),
        source: source.into(),
        skeleton: OrderedSkeleton {
            fe_ordered: vec![],
            model: "RandomForest".into(),
            model_rank: rank,
            removed: vec![],
        },
        model_rank: rank,
        hp_index: hp,
        hyperparams: Default::default(),
        template_version: "1".into(),
    }
}

fn sh(timeout: f64) -> ExecutorConfig {
    ExecutorConfig {
        command_template: "cd {workdir} && sh {script}".into(),
        timeout_secs: timeout,
        ..Default::default()
    }
}

fn data_files(dir: &Path) -> DataFiles {
    let training = dir.join("inner_training.csv");
    let test = dir.join("inner_test.csv");
    std::fs::write(&training, "x,y\n1,0\n2,1\n").unwrap();
    std::fs::write(&test, "x,y\n3,1\n").unwrap();
    DataFiles { training, test }
}

fn result(id: &str, status: RunStatus, score: Option<f64>) -> EvalResult {
    EvalResult {
        script_id: id.into(),
        status,
        score,
        duration: 0.0,
        log_path: PathBuf::from(format!("{id}.log")),
    }
}

#[test]
fn statuses_from_executor() {
    let dir = tempfile::tempdir().unwrap();
    let cands = [
        cand(
            "ok",
            1,
            0,
            "test -f training.csv && test -f test.csv && echo fitting && echo RESULT:0.5\n",
        ),
        cand("crash", 2, 0, "echo RESULT:0.9; echo boom >&2; exit 3\n"),
        cand("garbage", 3, 0, "echo 'score is high'\n"),
        cand("slow", 4, 0, "sleep 5; echo RESULT:1.0\n"),
    ];
    let start = Instant::now();
    let results = run_candidates(
        &cands,
        &data_files(dir.path()),
        &dir.path().join("runs"),
        &sh(0.5),
    )
    .unwrap();
    assert!(
        start.elapsed().as_secs_f64() < 4.0,
        "timeout did not kill the child"
    );
    let statuses: Vec<(RunStatus, Option<f64>)> =
        results.iter().map(|r| (r.status, r.score)).collect();
    assert_eq!(
        statuses,
        [
            (RunStatus::Ok, Some(0.5)),
            (RunStatus::Crash, None),
            (RunStatus::ParseFailure, None),
            (RunStatus::Timeout, None)
        ]
    );
    let crash_log = std::fs::read_to_string(&results[1].log_path).unwrap();
    assert!(crash_log.contains("boom") && crash_log.contains("RESULT:0.9"));
    assert!(results.iter().all(|r| r.log_path.exists()));
}

#[test]
fn parallel_runs_merge_in_candidate_order() {
    let dir = tempfile::tempdir().unwrap();
    let cands: Vec<CandidatePipeline> = (0..6)
        .map(|i| {
            cand(
                &format!("c{i}"),
                i + 1,
                0,
                &format!("sleep 0.{}; echo RESULT:{i}\n", 6 - i),
            )
        })
        .collect();
    let exec = ExecutorConfig {
        max_parallel: 3,
        ..sh(10.0)
    };
    let results = run_candidates(
        &cands,
        &data_files(dir.path()),
        &dir.path().join("runs"),
        &exec,
    )
    .unwrap();
    let got: Vec<(String, Option<f64>)> = results
        .into_iter()
        .map(|r| (r.script_id, r.score))
        .collect();
    let want: Vec<(String, Option<f64>)> =
        (0..6).map(|i| (format!("c{i}"), Some(i as f64))).collect();
    assert_eq!(got, want);
}

#[test]
fn exhausted_budget_skips_remaining_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let cands = [
        cand("first", 1, 0, "sleep 0.5; echo RESULT:0.1\n"),
        cand("second", 2, 0, "echo RESULT:0.2\n"),
    ];
    let exec = ExecutorConfig {
        budget_secs: 0.3,
        ..sh(10.0)
    };
    let results = run_candidates(
        &cands,
        &data_files(dir.path()),
        &dir.path().join("runs"),
        &exec,
    )
    .unwrap();
    assert_eq!(results[0].status, RunStatus::Timeout);
    assert_eq!(results[1].status, RunStatus::Timeout);
}

#[test]
fn selection_examples() {
    let cands = [
        cand("a", 1, 0, ""),
        cand("b", 2, 0, ""),
        cand("c", 3, 0, ""),
    ];
    let scores = [
        result("a", RunStatus::Ok, Some(0.3)),
        result("b", RunStatus::Ok, Some(0.9)),
        result("c", RunStatus::Ok, Some(0.7)),
    ];
    assert_eq!(select_best(&scores, &cands).unwrap().best, "b");
    let tie = [
        result("b", RunStatus::Ok, Some(0.9)),
        result("a", RunStatus::Ok, Some(0.9)),
    ];
    assert_eq!(select_best(&tie, &cands).unwrap().best, "a");
    let mixed = [
        result("a", RunStatus::Crash, None),
        result("b", RunStatus::Ok, Some(0.1)),
    ];
    let o = select_best(&mixed, &cands).unwrap();
    assert_eq!((o.best.as_str(), o.validation_score), ("b", 0.1));
    let failed = [
        result("a", RunStatus::Crash, None),
        result("b", RunStatus::Timeout, None),
    ];
    match select_best(&failed, &cands) {
        Err(ValidationError::AllCandidatesFailed { diagnostics }) => {
            assert_eq!(diagnostics.len(), 2);
            assert!(diagnostics[0].contains("a.log"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn hyperparameter_index_breaks_rank_ties() {
    let cands = [
        cand("r1h1", 1, 1, ""),
        cand("r1h0", 1, 0, ""),
        cand("r0", 2, 0, ""),
    ];
    let rs = [
        result("r1h1", RunStatus::Ok, Some(0.5)),
        result("r1h0", RunStatus::Ok, Some(0.5)),
        result("r0", RunStatus::Ok, Some(0.5)),
    ];
    assert_eq!(select_best(&rs, &cands).unwrap().best, "r1h0");
}

proptest! {
    #[test]
    fn selection_ignores_arrival_order(
        scores in prop::collection::vec(prop::option::of(0u8..5), 1..12),
        seed in any::<u64>(),
    ) {
        let cands: Vec<CandidatePipeline> =
            (0..scores.len()).map(|i| cand(&format!("s{i:02}"), i / 3 + 1, i % 3, "")).collect();
        let results: Vec<EvalResult> = scores
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                Some(v) => result(&format!("s{i:02}"), RunStatus::Ok, Some(*v as f64 / 4.0)),
                None => result(&format!("s{i:02}"), RunStatus::Crash, None),
            })
            .collect();
        let mut shuffled = results.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = select_best(&results, &cands);
        let b = select_best(&shuffled, &cands);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a, &b);
                for r in &results {
                    if let Some(s) = r.score {
                        prop_assert!(a.validation_score >= s);
                    }
                }
            }
            (Err(_), Err(_)) => prop_assert!(scores.iter().all(Option::is_none)),
            _ => prop_assert!(false),
        }
    }
}

fn tiny_dataset() -> Dataset {
    let header = vec!["x".to_string(), "y".to_string()];
    let rows = (0..10)
        .map(|i| vec![i.to_string(), (i % 2).to_string()])
        .collect();
    Dataset::from_records(
        header,
        rows,
        &["y".to_string()],
        Some(TaskKind::Classification),
        &KindConfig::default(),
    )
    .unwrap()
}

#[test]
fn finalize_cases() {
    let dir = tempfile::tempdir().unwrap();
    let d = tiny_dataset();
    let good = cand(
        "best",
        1,
        0,
        "test -f training.csv && test -f test.csv && echo RESULT:0.625\n",
    );
    assert_eq!(
        finalize(&good, &d, None, &dir.path().join("f0"), &sh(5.0)).unwrap(),
        None
    );
    let r = finalize(&good, &d, Some(&d), &dir.path().join("f1"), &sh(5.0))
        .unwrap()
        .unwrap();
    assert_eq!(r.score, Some(0.625));
    let bad = cand("best", 1, 0, "echo oops >&2; exit 1\n");
    match finalize(&bad, &d, Some(&d), &dir.path().join("f2"), &sh(5.0)) {
        Err(ValidationError::FinalizeFailed { status, log_path }) => {
            assert_eq!(status, RunStatus::Crash);
            assert!(std::fs::read_to_string(log_path).unwrap().contains("oops"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn result_marker_contract() {
    assert_eq!(parse_result_line("RESULT:0.5"), Some(0.5));
    assert_eq!(parse_result_line("0.5\nRESULT:0.25\n"), Some(0.25));
    assert_eq!(parse_result_line("RESULT:inf\n"), None);
    assert_eq!(parse_result_line("RESULT:\n"), None);
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/harness")
        .join(name)
}

#[test]
fn harness_reports_round_trip() {
    let cases = [
        (
            "ok.json",
            "c01_h00_RandomForest",
            RunStatus::Ok,
            Some(0.8125),
        ),
        ("timeout.json", "c02_h01_XGBoost", RunStatus::Timeout, None),
        ("crash.json", "c03_h00_CatBoost", RunStatus::Crash, None),
        (
            "parse_failure.json",
            "c01_h01_RandomForest",
            RunStatus::ParseFailure,
            None,
        ),
    ];
    for (file, id, status, score) in cases {
        let text = std::fs::read_to_string(fixture(file)).unwrap();
        let report = HarnessReport::from_json(&text).unwrap();
        let r = report.to_eval_result(PathBuf::from("run.log"));
        assert_eq!(
            (r.script_id.as_str(), r.status, r.score),
            (id, status, score),
            "{file}"
        );
        assert_eq!(r.duration.to_bits(), report.duration.to_bits());
        let back = HarnessReport::from_eval_result(&r, &report.script, &report.stderr_tail);
        assert_eq!(
            serde_json::to_string_pretty(&back).unwrap() + "\n",
            text,
            "{file}"
        );
    }
}

#[test]
fn malformed_harness_reports_are_rejected() {
    let text = std::fs::read_to_string(fixture("bad_ok_without_score.json")).unwrap();
    assert!(matches!(
        HarnessReport::from_json(&text),
        Err(ValidationError::HarnessReport(_))
    ));
    let extra = r#"{"script":"a.py","status":"Crash","score":0.5,"duration":1.0}"#;
    assert!(HarnessReport::from_json(extra).is_err());
    let unknown = r#"{"script":"a.py","status":"Exploded","score":null,"duration":1.0}"#;
    assert!(HarnessReport::from_json(unknown).is_err());
}
