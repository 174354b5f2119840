use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_pipeforge");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_csv(path: &Path, rows: std::ops::Range<usize>) {
    let mut text = String::from("amount,qty,city,label\n");
    for i in rows {
        let amount = if i % 8 == 0 {
            String::new()
        } else {
            format!("{:.2}", (i * 37 % 101) as f64 * 1.25)
        };
        let city = ["north", "south", "east"][i % 3];
        let label = if (i * 37 % 101) > 70 || i % 11 == 0 {
            "yes"
        } else {
            "no"
        };
        text.push_str(&format!("{amount},{},{city},{label}\n", i % 5));
    }
    std::fs::write(path, text).unwrap();
}

struct Fixture {
    bundle: PathBuf,
    train: PathBuf,
    test: PathBuf,
}

/// A trained bundle and a small dataset shared by all tests.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-fixture");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        let corpus = dir.join("corpus.jsonl");
        let bundle = dir.join("bundle.json");
        let o = run(&[
            "gen-corpus",
            "--out",
            corpus.to_str().unwrap(),
            "--n",
            "300",
            "--seed",
            "3",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let o = run(&[
            "train",
            "--corpus",
            corpus.to_str().unwrap(),
            "--out",
            bundle.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let (train, test) = (dir.join("train.csv"), dir.join("test.csv"));
        write_csv(&train, 0..120);
        write_csv(&test, 120..160);
        Fixture {
            bundle,
            train,
            test,
        }
    })
}

fn stub_exec(scores: Option<&Path>) -> String {
    let mut cmd = format!("\"{BIN}\" stub-exec {{script}} --workdir {{workdir}}");
    if let Some(s) = scores {
        cmd.push_str(&format!(" --scores \"{}\"", s.display()));
    }
    cmd
}

fn synthesize(out: &Path, extra: &[&str]) -> Output {
    let f = fixture();
    let mut args = vec![
        "synthesize",
        "--bundle",
        f.bundle.to_str().unwrap(),
        "--train",
        f.train.to_str().unwrap(),
        "--target",
        "label",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_bundle_is_a_usage_error() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "synthesize",
        "--bundle",
        dir.path().join("nope.json").to_str().unwrap(),
        "--train",
        f.train.to_str().unwrap(),
        "--target",
        "label",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));
}

#[test]
fn missing_target_column_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let o = run(&[
        "synthesize",
        "--bundle",
        f.bundle.to_str().unwrap(),
        "--train",
        f.train.to_str().unwrap(),
        "--target",
        "churn",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn all_candidates_failing_exits_one_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = synthesize(
        dir.path(),
        &["--exec", "cd {workdir} && test -f {script} && exit 7"],
    );
    assert_eq!(code(&o), 1);
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["ok_candidates"], 0);
    assert_eq!(summary["best"], Value::Null);
    let results = read_json(&dir.path().join("results.json"));
    assert!(results
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["status"] == "Crash"));
}

#[test]
fn scripted_scores_pick_the_winner() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = synthesize(&first, &["--exec", &stub_exec(None)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = read_json(&first.join("candidates/manifest.json"));
    let ids: Vec<&str> = manifest
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["script_id"].as_str().unwrap())
        .collect();
    assert!(ids.len() >= 3);

    // the last candidate wins, the first crashes, the second prints garbage
    let scores = dir.path().join("scores.json");
    let mut map = serde_json::Map::new();
    for (i, id) in ids.iter().enumerate() {
        map.insert(id.to_string(), serde_json::json!(0.1 + i as f64 / 100.0));
    }
    map.insert(ids[0].to_string(), "crash".into());
    map.insert(ids[1].to_string(), "garbage".into());
    std::fs::write(&scores, Value::Object(map).to_string()).unwrap();

    let second = dir.path().join("second");
    let o = synthesize(&second, &["--exec", &stub_exec(Some(&scores))]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&second.join("summary.json"));
    assert_eq!(summary["best"], *ids.last().unwrap());
    assert_eq!(summary["ok_candidates"], ids.len() - 2);
    let results = read_json(&second.join("results.json"));
    assert_eq!(results[0]["status"], "Crash");
    assert_eq!(results[1]["status"], "ParseFailure");
}

#[test]
fn identical_runs_give_identical_artifacts() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = synthesize(
            out,
            &[
                "--test",
                f.test.to_str().unwrap(),
                "--exec",
                &stub_exec(None),
                "--seed",
                "5",
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in [
        "summary.json",
        "meta_features.json",
        "skeletons.json",
        "candidates/manifest.json",
        "best_pipeline.py",
        "data/inner_training.csv",
        "data/inner_test.csv",
    ] {
        let (x, y) = (
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
        );
        assert!(x == y, "{file} differs");
    }
    let summary = read_json(&a.join("summary.json"));
    assert!(summary["final_test_score"].is_f64());
    assert_eq!(summary["test_rows"], 40);
}

#[test]
fn one_record_corpus_trains_constant_predictors() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("one.jsonl");
    let bundle = dir.path().join("bundle.json");
    assert_eq!(
        code(&run(&[
            "gen-corpus",
            "--out",
            corpus.to_str().unwrap(),
            "--n",
            "1"
        ])),
        0
    );
    let o = run(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        bundle.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("constant"));
    assert!(bundle.exists() && dir.path().join("bundle.report.json").exists());
}

#[test]
fn flags_override_the_config_file() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_config");
    let config = dir.path().join("config.json");
    let cfg = serde_json::json!({
        "bundle": f.bundle,
        "train": f.train,
        "target": ["label"],
        "k": 1,
        "out": out,
        "exec": stub_exec(None),
    });
    std::fs::write(&config, cfg.to_string()).unwrap();
    let o = run(&[
        "synthesize",
        "--config",
        config.to_str().unwrap(),
        "--k",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let skeletons = read_json(&out.join("skeletons.json"));
    assert_eq!(skeletons["skeletons"].as_array().unwrap().len(), 2);

    std::fs::write(&config, r#"{"colour": "blue"}"#).unwrap();
    assert_eq!(
        code(&run(&["synthesize", "--config", config.to_str().unwrap()])),
        2
    );
}

#[test]
fn bad_executor_template_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = synthesize(dir.path(), &["--exec", "python3 run.py"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("{script}"));
    assert!(!dir.path().join("candidates").exists());
}
