use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use pipeforge::corpus::{generate_synthetic_corpus, parse_corpus, Taxonomy};
use pipeforge::engine::{self, EngineError, SynthesisConfig};
use pipeforge::instantiate::Metric;
use pipeforge::tabular::{load_csv, LoadOptions, TaskKind};
use pipeforge::validation::{stub_score, ExecutorConfig};
use pipeforge::{SkeletonPredictorBundle, TrainConfig};

#[derive(Parser)]
#[command(
    name = "pipeforge",
    version,
    about = "Synthesize ML pipeline scripts for tabular datasets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a predictor bundle from a meta-corpus.
    Train(TrainArgs),
    /// Synthesize, validate and select a pipeline for a dataset.
    Synthesize(SynthesizeArgs),
    /// Write the synthetic meta-corpus.
    GenCorpus(GenCorpusArgs),
    /// Test executor: prints a scripted or hash-derived score for a script.
    StubExec(StubExecArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pb_threshold: Option<f64>,
    #[arg(long)]
    min_support: Option<f64>,
    /// JSON file supplying any of the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Train a bundle on the fly instead of loading one.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Target column; repeat for several.
    #[arg(long)]
    target: Vec<String>,
    /// `c` for classification, `r` for regression; inferred when absent.
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    fe_cutoff: Option<f64>,
    #[arg(long)]
    pb_threshold: Option<f64>,
    #[arg(long)]
    min_support: Option<f64>,
    /// Executor command with `{script}` and `{workdir}` placeholders.
    #[arg(long = "exec")]
    exec: Option<String>,
    /// Per-candidate timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Wall-clock budget for all candidates, in seconds.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    max_parallel: Option<usize>,
    /// macro_f1, r2 or accuracy.
    #[arg(long)]
    metric: Option<String>,
    /// Template pack directory.
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file supplying any of the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenCorpusArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct StubExecArgs {
    script: PathBuf,
    #[arg(long)]
    workdir: Option<PathBuf>,
    /// JSON object from script id to a score or to one of
    /// "crash", "garbage", "timeout".
    #[arg(long)]
    scores: Option<PathBuf>,
}

/// Values a config file may provide.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    bundle: Option<PathBuf>,
    corpus: Option<PathBuf>,
    train: Option<PathBuf>,
    test: Option<PathBuf>,
    target: Option<Vec<String>>,
    task: Option<String>,
    k: Option<usize>,
    fe_cutoff: Option<f64>,
    pb_threshold: Option<f64>,
    min_support: Option<f64>,
    exec: Option<String>,
    timeout: Option<f64>,
    budget: Option<f64>,
    max_parallel: Option<usize>,
    metric: Option<String>,
    templates: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn train_config(seed: Option<u64>, pb: Option<f64>, support: Option<f64>) -> TrainConfig {
    let mut cfg = TrainConfig::default();
    cfg.seed = seed.unwrap_or(cfg.seed);
    cfg.pb_threshold = pb.unwrap_or(cfg.pb_threshold);
    cfg.min_support = support.unwrap_or(cfg.min_support);
    cfg
}

fn load_corpus(path: &Path) -> Result<pipeforge::MetaCorpus, Failure> {
    parse_corpus(path, &Taxonomy::builtin()).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_train(a: TrainArgs) -> Result<(), Failure> {
    let f = read_config(a.config.as_deref())?;
    let corpus_path = a
        .corpus
        .or(f.corpus)
        .ok_or_else(|| usage("--corpus is required"))?;
    let out = a.out.or(f.out).ok_or_else(|| usage("--out is required"))?;
    let cfg = train_config(
        a.seed.or(f.seed),
        a.pb_threshold.or(f.pb_threshold),
        a.min_support.or(f.min_support),
    );
    let corpus = load_corpus(&corpus_path)?;
    let (bundle, report) = engine::train(&corpus, &cfg, &out)?;
    for fe in &report.fe {
        match (&fe.constant, fe.max_depth, fe.cv_macro_f1) {
            (Some(why), _, _) => println!("{:<18} constant: {why}", fe.label),
            (None, Some(d), Some(f1)) => {
                println!("{:<18} depth {d}, cv macro-F1 {f1:.3}", fe.label)
            }
            _ => println!("{:<18} trained", fe.label),
        }
    }
    println!(
        "bundle {} (corpus {}, {} records)",
        out.display(),
        bundle.corpus_hash,
        bundle.corpus_records
    );
    Ok(())
}

fn cmd_synthesize(a: SynthesizeArgs) -> Result<(), Failure> {
    let f = read_config(a.config.as_deref())?;
    let bundle_path = a.bundle.or(f.bundle);
    let corpus_path = a.corpus.or(f.corpus);
    let train_path = a
        .train
        .or(f.train)
        .ok_or_else(|| usage("--train is required"))?;
    let test_path = a.test.or(f.test);
    let targets = if a.target.is_empty() {
        f.target.unwrap_or_default()
    } else {
        a.target
    };
    if targets.is_empty() {
        return Err(usage("--target is required"));
    }
    let task = match a.task.or(f.task) {
        Some(t) => Some(
            TaskKind::from_code(&t)
                .ok_or_else(|| usage(format!("--task must be c or r, got `{t}`")))?,
        ),
        None => None,
    };
    let metric = match a.metric.or(f.metric) {
        Some(m) => Some(m.parse::<Metric>().map_err(usage)?),
        None => None,
    };
    let defaults = SynthesisConfig::default();
    let exec_defaults = ExecutorConfig::default();
    let cfg = SynthesisConfig {
        k: a.k.or(f.k).unwrap_or(defaults.k),
        fe_cutoff: a.fe_cutoff.or(f.fe_cutoff).unwrap_or(defaults.fe_cutoff),
        seed: a.seed.or(f.seed).unwrap_or(defaults.seed),
        metric,
        executor: ExecutorConfig {
            command_template: a.exec.or(f.exec).unwrap_or(exec_defaults.command_template),
            timeout_secs: a
                .timeout
                .or(f.timeout)
                .unwrap_or(exec_defaults.timeout_secs),
            max_parallel: a
                .max_parallel
                .or(f.max_parallel)
                .unwrap_or(exec_defaults.max_parallel),
            budget_secs: a.budget.or(f.budget).unwrap_or(exec_defaults.budget_secs),
        },
        templates: a.templates.or(f.templates),
    };
    cfg.validate()?;
    let out = a
        .out
        .or(f.out)
        .unwrap_or_else(|| PathBuf::from("pipeforge_out"));

    let bundle = match (bundle_path, corpus_path) {
        (Some(b), None) => {
            SkeletonPredictorBundle::load(&b).map_err(|e| usage(format!("{}: {e}", b.display())))?
        }
        (None, Some(c)) => {
            let tc = train_config(
                Some(cfg.seed),
                a.pb_threshold.or(f.pb_threshold),
                a.min_support.or(f.min_support),
            );
            SkeletonPredictorBundle::train(&load_corpus(&c)?, &tc).0
        }
        _ => return Err(usage("exactly one of --bundle and --corpus is required")),
    };

    let opts = LoadOptions::default();
    let data_err = |p: &Path, e: pipeforge::tabular::DataError| Failure {
        code: 3,
        message: format!("{}: {e}", p.display()),
    };
    let train =
        load_csv(&train_path, &targets, task, &opts).map_err(|e| data_err(&train_path, e))?;
    let test = match &test_path {
        Some(p) => {
            Some(load_csv(p, &targets, Some(train.task), &opts).map_err(|e| data_err(p, e))?)
        }
        None => None,
    };
    let summary = engine::synthesize(&bundle, &train, test.as_ref(), &out, &cfg)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    Ok(())
}

fn cmd_gen_corpus(a: GenCorpusArgs) -> Result<(), Failure> {
    let corpus = generate_synthetic_corpus(a.seed, a.n, &Taxonomy::builtin());
    corpus
        .write(&a.out)
        .map_err(|e| usage(format!("{}: {e}", a.out.display())))?;
    println!("{} records written to {}", corpus.len(), a.out.display());
    Ok(())
}

fn cmd_stub_exec(a: StubExecArgs) -> Result<(), Failure> {
    let script = match &a.workdir {
        Some(w) if a.script.is_relative() => w.join(&a.script),
        _ => a.script.clone(),
    };
    let source = std::fs::read_to_string(&script)
        .map_err(|e| usage(format!("{}: {e}", script.display())))?;
    let id = script
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let scripted: BTreeMap<String, serde_json::Value> = match &a.scores {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => BTreeMap::new(),
    };
    let score = match scripted.get(&id) {
        None => stub_score(&source),
        Some(serde_json::Value::Number(n)) => n.as_f64().unwrap_or(0.0),
        Some(serde_json::Value::String(s)) if s == "crash" => {
            eprintln!("stub: scripted crash for {id}");
            return Err(Failure {
                code: 1,
                message: format!("scripted crash for {id}"),
            });
        }
        Some(serde_json::Value::String(s)) if s == "garbage" => {
            println!("no score here");
            return Ok(());
        }
        Some(serde_json::Value::String(s)) if s == "timeout" => loop {
            std::thread::sleep(std::time::Duration::from_secs(3600));
        },
        Some(other) => {
            return Err(usage(format!(
                "unsupported scripted value {other} for {id}"
            )))
        }
    };
    println!("RESULT:{score}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::GenCorpus(a) => cmd_gen_corpus(a),
        Command::StubExec(a) => cmd_stub_exec(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
