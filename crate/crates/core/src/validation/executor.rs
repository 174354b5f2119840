//! Runs candidate scripts through an external command.

use std::fs::File;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::ValidationError;
use crate::instantiate::{CandidatePipeline, RESULT_MARKER};

/// Inner training file name inside a candidate workdir.
pub const TRAINING_CSV: &str = "training.csv";
/// Inner evaluation file name inside a candidate workdir.
pub const TEST_CSV: &str = "test.csv";
/// Combined stdout/stderr log inside a candidate workdir.
pub const RUN_LOG: &str = "run.log";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutorConfig {
    /// Shell command; `{script}` and `{workdir}` are replaced by quoted
    /// absolute paths and `{timeout}` by the per-candidate timeout.
    pub command_template: String,
    pub timeout_secs: f64,
    pub max_parallel: usize,
    /// Wall-clock budget for a whole batch.
    pub budget_secs: f64,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        ExecutorConfig {
            command_template: "cd {workdir} && python3 {script}".into(),
            timeout_secs: 600.0,
            max_parallel: 1,
            budget_secs: 3600.0,
        }
    }
}

impl ExecutorConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let bad = |m: &str| Err(ValidationError::InvalidExecutor(m.to_string()));
        for p in ["{script}", "{workdir}"] {
            if !self.command_template.contains(p) {
                return bad(&format!("command template lacks the {p} placeholder"));
            }
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad("timeout must be positive");
        }
        if !(self.budget_secs > 0.0) {
            return bad("budget must be positive");
        }
        if self.max_parallel == 0 {
            return bad("max_parallel must be at least 1");
        }
        Ok(())
    }

    pub fn command_for(&self, script: &Path, workdir: &Path, timeout: f64) -> String {
        self.command_template
            .replace("{script}", &shell_quote(&script.to_string_lossy()))
            .replace("{workdir}", &shell_quote(&workdir.to_string_lossy()))
            .replace("{timeout}", &format!("{}", timeout.ceil() as u64))
    }
}

fn shell_quote(s: &str) -> String {
    if !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || "/._-+=:,@".contains(c))
    {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Ok,
    Crash,
    Timeout,
    ParseFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub script_id: String,
    pub status: RunStatus,
    /// Present iff `status` is `Ok`.
    pub score: Option<f64>,
    /// Wall-clock seconds.
    pub duration: f64,
    pub log_path: PathBuf,
}

/// Score on the final non-blank stdout line, which must read
/// `RESULT:<float>` with a finite value.
pub fn parse_result_line(stdout: &str) -> Option<f64> {
    let last = stdout.lines().rev().find(|l| !l.trim().is_empty())?;
    let v: f64 = last
        .trim()
        .strip_prefix(RESULT_MARKER)?
        .trim()
        .parse()
        .ok()?;
    v.is_finite().then_some(v)
}

/// Input files shared by every candidate of a batch.
#[derive(Debug, Clone)]
pub struct DataFiles {
    pub training: PathBuf,
    pub test: PathBuf,
}

/// Executes one script in `workdir`, which must already hold the data.
pub fn run_script(
    script_id: &str,
    script: &Path,
    workdir: &Path,
    exec: &ExecutorConfig,
    timeout: f64,
) -> Result<EvalResult, ValidationError> {
    let command = exec.command_for(script, workdir, timeout);
    let out_path = workdir.join("stdout.txt");
    let err_path = workdir.join("stderr.txt");
    let start = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .current_dir(workdir)
        .stdin(Stdio::null())
        .stdout(File::create(&out_path)?)
        .stderr(File::create(&err_path)?)
        .process_group(0)
        .spawn()?;
    let limit = Duration::from_secs_f64(timeout);
    let exit: Option<ExitStatus> = loop {
        if let Some(s) = child.try_wait()? {
            break Some(s);
        }
        if start.elapsed() >= limit {
            // The whole group, so grandchildren of the shell die too.
            unsafe {
                libc::kill(-(child.id() as i32), libc::SIGKILL);
            }
            child.wait()?;
            break None;
        }
        std::thread::sleep(Duration::from_millis(10));
    };
    let duration = start.elapsed().as_secs_f64();
    let stdout = std::fs::read_to_string(&out_path).unwrap_or_default();
    let stderr = std::fs::read_to_string(&err_path).unwrap_or_default();
    let (status, score) = match exit {
        None => (RunStatus::Timeout, None),
        Some(s) if !s.success() => (RunStatus::Crash, None),
        Some(_) => match parse_result_line(&stdout) {
            Some(v) => (RunStatus::Ok, Some(v)),
            None => (RunStatus::ParseFailure, None),
        },
    };
    let log_path = workdir.join(RUN_LOG);
    let exit_text = exit.map_or("killed after timeout".to_string(), |s| s.to_string());
    std::fs::write(
        &log_path,
        format!("$ {command}\n# {exit_text}; status {status:?}\n--- stdout ---\n{stdout}--- stderr ---\n{stderr}"),
    )?;
    Ok(EvalResult {
        script_id: script_id.to_string(),
        status,
        score,
        duration,
        log_path,
    })
}

fn prepare_workdir(
    dir: &Path,
    cand: &CandidatePipeline,
    data: &DataFiles,
) -> Result<PathBuf, ValidationError> {
    std::fs::create_dir_all(dir)?;
    std::fs::copy(&data.training, dir.join(TRAINING_CSV))?;
    std::fs::copy(&data.test, dir.join(TEST_CSV))?;
    let script = dir.join(cand.file_name());
    std::fs::write(&script, &cand.source)?;
    Ok(std::fs::canonicalize(script)?)
}

/// Runs one candidate in `root/<script_id>/`.
pub fn run_candidate(
    cand: &CandidatePipeline,
    data: &DataFiles,
    root: &Path,
    exec: &ExecutorConfig,
    timeout: f64,
) -> Result<EvalResult, ValidationError> {
    let dir = root.join(&cand.script_id);
    let script = prepare_workdir(&dir, cand, data)?;
    run_script(
        &cand.script_id,
        &script,
        &std::fs::canonicalize(&dir)?,
        exec,
        timeout,
    )
}

/// Runs every candidate, up to `max_parallel` at once, each in its own
/// workdir under `root`. Results come back in candidate order. Failures
/// of individual candidates are statuses; only setup I/O errors abort.
/// Candidates not started before the budget runs out are reported as
/// timeouts.
pub fn run_candidates(
    cands: &[CandidatePipeline],
    data: &DataFiles,
    root: &Path,
    exec: &ExecutorConfig,
) -> Result<Vec<EvalResult>, ValidationError> {
    exec.validate()?;
    std::fs::create_dir_all(root)?;
    let start = Instant::now();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<EvalResult, ValidationError>>>> =
        Mutex::new((0..cands.len()).map(|_| None).collect());
    let workers = exec.max_parallel.min(cands.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cand) = cands.get(i) else { break };
                let remaining = exec.budget_secs - start.elapsed().as_secs_f64();
                let r = if remaining <= 0.0 {
                    budget_exhausted(cand, root)
                } else {
                    log::info!("running {}", cand.script_id);
                    run_candidate(cand, data, root, exec, exec.timeout_secs.min(remaining))
                };
                if let Ok(r) = &r {
                    log::info!(
                        "{}: {:?} {:?} in {:.1}s",
                        r.script_id,
                        r.status,
                        r.score,
                        r.duration
                    );
                }
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

fn budget_exhausted(cand: &CandidatePipeline, root: &Path) -> Result<EvalResult, ValidationError> {
    let dir = root.join(&cand.script_id);
    std::fs::create_dir_all(&dir)?;
    let log_path = dir.join(RUN_LOG);
    std::fs::write(&log_path, "not started: batch budget exhausted\n")?;
    Ok(EvalResult {
        script_id: cand.script_id.clone(),
        status: RunStatus::Timeout,
        score: None,
        duration: 0.0,
        log_path,
    })
}
