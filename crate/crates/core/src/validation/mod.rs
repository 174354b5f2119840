//! Candidate evaluation on an internal split and final scoring.

mod executor;
mod harness;
mod select;
mod split;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use executor::{
    parse_result_line, run_candidate, run_candidates, run_script, DataFiles, EvalResult,
    ExecutorConfig, RunStatus, RUN_LOG, TEST_CSV, TRAINING_CSV,
};
pub use harness::HarnessReport;
pub use select::{select_best, SelectionOutcome};
pub use split::{internal_split, INNER_TRAIN_RATIO, MIN_ROWS_PER_CLASS, MIN_SPLIT_ROWS};

use crate::instantiate::CandidatePipeline;
use crate::tabular::{DataError, Dataset};

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("invalid executor configuration: {0}")]
    InvalidExecutor(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("all candidates failed:\n  {}", diagnostics.join("\n  "))]
    AllCandidatesFailed { diagnostics: Vec<String> },
    #[error("final run of the selected pipeline ended with {status:?}; see {}", log_path.display())]
    FinalizeFailed {
        status: RunStatus,
        log_path: PathBuf,
    },
    #[error("malformed harness report: {0}")]
    HarnessReport(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Trains the selected pipeline on the full training data and scores it on
/// the held-out test set, in `root`. Without a test set there is nothing to
/// run and the result is `None`.
pub fn finalize(
    best: &CandidatePipeline,
    train: &Dataset,
    test: Option<&Dataset>,
    root: &Path,
    exec: &ExecutorConfig,
) -> Result<Option<EvalResult>, ValidationError> {
    let Some(test) = test else { return Ok(None) };
    exec.validate()?;
    std::fs::create_dir_all(root)?;
    train.write_csv(&root.join(TRAINING_CSV))?;
    test.write_csv(&root.join(TEST_CSV))?;
    let script = root.join(best.file_name());
    std::fs::write(&script, &best.source)?;
    let r = run_script(
        &best.script_id,
        &std::fs::canonicalize(&script)?,
        &std::fs::canonicalize(root)?,
        exec,
        exec.timeout_secs,
    )?;
    if r.status != RunStatus::Ok {
        return Err(ValidationError::FinalizeFailed {
            status: r.status,
            log_path: r.log_path,
        });
    }
    Ok(Some(r))
}

/// Deterministic pseudo-score in [0, 1) derived from a script's text; lets
/// the whole evaluation path run without a data-science runtime.
pub fn stub_score(source: &str) -> f64 {
    let h = Sha256::digest(source.as_bytes());
    let x = u64::from_be_bytes(h[..8].try_into().expect("digest is 32 bytes"));
    (x >> 11) as f64 / (1u64 << 53) as f64
}
