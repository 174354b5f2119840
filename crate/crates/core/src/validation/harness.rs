//! Reports written by an external script harness.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::executor::{EvalResult, RunStatus};
use super::ValidationError;

/// JSON report of one harness run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessReport {
    pub script: String,
    pub status: RunStatus,
    pub score: Option<f64>,
    pub duration: f64,
    #[serde(default)]
    pub stderr_tail: String,
}

impl HarnessReport {
    pub fn from_json(text: &str) -> Result<HarnessReport, ValidationError> {
        let r: HarnessReport = serde_json::from_str(text)
            .map_err(|e| ValidationError::HarnessReport(e.to_string()))?;
        r.check()?;
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<HarnessReport, ValidationError> {
        HarnessReport::from_json(&std::fs::read_to_string(path)?)
    }

    fn check(&self) -> Result<(), ValidationError> {
        let bad = |m: String| Err(ValidationError::HarnessReport(m));
        match (self.status, self.score) {
            (RunStatus::Ok, None) => bad("status Ok without a score".into()),
            (RunStatus::Ok, Some(s)) if !s.is_finite() => bad(format!("non-finite score {s}")),
            (s, Some(_)) if s != RunStatus::Ok => bad(format!("status {s:?} carries a score")),
            _ if !(self.duration >= 0.0) => bad(format!("negative duration {}", self.duration)),
            _ => Ok(()),
        }
    }

    /// Script id is the file stem of the reported script.
    pub fn to_eval_result(&self, log_path: PathBuf) -> EvalResult {
        let script_id = Path::new(&self.script)
            .file_stem()
            .map_or_else(|| self.script.clone(), |s| s.to_string_lossy().into_owned());
        EvalResult {
            script_id,
            status: self.status,
            score: self.score,
            duration: self.duration,
            log_path,
        }
    }

    pub fn from_eval_result(r: &EvalResult, script: &str, stderr_tail: &str) -> HarnessReport {
        HarnessReport {
            script: script.to_string(),
            status: r.status,
            score: r.score,
            duration: r.duration,
            stderr_tail: stderr_tail.to_string(),
        }
    }
}
