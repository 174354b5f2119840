use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::executor::{EvalResult, RunStatus};
use super::ValidationError;
use crate::instantiate::CandidatePipeline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub best: String,
    pub validation_score: f64,
    /// In candidate order.
    pub all_results: Vec<EvalResult>,
    pub final_test_score: Option<f64>,
}

/// Highest Ok score wins; ties go to the lower model rank, then the lower
/// hyperparameter index, then the smaller script id. The arrival order of
/// `results` does not matter.
pub fn select_best(
    results: &[EvalResult],
    cands: &[CandidatePipeline],
) -> Result<SelectionOutcome, ValidationError> {
    let position: HashMap<&str, usize> = cands
        .iter()
        .enumerate()
        .map(|(i, c)| (c.script_id.as_str(), i))
        .collect();
    let key = |r: &EvalResult| {
        let c = position.get(r.script_id.as_str()).map(|&i| &cands[i]);
        (
            c.map_or(usize::MAX, |c| c.model_rank),
            c.map_or(usize::MAX, |c| c.hp_index),
        )
    };
    let better = |a: &EvalResult, b: &EvalResult| -> Ordering {
        // Less means `a` is preferred.
        b.score
            .unwrap()
            .total_cmp(&a.score.unwrap())
            .then_with(|| key(a).cmp(&key(b)))
            .then_with(|| a.script_id.cmp(&b.script_id))
    };
    let best = results
        .iter()
        .filter(|r| r.status == RunStatus::Ok && r.score.is_some())
        .min_by(|a, b| better(a, b));
    let Some(best) = best else {
        let diagnostics = results
            .iter()
            .map(|r| {
                format!(
                    "{}: {:?} (log {})",
                    r.script_id,
                    r.status,
                    r.log_path.display()
                )
            })
            .collect();
        return Err(ValidationError::AllCandidatesFailed { diagnostics });
    };
    let mut all_results = results.to_vec();
    all_results.sort_by_key(|r| {
        (
            position
                .get(r.script_id.as_str())
                .copied()
                .unwrap_or(usize::MAX),
            r.script_id.clone(),
        )
    });
    Ok(SelectionOutcome {
        best: best.script_id.clone(),
        validation_score: best.score.unwrap(),
        all_results,
        final_test_score: None,
    })
}
