use std::collections::BTreeSet;

/// Macro-averaged F1 over the union of labels seen in `truth` and `pred`
/// (a label with no true and no predicted instances is not averaged).
pub fn macro_f1<T: Ord + Clone>(truth: &[T], pred: &[T]) -> f64 {
    assert_eq!(truth.len(), pred.len());
    let labels: BTreeSet<&T> = truth.iter().chain(pred.iter()).collect();
    if labels.is_empty() {
        return 0.0;
    }
    let total: f64 = labels
        .iter()
        .map(|&l| {
            let tp = truth
                .iter()
                .zip(pred)
                .filter(|(t, p)| *t == l && *p == l)
                .count() as f64;
            let fp = truth
                .iter()
                .zip(pred)
                .filter(|(t, p)| *t != l && *p == l)
                .count() as f64;
            let fn_ = truth
                .iter()
                .zip(pred)
                .filter(|(t, p)| *t == l && *p != l)
                .count() as f64;
            let denom = 2.0 * tp + fp + fn_;
            if denom == 0.0 {
                0.0
            } else {
                2.0 * tp / denom
            }
        })
        .sum();
    total / labels.len() as f64
}
