use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tabular::{cell_key, split_indices, DataError, Dataset, TaskKind};

/// Share of rows kept for inner training.
pub const INNER_TRAIN_RATIO: f64 = 0.75;
/// Smallest dataset that can be split internally.
pub const MIN_SPLIT_ROWS: usize = 8;
/// Every class needs this many rows for the split to be stratified.
pub const MIN_ROWS_PER_CLASS: usize = 4;

/// Splits training data into inner training and validation parts, 75:25.
///
/// Single-target classification data is stratified by label when every
/// class has at least [`MIN_ROWS_PER_CLASS`] rows. Both parts keep the
/// original row order.
pub fn internal_split(train: &Dataset, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    let n = train.n_rows;
    if n < MIN_SPLIT_ROWS {
        return Err(DataError::DegenerateSplit(format!(
            "{n} rows; internal validation needs at least {MIN_SPLIT_ROWS}"
        )));
    }
    let (mut a, mut b) = match stratified_indices(train, seed) {
        Some(split) => split,
        None => split_indices(n, INNER_TRAIN_RATIO, seed)?,
    };
    a.sort_unstable();
    b.sort_unstable();
    Ok((train.select_rows(&a), train.select_rows(&b)))
}

fn stratified_indices(d: &Dataset, seed: u64) -> Option<(Vec<usize>, Vec<usize>)> {
    if d.task != TaskKind::Classification || d.target_names.len() != 1 {
        return None;
    }
    let target = d.targets().next()?;
    let mut classes: BTreeMap<Option<String>, Vec<usize>> = BTreeMap::new();
    for (i, c) in target.cells.iter().enumerate() {
        classes.entry(cell_key(c)).or_default().push(i);
    }
    if classes.len() < 2 || classes.values().any(|v| v.len() < MIN_ROWS_PER_CLASS) {
        return None;
    }
    let n = d.n_rows;
    let valid_total = n - (INNER_TRAIN_RATIO * n as f64).round() as usize;
    // Largest-remainder apportionment of the validation rows; ties go to
    // the class that sorts first.
    let mut quota: Vec<usize> = classes
        .values()
        .map(|v| v.len() * valid_total / n)
        .collect();
    let mut order: Vec<usize> = (0..classes.len()).collect();
    let rem: Vec<usize> = classes
        .values()
        .map(|v| v.len() * valid_total % n)
        .collect();
    order.sort_by(|&x, &y| rem[y].cmp(&rem[x]).then(x.cmp(&y)));
    let missing = valid_total - quota.iter().sum::<usize>();
    for &c in order.iter().take(missing) {
        quota[c] += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut valid) = (Vec::new(), Vec::new());
    for (rows, q) in classes.into_values().zip(quota) {
        let mut rows = rows;
        rows.shuffle(&mut rng);
        valid.extend_from_slice(&rows[..q]);
        train.extend_from_slice(&rows[q..]);
    }
    Some((train, valid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::KindConfig;

    fn labelled(labels: &[&str]) -> Dataset {
        let header = vec!["x".to_string(), "y".to_string()];
        let rows = labels
            .iter()
            .enumerate()
            .map(|(i, l)| vec![i.to_string(), l.to_string()])
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
    fn hundred_rows_split_75_25() {
        let d = labelled(&["a"; 100]);
        let (t, v) = internal_split(&d, 7).unwrap();
        assert_eq!((t.n_rows, v.n_rows), (75, 25));
    }

    #[test]
    fn stratified_keeps_the_minority() {
        let labels: Vec<&str> = (0..100)
            .map(|i| if i % 10 == 0 { "b" } else { "a" })
            .collect();
        let d = labelled(&labels);
        for seed in 0..20 {
            let (t, v) = internal_split(&d, seed).unwrap();
            assert_eq!(t.n_rows + v.n_rows, 100);
            let minority = |d: &Dataset| {
                d.column("y")
                    .unwrap()
                    .cells
                    .iter()
                    .filter(|c| cell_key(c).as_deref() == Some("b"))
                    .count()
            };
            assert!(minority(&v) >= 2);
            assert_eq!(minority(&t) + minority(&v), 10);
        }
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(
            internal_split(&labelled(&["a", "b", "a", "b"]), 0),
            Err(DataError::DegenerateSplit(_))
        ));
    }

    #[test]
    fn deterministic_and_disjoint() {
        let labels: Vec<&str> = (0..37).map(|i| ["a", "b", "c"][i % 3]).collect();
        let d = labelled(&labels);
        let (t1, v1) = internal_split(&d, 3).unwrap();
        let (t2, v2) = internal_split(&d, 3).unwrap();
        assert_eq!((&t1, &v1), (&t2, &v2));
        let xs = |d: &Dataset| d.column("x").unwrap().numbers();
        let mut all: Vec<f64> = xs(&t1).into_iter().chain(xs(&v1)).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..37).map(f64::from).collect::<Vec<_>>());
    }
}
