//! Descriptive statistics used by meta-feature extraction and feature selection.
//!
//! All sums are taken over a sorted copy of the input so that every result is
//! a function of the value multiset alone: permuting the input never changes a
//! single bit of the output.

use crate::num::Scalar;

/// A statistic together with a flag telling whether its preconditions held.
///
/// Degenerate statistics carry a value of zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Statistic<F> {
    pub value: F,
    pub degenerate: bool,
}

impl<F: Scalar> Statistic<F> {
    pub fn ok(value: F) -> Self {
        Self {
            value,
            degenerate: false,
        }
    }

    pub fn degenerate() -> Self {
        Self {
            value: F::zero(),
            degenerate: true,
        }
    }
}

fn sorted<F: Scalar>(values: &[F]) -> Vec<F> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

fn sum_sorted<F: Scalar>(values: &[F]) -> F {
    values.iter().copied().sum()
}

/// Arithmetic mean; zero for an empty slice.
pub fn mean<F: Scalar>(values: &[F]) -> F {
    if values.is_empty() {
        return F::zero();
    }
    sum_sorted(&sorted(values)) / F::of_usize(values.len())
}

/// Population variance (divisor `n`).
pub fn variance<F: Scalar>(values: &[F]) -> F {
    if values.is_empty() {
        return F::zero();
    }
    let s = sorted(values);
    let m = sum_sorted(&s) / F::of_usize(s.len());
    let mut dev: Vec<F> = s.iter().map(|&v| (v - m) * (v - m)).collect();
    dev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    sum_sorted(&dev) / F::of_usize(s.len())
}

/// Population standard deviation.
pub fn std_dev<F: Scalar>(values: &[F]) -> F {
    variance(values).sqrt()
}

fn is_constant<F: Scalar>(values: &[F]) -> bool {
    match values.first() {
        None => true,
        Some(&first) => values.iter().all(|&v| v == first),
    }
}

/// Central moments `(mean, m2, m3, m4)` about the mean, divisor `n`.
fn central_moments<F: Scalar>(values: &[F]) -> (F, F, F, F) {
    let s = sorted(values);
    let n = F::of_usize(s.len());
    let m = sum_sorted(&s) / n;
    let moment = |k: i32| {
        let mut terms: Vec<F> = s.iter().map(|&v| (v - m).powi(k)).collect();
        terms.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        sum_sorted(&terms) / n
    };
    (m, moment(2), moment(3), moment(4))
}

/// Moment skewness `g1 = m3 / m2^(3/2)`.
///
/// Degenerate when fewer than three values are given or all values are equal.
pub fn skewness<F: Scalar>(values: &[F]) -> Statistic<F> {
    if values.len() < 3 || is_constant(values) {
        return Statistic::degenerate();
    }
    let (_, m2, m3, _) = central_moments(values);
    if m2 <= F::zero() {
        return Statistic::degenerate();
    }
    Statistic::ok(m3 / m2.powf(F::of(1.5)))
}

/// Excess kurtosis `g2 = m4 / m2^2 - 3`.
pub fn kurtosis<F: Scalar>(values: &[F]) -> Statistic<F> {
    if values.len() < 3 || is_constant(values) {
        return Statistic::degenerate();
    }
    let (_, m2, _, m4) = central_moments(values);
    if m2 <= F::zero() {
        return Statistic::degenerate();
    }
    Statistic::ok(m4 / (m2 * m2) - F::of(3.0))
}

/// Pearson product-moment correlation.
///
/// Degenerate (value 0) when the lengths differ, fewer than two pairs are
/// given, or either side is constant.
pub fn pearson<F: Scalar>(x: &[F], y: &[F]) -> Statistic<F> {
    if x.len() != y.len() || x.len() < 2 || is_constant(x) || is_constant(y) {
        return Statistic::degenerate();
    }
    let mut pairs: Vec<(F, F)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    });
    let n = F::of_usize(pairs.len());
    let mx = pairs.iter().map(|p| p.0).sum::<F>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<F>() / n;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for &(a, b) in &pairs {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx <= F::zero() || syy <= F::zero() {
        return Statistic::degenerate();
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Statistic::ok(r.max(-F::one()).min(F::one()))
}

/// Point-biserial correlation between a continuous `x` and a binary `y`:
/// `(mean(x | y) - mean(x | !y)) / s_x * sqrt(p (1 - p))` with `s_x` the
/// population standard deviation and `p` the fraction of positive labels.
pub fn point_biserial<F: Scalar>(x: &[F], y: &[bool]) -> Statistic<F> {
    if x.len() != y.len() || x.len() < 2 || is_constant(x) {
        return Statistic::degenerate();
    }
    let n1 = y.iter().filter(|&&b| b).count();
    let n0 = y.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Statistic::degenerate();
    }
    let pos: Vec<F> = x
        .iter()
        .zip(y)
        .filter(|(_, &b)| b)
        .map(|(&v, _)| v)
        .collect();
    let neg: Vec<F> = x
        .iter()
        .zip(y)
        .filter(|(_, &b)| !b)
        .map(|(&v, _)| v)
        .collect();
    let sx = std_dev(x);
    if sx <= F::zero() {
        return Statistic::degenerate();
    }
    let p = F::of_usize(n1) / F::of_usize(y.len());
    let r = (mean(&pos) - mean(&neg)) / sx * (p * (F::one() - p)).sqrt();
    Statistic::ok(r.max(-F::one()).min(F::one()))
}

/// Quantile with linear interpolation between order statistics
/// (the `(n - 1) q` rule). `q` is clamped to `[0, 1]`.
pub fn quantile<F: Scalar>(values: &[F], q: f64) -> Option<F> {
    if values.is_empty() {
        return None;
    }
    let s = sorted(values);
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = F::of(pos - lo as f64);
    Some(s[lo] + (s[hi] - s[lo]) * frac)
}

/// Fraction of values outside the Tukey fences `[Q1 - 1.5 IQR, Q3 + 1.5 IQR]`.
pub fn outlier_fraction<F: Scalar>(values: &[F]) -> F {
    let (Some(q1), Some(q3)) = (quantile(values, 0.25), quantile(values, 0.75)) else {
        return F::zero();
    };
    let iqr = q3 - q1;
    let k = F::of(1.5);
    let (lo, hi) = (q1 - k * iqr, q3 + k * iqr);
    let out = values.iter().filter(|&&v| v < lo || v > hi).count();
    F::of_usize(out) / F::of_usize(values.len())
}
