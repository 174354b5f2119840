//! Linear one-vs-rest learners used by the model ranker.

use serde::{Deserialize, Serialize};

use crate::num::Scalar;

/// Optimizer schedule shared by both learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearConfig {
    pub lambda: f64,
    pub iterations: usize,
    pub step: f64,
    pub platt_iterations: usize,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            lambda: 1e-2,
            iterations: 500,
            step: 0.1,
            platt_iterations: 100,
        }
    }
}

/// Per-feature zero-mean/unit-variance transform. Constant features keep a
/// unit scale so they map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Standardizer<F> {
    pub mean: Vec<F>,
    pub std: Vec<F>,
}

impl<F: Scalar> Standardizer<F> {
    pub fn fit(rows: &[Vec<F>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = F::of_usize(rows.len().max(1));
        let mut mean = vec![F::zero(); d];
        let mut std = vec![F::one(); d];
        for j in 0..d {
            let m = rows.iter().map(|r| r[j]).sum::<F>() / n;
            let v = rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<F>() / n;
            mean[j] = m;
            if v.sqrt() > F::of(1e-12) {
                std[j] = v.sqrt();
            }
        }
        Standardizer { mean, std }
    }

    pub fn apply(&self, row: &[F]) -> Vec<F> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect()
    }
}

/// `sign(x) * ln(1 + |x|)`: tames count-like features spanning several
/// orders of magnitude before standardization.
pub fn signed_log1p<F: Scalar>(x: F) -> F {
    let y = x.abs().ln_1p();
    if x < F::zero() {
        -y
    } else {
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct LinearScorer<F> {
    pub weights: Vec<F>,
    pub bias: F,
}

impl<F: Scalar> LinearScorer<F> {
    pub fn decision(&self, x: &[F]) -> F {
        self.weights.iter().zip(x).map(|(&w, &v)| w * v).sum::<F>() + self.bias
    }
}

/// `p(f) = 1 / (1 + exp(a·f + b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct PlattSigmoid<F> {
    pub a: F,
    pub b: F,
}

impl<F: Scalar> PlattSigmoid<F> {
    pub fn prob(&self, f: F) -> F {
        let z = self.a * f + self.b;
        if z >= F::zero() {
            let e = (-z).exp();
            e / (F::one() + e)
        } else {
            F::one() / (F::one() + z.exp())
        }
    }
}

pub fn sigmoid<F: Scalar>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// Class weights `N / (2 N_c)`, normalized so they sum to `N`.
pub fn balanced_weights<F: Scalar>(y: &[bool]) -> Vec<F> {
    let n = y.len();
    let pos = y.iter().filter(|&&p| p).count();
    let neg = n - pos;
    let w = |c: usize| {
        if c == 0 {
            F::zero()
        } else {
            F::of_usize(n) / (F::of(2.0) * F::of_usize(c))
        }
    };
    let (wp, wn) = (w(pos), w(neg));
    y.iter().map(|&p| if p { wp } else { wn }).collect()
}

/// Full-batch gradient descent over a per-sample loss derivative `dloss(y, z)`.
fn descend<F: Scalar>(
    x: &[Vec<F>],
    y: &[bool],
    cfg: &LinearConfig,
    dloss: impl Fn(bool, F) -> F,
) -> LinearScorer<F> {
    let d = x.first().map_or(0, Vec::len);
    let w = balanced_weights::<F>(y);
    let total: F = w.iter().copied().sum::<F>().max(F::of(1e-12));
    let (lambda, step) = (F::of(cfg.lambda), F::of(cfg.step));
    let mut s = LinearScorer {
        weights: vec![F::zero(); d],
        bias: F::zero(),
    };
    for _ in 0..cfg.iterations {
        let mut gw = vec![F::zero(); d];
        let mut gb = F::zero();
        for ((row, &label), &wi) in x.iter().zip(y).zip(&w) {
            let g = dloss(label, s.decision(row)) * wi;
            if g == F::zero() {
                continue;
            }
            for (gj, &v) in gw.iter_mut().zip(row) {
                *gj = *gj + g * v;
            }
            gb = gb + g;
        }
        for (wj, gj) in s.weights.iter_mut().zip(&gw) {
            *wj = *wj - step * (*gj / total + lambda * *wj);
        }
        s.bias = s.bias - step * gb / total;
    }
    s
}

/// L2-regularized logistic regression with balanced class weights.
pub fn fit_logistic<F: Scalar>(x: &[Vec<F>], y: &[bool], cfg: &LinearConfig) -> LinearScorer<F> {
    descend(x, y, cfg, |label, z| {
        sigmoid(z) - if label { F::one() } else { F::zero() }
    })
}

/// Linear SVM: subgradient descent on the L2-regularized hinge loss.
pub fn fit_linear_svm<F: Scalar>(x: &[Vec<F>], y: &[bool], cfg: &LinearConfig) -> LinearScorer<F> {
    descend(x, y, cfg, |label, z| {
        let t = if label { F::one() } else { -F::one() };
        if t * z < F::one() {
            -t
        } else {
            F::zero()
        }
    })
}

/// Platt scaling fitted by Newton's method with backtracking
/// (Lin, Lin & Weng's formulation with smoothed targets).
pub fn fit_platt<F: Scalar>(decision: &[F], y: &[bool], max_iter: usize) -> PlattSigmoid<F> {
    let prior1 = y.iter().filter(|&&p| p).count();
    let prior0 = y.len() - prior1;
    let hi = F::of_usize(prior1 + 1) / F::of_usize(prior1 + 2);
    let lo = F::one() / F::of_usize(prior0 + 2);
    let t: Vec<F> = y.iter().map(|&p| if p { hi } else { lo }).collect();
    let min_step = F::of(1e-10);
    let sigma = F::of(1e-12);
    let eps = F::of(1e-5);

    let objective = |a: F, b: F| -> F {
        decision
            .iter()
            .zip(&t)
            .map(|(&f, &ti)| {
                let z = f * a + b;
                if z >= F::zero() {
                    ti * z + (F::one() + (-z).exp()).ln()
                } else {
                    (ti - F::one()) * z + (F::one() + z.exp()).ln()
                }
            })
            .sum()
    };

    let mut a = F::zero();
    let mut b = (F::of_usize(prior0 + 1) / F::of_usize(prior1 + 1)).ln();
    let mut fval = objective(a, b);
    for _ in 0..max_iter {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) =
            (sigma, sigma, F::zero(), F::zero(), F::zero());
        for (&f, &ti) in decision.iter().zip(&t) {
            let z = f * a + b;
            let (p, q) = if z >= F::zero() {
                let e = (-z).exp();
                (e / (F::one() + e), F::one() / (F::one() + e))
            } else {
                let e = z.exp();
                (F::one() / (F::one() + e), e / (F::one() + e))
            };
            let d2 = p * q;
            h11 = h11 + f * f * d2;
            h22 = h22 + d2;
            h21 = h21 + f * d2;
            let d1 = ti - p;
            g1 = g1 + f * d1;
            g2 = g2 + d1;
        }
        if g1.abs() < eps && g2.abs() < eps {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = F::one();
        while step >= min_step {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + F::of(1e-4) * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step = step / F::of(2.0);
        }
        if step < min_step {
            break;
        }
    }
    PlattSigmoid { a, b }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let j = i as f64 / 20.0;
            x.push(vec![1.0 + j, 0.5 - j]);
            y.push(true);
            x.push(vec![-1.0 - j, -0.5 + j]);
            y.push(false);
        }
        (x, y)
    }

    #[test]
    fn both_learners_separate_blobs() {
        let (x, y) = blobs();
        let cfg = LinearConfig::default();
        for s in [fit_logistic(&x, &y, &cfg), fit_linear_svm(&x, &y, &cfg)] {
            for (r, &l) in x.iter().zip(&y) {
                assert_eq!(s.decision(r) > 0.0, l);
            }
        }
    }

    #[test]
    fn platt_is_increasing_in_the_margin() {
        let (x, y) = blobs();
        let s = fit_linear_svm(&x, &y, &LinearConfig::default());
        let f: Vec<f64> = x.iter().map(|r| s.decision(r)).collect();
        let p = fit_platt(&f, &y, 100);
        assert!(p.a < 0.0);
        assert!(p.prob(2.0) > p.prob(0.0) && p.prob(0.0) > p.prob(-2.0));
        for (&fi, &l) in f.iter().zip(&y) {
            let pr = p.prob(fi);
            assert!((0.0..=1.0).contains(&pr));
            assert_eq!(pr > 0.5, l);
        }
    }

    #[test]
    fn balanced_weights_equalize_classes() {
        let y = [true, false, false, false];
        let w: Vec<f64> = balanced_weights(&y);
        assert_eq!(w, vec![2.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
        assert!((w.iter().sum::<f64>() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn standardizer_handles_constant_columns() {
        let rows = vec![vec![1.0_f32, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&rows);
        assert_eq!(s.apply(&[1.0, 5.0]), vec![-1.0, 0.0]);
    }
}
