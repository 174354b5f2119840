//! Binary CART classifier over meta-features with weighted Gini impurity.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::meta_features::{MetaFeatureName, MetaFeatureVector};
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    GE,
    LT,
}

/// `feature op threshold`, as taken along a decision path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Condition<F> {
    pub feature: MetaFeatureName,
    pub op: CmpOp,
    pub threshold: F,
}

impl<F: Scalar> Condition<F> {
    pub fn holds(&self, value: F) -> bool {
        match self.op {
            CmpOp::GE => value >= self.threshold,
            CmpOp::LT => value < self.threshold,
        }
    }
}

impl<F: Scalar> std::fmt::Display for Condition<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = match self.op {
            CmpOp::GE => ">=",
            CmpOp::LT => "<",
        };
        write!(f, "{} {} {}", self.feature, op, self.threshold)
    }
}

/// Values below the threshold go left, the rest go right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar", rename_all = "snake_case")]
pub enum Node<F> {
    Leaf {
        prob: F,
    },
    Split {
        feature: MetaFeatureName,
        threshold: F,
        left: Box<Node<F>>,
        right: Box<Node<F>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct DecisionTree<F> {
    pub root: Node<F>,
    pub trained_features: Vec<MetaFeatureName>,
    pub max_depth: usize,
}

/// Training rows: `x[i][j]` is the value of `features[j]` for sample `i`.
pub struct TrainingSet<'a, F> {
    pub features: &'a [MetaFeatureName],
    pub x: &'a [Vec<F>],
    pub y: &'a [bool],
    pub weights: &'a [F],
}

impl<F: Scalar> DecisionTree<F> {
    /// A tree that always answers `prob`.
    pub fn constant(prob: F) -> Self {
        DecisionTree {
            root: Node::Leaf { prob },
            trained_features: Vec::new(),
            max_depth: 0,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.root, Node::Leaf { .. })
    }

    /// Grows a tree. Split candidates are midpoints between consecutive
    /// distinct values; ties in impurity decrease go to the lower feature
    /// index, then the lower threshold.
    pub fn fit(data: &TrainingSet<'_, F>, max_depth: usize) -> Self {
        let idx: Vec<usize> = (0..data.y.len()).collect();
        let root = grow(data, &idx, 0, max_depth);
        DecisionTree {
            root,
            trained_features: data.features.to_vec(),
            max_depth,
        }
    }

    pub fn predict_proba(&self, mf: &MetaFeatureVector) -> F {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { prob } => return *prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if F::of(mf.get(*feature)) < *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    fn predict_row(&self, features: &[MetaFeatureName], row: &[F]) -> F {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { prob } => return *prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let j = features
                        .iter()
                        .position(|f| f == feature)
                        .expect("split feature in row");
                    node = if row[j] < *threshold { left } else { right };
                }
            }
        }
    }

    /// Positive-class decisions (`prob >= 0.5`) for training-layout rows.
    pub fn predict_rows(&self, features: &[MetaFeatureName], rows: &[Vec<F>]) -> Vec<bool> {
        rows.iter()
            .map(|r| self.predict_row(features, r) >= F::of(0.5))
            .collect()
    }

    /// Conditions traversed from the root to the leaf reached by `mf`.
    pub fn decision_path(&self, mf: &MetaFeatureVector) -> Vec<Condition<F>> {
        let mut path = Vec::new();
        let mut node = &self.root;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            if F::of(mf.get(*feature)) < *threshold {
                path.push(Condition {
                    feature: *feature,
                    op: CmpOp::LT,
                    threshold: *threshold,
                });
                node = left;
            } else {
                path.push(Condition {
                    feature: *feature,
                    op: CmpOp::GE,
                    threshold: *threshold,
                });
                node = right;
            }
        }
        path
    }

    pub fn depth(&self) -> usize {
        fn d<F>(n: &Node<F>) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }

    /// Feature tested at the root, if any.
    pub fn root_feature(&self) -> Option<MetaFeatureName> {
        match &self.root {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        }
    }
}

fn weighted_counts<F: Scalar>(data: &TrainingSet<'_, F>, idx: &[usize]) -> (F, F) {
    let mut pos = F::zero();
    let mut neg = F::zero();
    for &i in idx {
        if data.y[i] {
            pos = pos + data.weights[i];
        } else {
            neg = neg + data.weights[i];
        }
    }
    (pos, neg)
}

/// Total-weighted Gini impurity `W * (1 - p^2 - q^2)`.
fn weighted_gini<F: Scalar>(pos: F, neg: F) -> F {
    let w = pos + neg;
    if w <= F::zero() {
        return F::zero();
    }
    let (p, q) = (pos / w, neg / w);
    w * (F::one() - p * p - q * q)
}

struct BestSplit<F> {
    gain: F,
    feature: usize,
    threshold: F,
}

fn grow<F: Scalar>(
    data: &TrainingSet<'_, F>,
    idx: &[usize],
    depth: usize,
    max_depth: usize,
) -> Node<F> {
    let (pos, neg) = weighted_counts(data, idx);
    let total = pos + neg;
    let prob = if total > F::zero() {
        pos / total
    } else {
        F::zero()
    };
    if depth >= max_depth || idx.len() < 2 || pos <= F::zero() || neg <= F::zero() {
        return Node::Leaf { prob };
    }
    let parent = weighted_gini(pos, neg);
    let tol = F::of(1e-12) * total;
    let mut best: Option<BestSplit<F>> = None;

    for j in 0..data.features.len() {
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| {
            data.x[a][j]
                .partial_cmp(&data.x[b][j])
                .unwrap_or(Ordering::Equal)
        });
        let (mut lpos, mut lneg) = (F::zero(), F::zero());
        for k in 0..order.len() - 1 {
            let i = order[k];
            if data.y[i] {
                lpos = lpos + data.weights[i];
            } else {
                lneg = lneg + data.weights[i];
            }
            let (a, b) = (data.x[i][j], data.x[order[k + 1]][j]);
            if !(a < b) {
                continue;
            }
            let gain = parent - weighted_gini(lpos, lneg) - weighted_gini(pos - lpos, neg - lneg);
            if gain > tol && best.as_ref().is_none_or(|s| gain > s.gain + tol) {
                best = Some(BestSplit {
                    gain,
                    feature: j,
                    threshold: (a + b) / F::of(2.0),
                });
            }
        }
    }

    let Some(split) = best else {
        return Node::Leaf { prob };
    };
    let (left, right): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| data.x[i][split.feature] < split.threshold);
    let left = grow(data, &left, depth + 1, max_depth);
    let right = grow(data, &right, depth + 1, max_depth);
    // A split whose sides reach the same decision changes no prediction;
    // keeping it would only add a spurious condition to decision paths.
    if let (Node::Leaf { prob: l }, Node::Leaf { prob: r }) = (&left, &right) {
        let half = F::of(0.5);
        if (*l >= half) == (*r >= half) {
            return Node::Leaf { prob };
        }
    }
    Node::Split {
        feature: data.features[split.feature],
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta_features::MetaFeatureName as M;

    #[test]
    fn separable_feature_gives_one_split() {
        let features = [M::NRows, M::HasMissing];
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i * 7 % 13) as f64, (i % 2) as f64])
            .collect();
        let y: Vec<bool> = x.iter().map(|r| r[1] == 1.0).collect();
        let w = vec![1.0; 20];
        let t = DecisionTree::fit(
            &TrainingSet {
                features: &features,
                x: &x,
                y: &y,
                weights: &w,
            },
            4,
        );
        assert_eq!(t.depth(), 1);
        assert_eq!(t.root_feature(), Some(M::HasMissing));
        assert_eq!(t.predict_rows(&features, &x), y);

        let mut mf = MetaFeatureVector::default();
        mf.set(M::HasMissing, 1.0);
        let path = t.decision_path(&mf);
        assert_eq!(
            path,
            vec![Condition {
                feature: M::HasMissing,
                op: CmpOp::GE,
                threshold: 0.5
            }]
        );
        assert_eq!(t.predict_proba(&mf), 1.0);
    }

    #[test]
    fn depth_two_path_is_root_first() {
        // positive iff a >= 5 and b >= 5
        let features = [M::NRows, M::NFeatures];
        let mut x = Vec::new();
        for a in 0..10 {
            for b in 0..10 {
                x.push(vec![a as f64, b as f64]);
            }
        }
        let y: Vec<bool> = x.iter().map(|r| r[0] >= 5.0 && r[1] >= 5.0).collect();
        let w = vec![1.0; x.len()];
        let t = DecisionTree::fit(
            &TrainingSet {
                features: &features,
                x: &x,
                y: &y,
                weights: &w,
            },
            2,
        );
        assert_eq!(t.predict_rows(&features, &x), y);
        let mut mf = MetaFeatureVector::default();
        mf.set(M::NRows, 7.0);
        mf.set(M::NFeatures, 8.0);
        let path = t.decision_path(&mf);
        assert_eq!(path.len(), 2);
        assert!(path.iter().all(|c| c.op == CmpOp::GE && c.threshold == 4.5));
        assert_ne!(path[0].feature, path[1].feature);
    }

    #[test]
    fn balanced_weights_keep_the_minority() {
        // 90 negatives spread over [0, 9), 10 positives at 9.5 mixed with some noise features
        let features = [M::NRows];
        let mut x: Vec<Vec<f64>> = (0..90).map(|i| vec![i as f64 / 10.0]).collect();
        x.extend((0..10).map(|_| vec![9.5]));
        let y: Vec<bool> = (0..100).map(|i| i >= 90).collect();
        let w: Vec<f64> = y
            .iter()
            .map(|&p| if p { 100.0 / 20.0 } else { 100.0 / 180.0 })
            .collect();
        let t = DecisionTree::fit(
            &TrainingSet {
                features: &features,
                x: &x,
                y: &y,
                weights: &w,
            },
            1,
        );
        assert_eq!(t.predict_rows(&features, &x), y);
    }

    #[test]
    fn same_decision_splits_collapse() {
        // positives everywhere except a < 2; inside the positive side the
        // b split separates 0.9 from 1.0 probability but not the decision
        let features = [M::NRows, M::NFeatures];
        let mut x = Vec::new();
        let mut y = Vec::new();
        for a in 0..6 {
            for b in 0..10 {
                x.push(vec![a as f64, b as f64]);
                y.push(a >= 2 && !(b < 5 && (a + b) % 10 == 3));
            }
        }
        let w = vec![1.0; x.len()];
        let t = DecisionTree::fit(
            &TrainingSet {
                features: &features,
                x: &x,
                y: &y,
                weights: &w,
            },
            2,
        );
        fn no_redundant<F: Scalar>(n: &Node<F>) -> bool {
            match n {
                Node::Leaf { .. } => true,
                Node::Split { left, right, .. } => match (&**left, &**right) {
                    (Node::Leaf { prob: l }, Node::Leaf { prob: r }) => {
                        (*l >= F::of(0.5)) != (*r >= F::of(0.5))
                    }
                    _ => no_redundant(left) && no_redundant(right),
                },
            }
        }
        assert!(no_redundant(&t.root));
        assert_eq!(t.root_feature(), Some(M::NRows));
    }

    #[test]
    fn pure_node_is_constant() {
        let features = [M::NRows];
        let x = vec![vec![1.0_f32], vec![2.0]];
        let t = DecisionTree::fit(
            &TrainingSet {
                features: &features,
                x: &x,
                y: &[true, true],
                weights: &[1.0, 1.0],
            },
            3,
        );
        assert!(t.is_constant());
        assert_eq!(t.predict_proba(&MetaFeatureVector::default()), 1.0);
        assert!(t.decision_path(&MetaFeatureVector::default()).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let t = DecisionTree {
            root: Node::Split {
                feature: M::HasMissing,
                threshold: 0.5,
                left: Box::new(Node::Leaf { prob: 0.1 }),
                right: Box::new(Node::Leaf { prob: 0.9 }),
            },
            trained_features: vec![M::HasMissing],
            max_depth: 2,
        };
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<DecisionTree<f64>>(&s).unwrap(), t);
    }
}
