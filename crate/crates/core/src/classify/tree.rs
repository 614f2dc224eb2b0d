//! CART classification tree with Gini impurity.
//!
//! Thresholds sit at midpoints between consecutive distinct values; a sample
//! goes left when `x[feature] <= threshold`. Nodes split until pure or below
//! two samples. The best split minimises the weighted child impurity; ties go
//! to the lowest feature index, then the lowest threshold.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_training, majority, ClassifyError};
use crate::ingestion::Label;
use crate::rng::StreamRng;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TreeConfig {
    /// Candidate features per split; `None` evaluates all of them.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf { label: Label },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

pub fn gini(fake: usize, real: usize) -> f64 {
    let n = (fake + real) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (pf, pr) = (fake as f64 / n, real as f64 / n);
    1.0 - pf * pf - pr * pr
}

fn counts(y: &[Label], idx: &[usize]) -> (usize, usize) {
    let fake = idx.iter().filter(|&&i| y[i].is_fake()).count();
    (fake, idx.len() - fake)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => (self.impurity, self.feature, self.threshold) < (o.impurity, o.feature, o.threshold),
        }
    }
}

/// Best threshold on one feature, or `None` when the feature is constant
/// over `idx`.
fn best_threshold(x: &[Vec<f64>], y: &[Label], idx: &[usize], feature: usize, total_fake: usize) -> Option<Candidate> {
    let mut pairs: Vec<(f64, bool)> = idx.iter().map(|&i| (x[i][feature], y[i].is_fake())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let mut best: Option<Candidate> = None;
    let mut left_fake = 0;
    for i in 0..n - 1 {
        left_fake += pairs[i].1 as usize;
        let (lo, hi) = (pairs[i].0, pairs[i + 1].0);
        if lo == hi {
            continue;
        }
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi {
            threshold = lo;
        }
        let nl = i + 1;
        let nr = n - nl;
        let right_fake = total_fake - left_fake;
        let impurity =
            (nl as f64 * gini(left_fake, nl - left_fake) + nr as f64 * gini(right_fake, nr - right_fake)) / n as f64;
        let c = Candidate { impurity, feature, threshold };
        if c.beats(&best) {
            best = Some(c);
        }
    }
    best
}

impl DecisionTree {
    /// Fit on all rows. `rng` drives feature subsampling when
    /// `config.max_features` is set.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[Label],
        config: &TreeConfig,
        rng: Option<&mut StreamRng>,
    ) -> Result<Self, ClassifyError> {
        check_training(x, y)?;
        Ok(Self::grow(x, y, (0..x.len()).collect(), config, rng))
    }

    /// Grow on a multiset of row indices (bootstrap samples may repeat).
    pub(crate) fn grow(
        x: &[Vec<f64>],
        y: &[Label],
        sample: Vec<usize>,
        config: &TreeConfig,
        mut rng: Option<&mut StreamRng>,
    ) -> Self {
        let width = x[0].len();
        let mut nodes = vec![Node::Leaf { label: Label::Fake }];
        let mut stack = vec![(0usize, sample)];
        let mut order: Vec<usize> = (0..width).collect();

        while let Some((slot, idx)) = stack.pop() {
            let (fake, real) = counts(y, &idx);
            let leaf = Node::Leaf { label: majority(fake, real) };
            if idx.len() < 2 || fake == 0 || real == 0 {
                nodes[slot] = leaf;
                continue;
            }

            let mut best: Option<Candidate> = None;
            match (config.max_features, rng.as_deref_mut()) {
                (Some(k), Some(rng)) if k < width => {
                    order.shuffle(rng);
                    for (visited, &f) in order.iter().enumerate() {
                        // Keep drawing past the quota until one usable feature shows up.
                        if visited >= k && best.is_some() {
                            break;
                        }
                        if let Some(c) = best_threshold(x, y, &idx, f, fake) {
                            if c.beats(&best) {
                                best = Some(c);
                            }
                        }
                    }
                }
                _ => {
                    for f in 0..width {
                        if let Some(c) = best_threshold(x, y, &idx, f, fake) {
                            if c.beats(&best) {
                                best = Some(c);
                            }
                        }
                    }
                }
            }

            let Some(split) = best else {
                nodes[slot] = leaf;
                continue;
            };
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| x[i][split.feature] <= split.threshold);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { label: Label::Fake });
            nodes.push(Node::Leaf { label: Label::Fake });
            nodes[slot] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
            stack.push((right, right_idx));
            stack.push((left, left_idx));
        }
        Self { nodes }
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right }
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        match self.nodes[self.leaf_of(x)] {
            Node::Leaf { label } => label,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Fake as F, Real as R};

    #[test]
    fn two_samples_single_split() {
        let x = vec![vec![0.0, 5.0], vec![0.0, 7.0]];
        let t = DecisionTree::fit(&x, &[F, R], &TreeConfig::default(), None).unwrap();
        assert_eq!(t.split_count(), 1);
        assert_eq!(t.nodes[0], Node::Split { feature: 1, threshold: 6.0, left: 1, right: 2 });
        assert_eq!(t.predict(&x[0]), F);
        assert_eq!(t.predict(&x[1]), R);
    }

    #[test]
    fn tie_prefers_lowest_feature() {
        // Features 0 and 2 separate equally well.
        let x = vec![vec![1.0, 0.0, 1.0], vec![2.0, 0.0, 2.0]];
        let t = DecisionTree::fit(&x, &[F, R], &TreeConfig::default(), None).unwrap();
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn conflicting_duplicates_become_fake_leaf() {
        let x = vec![vec![1.0], vec![1.0]];
        let t = DecisionTree::fit(&x, &[R, F], &TreeConfig::default(), None).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { label: F }]);
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(5, 0), 0.0);
        assert_eq!(gini(2, 2), 0.5);
        assert_eq!(gini(0, 0), 0.0);
    }

    proptest! {
        #[test]
        fn perfect_training_accuracy_without_conflicts(
            rows in proptest::collection::btree_map(proptest::collection::vec(0i32..6, 3), any::<bool>(), 2..60)
        ) {
            let x: Vec<Vec<f64>> = rows.keys().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
            let y: Vec<Label> = rows.values().map(|&b| if b { F } else { R }).collect();
            prop_assume!(y.contains(&F) && y.contains(&R));
            let t = DecisionTree::fit(&x, &y, &TreeConfig::default(), None).unwrap();
            for (r, l) in x.iter().zip(&y) {
                prop_assert_eq!(t.predict(r), *l);
            }
        }
    }
}
