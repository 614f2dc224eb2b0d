//! Random forest of CART trees.
//!
//! Tree `t` draws its bootstrap sample and its per-split candidate features
//! from its own generator seeded with `seed + t`, so trees can be grown in
//! parallel with results identical to a serial build.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeConfig};
use super::{check_training, majority, ClassifyError};
use crate::ingestion::Label;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate features per split; `None` means `floor(sqrt(d))`.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 100, max_features: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    /// Generator seed of each tree.
    pub tree_seeds: Vec<u64>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[Label], config: &ForestConfig, seed: u64) -> Result<Self, ClassifyError> {
        let width = check_training(x, y)?;
        if config.n_trees == 0 {
            return Err(ClassifyError::InvalidConfig("forest needs at least one tree".into()));
        }
        let k = config.max_features.unwrap_or_else(|| ((width as f64).sqrt() as usize).max(1));
        let tree_config = TreeConfig { max_features: Some(k) };
        let tree_seeds: Vec<u64> = (0..config.n_trees as u64).map(|t| seed.wrapping_add(t)).collect();
        let trees = tree_seeds
            .par_iter()
            .map(|&s| {
                let mut g = rng::stream(s);
                let sample: Vec<usize> = (0..x.len()).map(|_| g.random_range(0..x.len())).collect();
                DecisionTree::grow(x, y, sample, &tree_config, Some(&mut g))
            })
            .collect();
        Ok(Self { trees, tree_seeds })
    }

    /// `(fake, real)` vote counts.
    pub fn votes(&self, x: &[f64]) -> (usize, usize) {
        let fake = self.trees.iter().filter(|t| t.predict(x).is_fake()).count();
        (fake, self.trees.len() - fake)
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        let (fake, real) = self.votes(x);
        majority(fake, real)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Fake as F, Real as R};

    fn data() -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut g = rng::stream(9);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..80 {
            let fake = i % 2 == 0;
            let shift = if fake { 1.5 } else { 0.0 };
            x.push((0..6).map(|_| g.random::<f64>() + shift * g.random::<f64>()).collect());
            y.push(if fake { F } else { R });
        }
        (x, y)
    }

    #[test]
    fn deterministic_for_seed() {
        let (x, y) = data();
        let a = RandomForest::fit(&x, &y, &ForestConfig::default(), 42).unwrap();
        let b = RandomForest::fit(&x, &y, &ForestConfig::default(), 42).unwrap();
        assert_eq!(a, b);
        let c = RandomForest::fit(&x, &y, &ForestConfig::default(), 43).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.tree_seeds[0], 42);
        assert_eq!(a.tree_seeds[99], 141);
    }

    #[test]
    fn parallel_matches_serial() {
        let (x, y) = data();
        let parallel = RandomForest::fit(&x, &y, &ForestConfig::default(), 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| RandomForest::fit(&x, &y, &ForestConfig::default(), 5).unwrap());
        assert_eq!(parallel, serial);
    }

    #[test]
    fn vote_matches_individual_trees() {
        let (x, y) = data();
        let f = RandomForest::fit(&x, &y, &ForestConfig::default(), 1).unwrap();
        for row in &x {
            let fake = f.trees.iter().filter(|t| t.predict(row) == F).count();
            let expected = if 2 * fake >= f.trees.len() { F } else { R };
            assert_eq!(f.predict(row), expected);
        }
    }
}
