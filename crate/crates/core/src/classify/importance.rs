//! Mean-decrease-in-impurity (Gini) feature importance.
//!
//! The supplied rows are routed through every tree. Each split contributes
//! `(n_node / N) * (gini(node) - n_l/n_node * gini(left) - n_r/n_node * gini(right))`
//! to its feature. Contributions are summed per tree, averaged over trees and
//! normalised to sum to one (all zeros when no split saw any data).

use serde::Serialize;

use super::tree::{gini, DecisionTree, Node};
use super::{check_training, ClassifyError, ModelParams, TrainedModel};
use crate::ingestion::Label;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceReport {
    pub importances: Vec<f64>,
    /// Feature indices by decreasing importance; ties keep index order.
    pub ranking: Vec<usize>,
}

impl ImportanceReport {
    fn new(importances: Vec<f64>) -> Self {
        let mut ranking: Vec<usize> = (0..importances.len()).collect();
        ranking.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
        Self { importances, ranking }
    }

    /// 1-based rank of a feature.
    pub fn rank_of(&self, feature: usize) -> usize {
        self.ranking.iter().position(|&f| f == feature).expect("feature in range") + 1
    }
}

fn tree_decrease(tree: &DecisionTree, x: &[Vec<f64>], y: &[Label], out: &mut [f64]) {
    // Fake/real counts of the supplied rows reaching each node.
    let mut reach = vec![(0usize, 0usize); tree.nodes.len()];
    for (row, label) in x.iter().zip(y) {
        let mut i = 0;
        loop {
            let slot = &mut reach[i];
            if label.is_fake() {
                slot.0 += 1;
            } else {
                slot.1 += 1;
            }
            match tree.nodes[i] {
                Node::Leaf { .. } => break,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right }
                }
            }
        }
    }
    let total = x.len() as f64;
    for (i, node) in tree.nodes.iter().enumerate() {
        if let Node::Split { feature, left, right, .. } = *node {
            let (f, r) = reach[i];
            let n = f + r;
            if n == 0 {
                continue;
            }
            let (lf, lr) = reach[left];
            let (rf, rr) = reach[right];
            let nf = n as f64;
            let child = ((lf + lr) as f64 * gini(lf, lr) + (rf + rr) as f64 * gini(rf, rr)) / nf;
            out[feature] += nf / total * (gini(f, r) - child).max(0.0);
        }
    }
}

/// Importance of a random forest (or a single tree) over training rows.
pub fn gini_importance(model: &TrainedModel, x: &[Vec<f64>], y: &[Label]) -> Result<ImportanceReport, ClassifyError> {
    let width = check_training(x, y).or_else(|e| match e {
        // A single-class evaluation set is fine here; it just yields zeros.
        ClassifyError::SingleClassTraining => Ok(x[0].len()),
        other => Err(other),
    })?;
    if width != model.n_features {
        return Err(ClassifyError::RaggedMatrix { row: 0, got: width, expected: model.n_features });
    }
    let trees: Vec<&DecisionTree> = match &model.params {
        ModelParams::Rf(f) => f.trees.iter().collect(),
        ModelParams::Dt(t) => vec![t],
        _ => return Err(ClassifyError::InvalidConfig("importance needs a tree model".into())),
    };
    let mut sum = vec![0.0; width];
    for tree in &trees {
        tree_decrease(tree, x, y, &mut sum);
    }
    let mut importances: Vec<f64> = sum.iter().map(|s| s / trees.len() as f64).collect();
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        importances.iter_mut().for_each(|v| *v /= total);
    } else {
        importances.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(ImportanceReport::new(importances))
}
