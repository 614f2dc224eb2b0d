//! From-scratch classifiers over feature vectors, repeated holdout
//! evaluation and Gini feature importance.
//!
//! Fake is the positive class throughout. Every prediction tie resolves to
//! fake.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{
    FeatureVector, FEATURE_COUNT, MACRO_STRUCTURAL, MACRO_TEMPORAL, MICRO_LINGUISTIC, MICRO_STRUCTURAL, MICRO_TEMPORAL,
};
use crate::ingestion::Label;

pub mod forest;
pub mod gnb;
pub mod holdout;
pub mod importance;
pub mod logistic;
pub mod metrics;
pub mod tree;

pub use forest::RandomForest;
pub use gnb::GaussianNb;
pub use holdout::{repeated_holdout, HoldoutConfig, HoldoutReport};
pub use importance::{gini_importance, ImportanceReport};
pub use logistic::LogisticRegression;
pub use metrics::{compute_metrics, MeanMetrics, Metrics};
pub use tree::DecisionTree;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("training data holds a single class")]
    SingleClassTraining,
    #[error("too few samples: need at least {needed} per class, got {fake} fake and {real} real")]
    TooFewSamples { needed: usize, fake: usize, real: usize },
    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("ragged feature matrix: row {row} has {got} columns, expected {expected}")]
    RaggedMatrix { row: usize, got: usize, expected: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported model file: {0}")]
    ModelFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gnb,
    Dt,
    Lr,
    Rf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Gnb, ModelKind::Dt, ModelKind::Lr, ModelKind::Rf];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Gnb => "gnb",
            ModelKind::Dt => "dt",
            ModelKind::Lr => "lr",
            ModelKind::Rf => "rf",
        }
    }
}

/// Feature groups for ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    All,
    Macro,
    Micro,
    Structural,
    Temporal,
    Linguistic,
}

impl FeatureSubset {
    pub const ALL: [FeatureSubset; 6] = [
        FeatureSubset::All,
        FeatureSubset::Macro,
        FeatureSubset::Micro,
        FeatureSubset::Structural,
        FeatureSubset::Temporal,
        FeatureSubset::Linguistic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSubset::All => "all",
            FeatureSubset::Macro => "macro",
            FeatureSubset::Micro => "micro",
            FeatureSubset::Structural => "structural",
            FeatureSubset::Temporal => "temporal",
            FeatureSubset::Linguistic => "linguistic",
        }
    }

    /// Column indices in canonical order.
    pub fn columns(self) -> Vec<usize> {
        let join = |ranges: &[std::ops::Range<usize>]| ranges.iter().flat_map(|r| r.clone()).collect();
        match self {
            FeatureSubset::All => (0..FEATURE_COUNT).collect(),
            FeatureSubset::Macro => join(&[MACRO_STRUCTURAL, MACRO_TEMPORAL]),
            FeatureSubset::Micro => join(&[MICRO_STRUCTURAL, MICRO_TEMPORAL, MICRO_LINGUISTIC]),
            FeatureSubset::Structural => join(&[MACRO_STRUCTURAL, MICRO_STRUCTURAL]),
            FeatureSubset::Temporal => join(&[MACRO_TEMPORAL, MICRO_TEMPORAL]),
            FeatureSubset::Linguistic => join(&[MICRO_LINGUISTIC]),
        }
    }
}

/// Row-major feature matrix.
pub type Matrix = Vec<Vec<f64>>;

pub fn select_feature_subset(x: &[Vec<f64>], subset: FeatureSubset) -> Matrix {
    let cols = subset.columns();
    x.iter().map(|row| cols.iter().map(|&c| row[c]).collect()).collect()
}

/// Matrix and labels of feature vectors, in input order.
pub fn design_matrix(vectors: &[FeatureVector]) -> (Matrix, Vec<Label>) {
    vectors.iter().map(|v| (v.values.to_vec(), v.label)).unzip()
}

pub(crate) fn check_training(x: &[Vec<f64>], y: &[Label]) -> Result<usize, ClassifyError> {
    if x.is_empty() {
        return Err(ClassifyError::EmptyInput);
    }
    if x.len() != y.len() {
        return Err(ClassifyError::LengthMismatch(x.len(), y.len()));
    }
    let width = x[0].len();
    if let Some((row, r)) = x.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(ClassifyError::RaggedMatrix { row, got: r.len(), expected: width });
    }
    let fakes = y.iter().filter(|l| l.is_fake()).count();
    if fakes == 0 || fakes == y.len() {
        return Err(ClassifyError::SingleClassTraining);
    }
    Ok(width)
}

/// Majority label of fake/real counts; ties go to fake.
pub(crate) fn majority(fake: usize, real: usize) -> Label {
    if fake >= real {
        Label::Fake
    } else {
        Label::Real
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Gnb(GaussianNb),
    Dt(DecisionTree),
    Lr(LogisticRegression),
    Rf(RandomForest),
}

/// A trained classifier of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub training_seed: u64,
    pub n_features: usize,
    pub params: ModelParams,
}

pub const MODEL_FORMAT: &str = "hpnf-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::Gnb(_) => ModelKind::Gnb,
            ModelParams::Dt(_) => ModelKind::Dt,
            ModelParams::Lr(_) => ModelKind::Lr,
            ModelParams::Rf(_) => ModelKind::Rf,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        match &self.params {
            ModelParams::Gnb(m) => m.predict(x),
            ModelParams::Dt(m) => m.predict(x),
            ModelParams::Lr(m) => m.predict(x),
            ModelParams::Rf(m) => m.predict(x),
        }
    }

    pub fn predict_all(&self, x: &[Vec<f64>]) -> Vec<Label> {
        x.iter().map(|r| self.predict(r)).collect()
    }

    /// JSON document `{"format": "hpnf-model", "version": 1, "model": {...}}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile { format: MODEL_FORMAT.into(), version: MODEL_VERSION, model: self.clone() })
            .expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ClassifyError> {
        let file: ModelFile = serde_json::from_str(s).map_err(|e| ClassifyError::ModelFormat(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(ClassifyError::ModelFormat(format!("{} v{}", file.format, file.version)));
        }
        Ok(file.model)
    }
}

pub fn train_model(kind: ModelKind, x: &[Vec<f64>], y: &[Label], seed: u64) -> Result<TrainedModel, ClassifyError> {
    let n_features = check_training(x, y)?;
    let params = match kind {
        ModelKind::Gnb => ModelParams::Gnb(GaussianNb::fit(x, y)?),
        ModelKind::Dt => ModelParams::Dt(DecisionTree::fit(x, y, &tree::TreeConfig::default(), None)?),
        ModelKind::Lr => ModelParams::Lr(LogisticRegression::fit(x, y, &logistic::LrConfig::default())?),
        ModelKind::Rf => ModelParams::Rf(RandomForest::fit(x, y, &forest::ForestConfig::default(), seed)?),
    };
    Ok(TrainedModel { training_seed: seed, n_features, params })
}

pub fn predict(model: &TrainedModel, x: &[f64]) -> Label {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_sizes() {
        assert_eq!(FeatureSubset::All.columns().len(), 32);
        assert_eq!(FeatureSubset::Macro.columns(), (0..17).collect::<Vec<_>>());
        assert_eq!(FeatureSubset::Micro.columns(), (17..32).collect::<Vec<_>>());
        assert_eq!(FeatureSubset::Linguistic.columns(), (27..32).collect::<Vec<_>>());
        assert_eq!(FeatureSubset::Structural.columns().len(), 14);
        assert_eq!(FeatureSubset::Temporal.columns().len(), 13);
    }

    #[test]
    fn select_reduces_columns() {
        let x = vec![(0..32).map(f64::from).collect::<Vec<_>>()];
        assert_eq!(select_feature_subset(&x, FeatureSubset::Linguistic), vec![vec![27.0, 28.0, 29.0, 30.0, 31.0]]);
        assert_eq!(select_feature_subset(&x, FeatureSubset::All), x);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        for kind in ModelKind::ALL {
            assert_eq!(
                train_model(kind, &x, &[Label::Real, Label::Real], 1).unwrap_err(),
                ClassifyError::SingleClassTraining
            );
        }
    }

    #[test]
    fn model_file_rejects_other_versions() {
        let x = vec![vec![0.0], vec![1.0]];
        let m = train_model(ModelKind::Dt, &x, &[Label::Fake, Label::Real], 1).unwrap();
        let bumped = m.to_json().replace("\"version\":1", "\"version\":2");
        assert!(matches!(TrainedModel::from_json(&bumped), Err(ClassifyError::ModelFormat(_))));
    }
}
