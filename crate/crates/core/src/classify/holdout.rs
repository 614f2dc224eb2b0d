//! Repeated random 80/20 holdout.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::metrics::{compute_metrics, MeanMetrics, Metrics};
use super::{train_model, ClassifyError, ModelKind};
use crate::ingestion::Label;
use crate::rng;

/// Minimum samples per class.
pub const MIN_PER_CLASS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutConfig {
    pub runs: usize,
    pub train_frac: f64,
    pub seed: u64,
    pub stratify: bool,
}

impl Default for HoldoutConfig {
    fn default() -> Self {
        Self { runs: 5, train_frac: 0.8, seed: 42, stratify: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutReport {
    pub kind: ModelKind,
    pub per_run: Vec<Metrics>,
    pub mean: MeanMetrics,
}

fn take_train(mut idx: Vec<usize>, frac: f64, g: &mut rng::StreamRng) -> (Vec<usize>, Vec<usize>) {
    idx.shuffle(g);
    let n_train = ((idx.len() as f64 * frac).round() as usize).clamp(1, idx.len() - 1);
    let test = idx.split_off(n_train);
    (idx, test)
}

/// Train/test row indices of one run.
pub fn split_indices(y: &[Label], train_frac: f64, seed: u64, stratify: bool) -> (Vec<usize>, Vec<usize>) {
    let mut g = rng::stream(seed);
    let (mut train, mut test) = if stratify {
        let (fake, real): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| y[i].is_fake());
        let (mut tr, mut te) = take_train(fake, train_frac, &mut g);
        let (tr2, te2) = take_train(real, train_frac, &mut g);
        tr.extend(tr2);
        te.extend(te2);
        (tr, te)
    } else {
        take_train((0..y.len()).collect(), train_frac, &mut g)
    };
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Run `runs` independent splits; run `r` uses seed `seed + r` for both the
/// split and the model.
pub fn repeated_holdout(
    x: &[Vec<f64>],
    y: &[Label],
    kind: ModelKind,
    config: &HoldoutConfig,
) -> Result<HoldoutReport, ClassifyError> {
    if config.runs == 0 {
        return Err(ClassifyError::InvalidConfig("runs must be at least 1".into()));
    }
    if !(config.train_frac > 0.0 && config.train_frac < 1.0) {
        return Err(ClassifyError::InvalidConfig(format!("split {} outside (0, 1)", config.train_frac)));
    }
    if x.len() != y.len() {
        return Err(ClassifyError::LengthMismatch(x.len(), y.len()));
    }
    let fake = y.iter().filter(|l| l.is_fake()).count();
    let real = y.len() - fake;
    if fake < MIN_PER_CLASS || real < MIN_PER_CLASS {
        return Err(ClassifyError::TooFewSamples { needed: MIN_PER_CLASS, fake, real });
    }

    let mut per_run = Vec::with_capacity(config.runs);
    for run in 0..config.runs as u64 {
        let run_seed = config.seed.wrapping_add(run);
        let (train, test) = split_indices(y, config.train_frac, run_seed, config.stratify);
        let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<Label>) { idx.iter().map(|&i| (x[i].clone(), y[i])).unzip() };
        let (xtr, ytr) = pick(&train);
        let (xte, yte) = pick(&test);
        let model = train_model(kind, &xtr, &ytr, run_seed)?;
        per_run.push(compute_metrics(&model.predict_all(&xte), &yte)?);
    }
    Ok(HoldoutReport { kind, mean: MeanMetrics::of(&per_run), per_run })
}
