//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use super::{check_training, ClassifyError};
use crate::ingestion::Label;

/// Multiplier of the largest feature variance used as the variance floor.
pub const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGaussians {
    pub log_prior: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub fake: ClassGaussians,
    pub real: ClassGaussians,
}

fn column_stats<'a>(rows: impl Iterator<Item = &'a Vec<f64>> + Clone, width: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.clone().count() as f64;
    let mut mean = vec![0.0; width];
    for r in rows.clone() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; width];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[Label]) -> Result<Self, ClassifyError> {
        let width = check_training(x, y)?;
        let (_, all_var) = column_stats(x.iter(), width);
        let max_var = all_var.iter().copied().fold(0.0, f64::max);
        let floor = if max_var > 0.0 { VAR_SMOOTHING * max_var } else { VAR_SMOOTHING };

        let class = |label: Label| {
            let rows = x.iter().zip(y).filter(move |(_, l)| **l == label).map(|(r, _)| r);
            let count = rows.clone().count();
            let (mean, var) = column_stats(rows, width);
            ClassGaussians {
                log_prior: (count as f64 / x.len() as f64).ln(),
                mean,
                var: var.into_iter().map(|v| v.max(floor)).collect(),
            }
        };
        Ok(Self { fake: class(Label::Fake), real: class(Label::Real) })
    }

    /// Log joint density, up to the shared `-(d/2) ln 2π` term.
    pub fn log_joint(class: &ClassGaussians, x: &[f64]) -> f64 {
        class.log_prior
            - 0.5
                * x.iter()
                    .zip(&class.mean)
                    .zip(&class.var)
                    .map(|((v, m), s)| s.ln() + (v - m) * (v - m) / s)
                    .sum::<f64>()
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        if Self::log_joint(&self.fake, x) >= Self::log_joint(&self.real, x) {
            Label::Fake
        } else {
            Label::Real
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..3 {
            let mut f = vec![0.0; 32];
            f[0] = -1.0;
            x.push(f.clone());
            y.push(Label::Fake);
            f[0] = 1.0;
            x.push(f);
            y.push(Label::Real);
        }
        (x, y)
    }

    #[test]
    fn symmetric_boundary_at_zero() {
        let (x, y) = toy();
        let m = GaussianNb::fit(&x, &y).unwrap();
        let mut p = vec![0.0; 32];
        p[0] = -0.5;
        assert_eq!(m.predict(&p), Label::Fake);
        p[0] = 0.5;
        assert_eq!(m.predict(&p), Label::Real);
        // Equidistant point: equal likelihoods, tie goes to fake.
        p[0] = 0.0;
        assert_eq!(m.predict(&p), Label::Fake);
    }

    proptest! {
        #[test]
        fn log_space_stays_finite(v in -1e12f64..1e12, w in -1e12f64..1e12) {
            let x = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.25]];
            let y = [Label::Fake, Label::Real, Label::Real];
            let m = GaussianNb::fit(&x, &y).unwrap();
            prop_assert!(GaussianNb::log_joint(&m.fake, &[v, w]).is_finite());
            prop_assert!(GaussianNb::log_joint(&m.real, &[v, w]).is_finite());
        }
    }
}
