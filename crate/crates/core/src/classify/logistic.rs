//! L2-regularised logistic regression on z-scored features, fitted by
//! full-batch gradient descent with Armijo backtracking.
//!
//! Objective: `mean(log(1 + e^z) - y z) + l2 / (2n) * |w|^2`, with the bias
//! unpenalised and `y = 1` for fake.

use serde::{Deserialize, Serialize};

use super::{check_training, ClassifyError};
use crate::ingestion::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct LrConfig {
    pub l2: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for LrConfig {
    fn default() -> Self {
        Self { l2: 1.0, tolerance: 1e-6, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Optimiser trace of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    pub losses: Vec<f64>,
    pub final_grad_norm: f64,
    pub iterations: usize,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: Vec<f64>,
    l2: f64,
}

impl Problem<'_> {
    fn n(&self) -> f64 {
        self.x.len() as f64
    }

    fn logit(w: &[f64], b: f64, row: &[f64]) -> f64 {
        b + w.iter().zip(row).map(|(a, v)| a * v).sum::<f64>()
    }

    fn loss(&self, w: &[f64], b: f64) -> f64 {
        let data: f64 = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(r, y)| {
                let z = Self::logit(w, b, r);
                softplus(z) - y * z
            })
            .sum();
        data / self.n() + self.l2 / (2.0 * self.n()) * w.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let n = self.n();
        let mut gw: Vec<f64> = w.iter().map(|v| self.l2 * v / n).collect();
        let mut gb = 0.0;
        for (r, y) in self.x.iter().zip(&self.y) {
            let e = (sigmoid(Self::logit(w, b, r)) - y) / n;
            gb += e;
            for (g, v) in gw.iter_mut().zip(r) {
                *g += e * v;
            }
        }
        (gw, gb)
    }
}

impl LogisticRegression {
    pub fn fit(x: &[Vec<f64>], y: &[Label], config: &LrConfig) -> Result<Self, ClassifyError> {
        Self::fit_traced(x, y, config).map(|(m, _)| m)
    }

    pub fn fit_traced(x: &[Vec<f64>], y: &[Label], config: &LrConfig) -> Result<(Self, FitTrace), ClassifyError> {
        let width = check_training(x, y)?;
        let n = x.len() as f64;
        let mut mean = vec![0.0; width];
        for r in x {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v / n);
        }
        let mut scale = vec![0.0; width];
        for r in x {
            scale.iter_mut().zip(r).zip(&mean).for_each(|((s, v), m)| *s += (v - m) * (v - m) / n);
        }
        let scale: Vec<f64> = scale.into_iter().map(|v| if v > 0.0 { v.sqrt() } else { 1.0 }).collect();
        let z: Vec<Vec<f64>> =
            x.iter().map(|r| r.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s).collect()).collect();
        let problem =
            Problem { x: &z, y: y.iter().map(|l| if l.is_fake() { 1.0 } else { 0.0 }).collect(), l2: config.l2 };

        let mut w = vec![0.0; width];
        let mut b = 0.0;
        let mut loss = problem.loss(&w, b);
        let mut losses = vec![loss];
        let mut step = 1.0;
        let mut iterations = 0;
        let (mut gw, mut gb) = problem.gradient(&w, b);
        let mut gnorm2 = gb * gb + gw.iter().map(|g| g * g).sum::<f64>();

        while gnorm2.sqrt() > config.tolerance && iterations < config.max_iter {
            iterations += 1;
            step *= 2.0;
            let (nw, nb, nloss) = loop {
                let nw: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a - step * g).collect();
                let nb = b - step * gb;
                let nloss = problem.loss(&nw, nb);
                if nloss <= loss - 1e-4 * step * gnorm2 {
                    break (nw, nb, nloss);
                }
                step *= 0.5;
                if step < 1e-20 {
                    break (w.clone(), b, loss);
                }
            };
            if nloss == loss && nw == w {
                break;
            }
            w = nw;
            b = nb;
            loss = nloss;
            losses.push(loss);
            (gw, gb) = problem.gradient(&w, b);
            gnorm2 = gb * gb + gw.iter().map(|g| g * g).sum::<f64>();
        }

        Ok((Self { mean, scale, weights: w, bias: b }, FitTrace { losses, final_grad_norm: gnorm2.sqrt(), iterations }))
    }

    pub fn probability_fake(&self, x: &[f64]) -> f64 {
        let z = self.bias
            + x.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .zip(&self.weights)
                .map(|(((v, m), s), w)| w * (v - m) / s)
                .sum::<f64>();
        sigmoid(z)
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        if self.probability_fake(x) >= 0.5 {
            Label::Fake
        } else {
            Label::Real
        }
    }
}
