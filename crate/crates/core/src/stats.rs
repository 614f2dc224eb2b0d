//! Descriptive statistics, two-sample t-tests and fake/real group comparison.

use serde::Serialize;
use thiserror::Error;

use crate::features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::ingestion::Label;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("t-test needs at least two values per sample (got {a} and {b})")]
    DegenerateSample { a: usize, b: usize },
    #[error("empty sample")]
    EmptySample,
}

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Pooled variance, `n_a + n_b - 2` degrees of freedom.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Description {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub n: usize,
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| compensated_sum(values) / values.len() as f64)
}

/// Unbiased sample variance (two-pass).
pub fn sample_variance(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    Some(compensated_sum(&sq) / (values.len() - 1) as f64)
}

pub fn describe(values: &[f64]) -> Description {
    let min = values.iter().copied().reduce(f64::min);
    let max = values.iter().copied().reduce(f64::max);
    Description {
        min,
        max,
        // Clamped so rounding never pushes the mean outside [min, max].
        mean: mean(values).map(|m| m.clamp(min.unwrap(), max.unwrap())),
        n: values.len(),
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided tail probability `P(|T| >= |t|)` of Student's t with `df`
/// degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

pub fn welch_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TTestResult, StatsError> {
    t_test(a, b, alpha, TTestKind::Welch)
}

pub fn pooled_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TTestResult, StatsError> {
    t_test(a, b, alpha, TTestKind::Pooled)
}

pub fn t_test(a: &[f64], b: &[f64], alpha: f64, kind: TTestKind) -> Result<TTestResult, StatsError> {
    let (na, nb) = (a.len(), b.len());
    if na < 2 || nb < 2 {
        return Err(StatsError::DegenerateSample { a: na, b: nb });
    }
    let (ma, mb) = (mean(a).unwrap(), mean(b).unwrap());
    let (va, vb) = (sample_variance(a).unwrap(), sample_variance(b).unwrap());
    let (fa, fb) = (na as f64, nb as f64);
    let pooled_df = fa + fb - 2.0;

    let (se2, df) = match kind {
        TTestKind::Welch => {
            let (qa, qb) = (va / fa, vb / fb);
            let se2 = qa + qb;
            let denom = qa * qa / (fa - 1.0) + qb * qb / (fb - 1.0);
            let df = if denom > 0.0 { se2 * se2 / denom } else { pooled_df };
            (se2, df)
        }
        TTestKind::Pooled => {
            let sp2 = ((fa - 1.0) * va + (fb - 1.0) * vb) / pooled_df;
            (sp2 * (1.0 / fa + 1.0 / fb), pooled_df)
        }
    };

    let diff = ma - mb;
    let t = if se2 > 0.0 {
        diff / se2.sqrt()
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    let p = student_t_two_sided(t, df);
    Ok(TTestResult { t, df, p_two_sided: p, significant: p < alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxSummary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: usize,
}

/// Quantile by linear interpolation between closest ranks,
/// `h = (n - 1) p` on the sorted sample.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quartiles plus Tukey whiskers: the most extreme observations within
/// 1.5 IQR of the quartiles. Anything beyond is an outlier.
pub fn boxplot_summary(values: &[f64]) -> Result<BoxSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let mut inside = sorted.iter().copied().filter(|v| *v >= lo_fence && *v <= hi_fence);
    let whisker_low = inside.clone().next().unwrap_or(q1).min(q1);
    let whisker_high = inside.next_back().unwrap_or(q3).max(q3);
    let outliers = sorted.iter().filter(|v| **v < lo_fence || **v > hi_fence).count();
    Ok(BoxSummary { q1, median, q3, whisker_low, whisker_high, outliers })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureComparison {
    pub feature: &'static str,
    pub fake: Description,
    pub real: Description,
    /// `None` when either group has fewer than two defined values.
    pub ttest: Option<TTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub alpha: f64,
    pub kind: TTestKind,
    pub features: Vec<FeatureComparison>,
}

impl ComparisonReport {
    pub fn feature(&self, name: &str) -> Option<&FeatureComparison> {
        self.features.iter().find(|f| f.feature == name)
    }
}

/// Defined values of feature `i` for one label.
pub fn feature_sample(vectors: &[FeatureVector], i: usize, label: Label) -> Vec<f64> {
    vectors.iter().filter(|v| v.label == label).filter_map(|v| v.get(i)).collect()
}

pub fn compare_groups(vectors: &[FeatureVector], alpha: f64, kind: TTestKind) -> ComparisonReport {
    let features = (0..FEATURE_COUNT)
        .map(|i| {
            let fake = feature_sample(vectors, i, Label::Fake);
            let real = feature_sample(vectors, i, Label::Real);
            FeatureComparison {
                feature: FEATURE_NAMES[i],
                fake: describe(&fake),
                real: describe(&real),
                ttest: t_test(&fake, &real, alpha, kind).ok(),
            }
        })
        .collect();
    ComparisonReport { alpha, kind, features }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureBoxes {
    pub feature: &'static str,
    pub fake: Option<BoxSummary>,
    pub real: Option<BoxSummary>,
}

pub fn boxplots(vectors: &[FeatureVector]) -> Vec<FeatureBoxes> {
    (0..FEATURE_COUNT)
        .map(|i| FeatureBoxes {
            feature: FEATURE_NAMES[i],
            fake: boxplot_summary(&feature_sample(vectors, i, Label::Fake)).ok(),
            real: boxplot_summary(&feature_sample(vectors, i, Label::Real)).ok(),
        })
        .collect()
}
