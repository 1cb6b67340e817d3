//! Logistic model of "bug in the next month" from coverage, churn and the
//! current bug count.
//!
//! Features are standardized to zero mean and unit variance before
//! training; the reported weights are mapped back to the raw feature space.
//! The weight on the bug-count feature is kept non-negative (projected
//! gradient descent), so more bugs never lower the predicted risk.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trend::{ComponentTrend, TrendPoint};

pub const MIN_SAMPLES: usize = 20;
pub const FEATURES: usize = 3;
const PRIOR: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-3,
        }
    }
}

/// One training row: features of month t, label "bug in month t+1".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: [f64; FEATURES],
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub cov: f64,
    pub churn: f64,
    pub prior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Raw-feature weights and bias, equivalent to the standardized ones.
    pub weights: Weights,
    pub bias: f64,
    pub std_weights: [f64; FEATURES],
    pub std_bias: f64,
    pub feature_mean: [f64; FEATURES],
    pub feature_scale: [f64; FEATURES],
    /// Divisor that maps churn lines to the churn feature.
    pub churn_max: f64,
    /// Median latest coverage among components that never had a bug.
    pub zero_bug_median: Option<f64>,
    pub samples: usize,
    pub options: TrainOptions,
    /// Loss before the first update, then after every epoch.
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrainError {
    #[error("{samples} labelled samples, at least {MIN_SAMPLES} needed")]
    InsufficientData { samples: usize },
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Feature vector: coverage fraction, churn over `churn_max`, and the bug
/// count capped at 5 and scaled to [0, 1].
pub fn features(point: &TrendPoint, churn_max: f64) -> [f64; FEATURES] {
    let churn = if churn_max > 0.0 {
        point.churn_lines as f64 / churn_max
    } else {
        0.0
    };
    [point.conditional_pct / 100.0, churn, point.bug_count.min(5) as f64 / 5.0]
}

/// Largest churn over all points; the churn feature's normalizer.
pub fn corpus_churn_max(trends: &[ComponentTrend]) -> f64 {
    trends
        .iter()
        .flat_map(|t| &t.series)
        .map(|p| p.churn_lines)
        .max()
        .unwrap_or(0) as f64
}

/// Every consecutive pair of months in every series.
pub fn training_samples(trends: &[ComponentTrend], churn_max: f64) -> Vec<Sample> {
    trends
        .iter()
        .flat_map(|t| t.series.windows(2))
        .map(|w| Sample {
            x: features(&w[0], churn_max),
            y: if w[1].bug_count > 0 { 1.0 } else { 0.0 },
        })
        .collect()
}

/// Mean cross-entropy plus `l2 / 2 · |w|²`, and its gradient
/// `(∂/∂w, ∂/∂b)`, over already standardized samples.
pub fn loss_and_grad(w: &[f64; FEATURES], b: f64, samples: &[Sample], l2: f64) -> (f64, [f64; FEATURES], f64) {
    let n = samples.len() as f64;
    let mut loss = 0.0;
    let mut gw = [0.0; FEATURES];
    let mut gb = 0.0;
    for s in samples {
        let z: f64 = b + w.iter().zip(&s.x).map(|(a, x)| a * x).sum::<f64>();
        loss += softplus(z) - s.y * z;
        let r = sigmoid(z) - s.y;
        for (g, x) in gw.iter_mut().zip(&s.x) {
            *g += r * x;
        }
        gb += r;
    }
    loss /= n;
    gb /= n;
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
    }
    loss += 0.5 * l2 * w.iter().map(|wi| wi * wi).sum::<f64>();
    (loss, gw, gb)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// Full-batch gradient descent from zero weights.
pub fn train_model(trends: &[ComponentTrend], options: TrainOptions) -> Result<ModelParams, TrainError> {
    let churn_max = corpus_churn_max(trends);
    let raw = training_samples(trends, churn_max);
    if raw.len() < MIN_SAMPLES {
        return Err(TrainError::InsufficientData { samples: raw.len() });
    }
    let n = raw.len() as f64;
    let mut mean = [0.0; FEATURES];
    let mut scale = [1.0; FEATURES];
    for j in 0..FEATURES {
        mean[j] = raw.iter().map(|s| s.x[j]).sum::<f64>() / n;
        let var = raw.iter().map(|s| (s.x[j] - mean[j]).powi(2)).sum::<f64>() / n;
        // A constant feature carries no signal; leave it unscaled.
        if var.sqrt() > 1e-12 {
            scale[j] = var.sqrt();
        }
    }
    let samples: Vec<Sample> = raw
        .iter()
        .map(|s| {
            let mut x = [0.0; FEATURES];
            for j in 0..FEATURES {
                x[j] = (s.x[j] - mean[j]) / scale[j];
            }
            Sample { x, y: s.y }
        })
        .collect();

    let mut w = [0.0; FEATURES];
    let mut b = 0.0;
    let mut history = Vec::with_capacity(options.epochs + 1);
    for _ in 0..options.epochs {
        let (loss, gw, gb) = loss_and_grad(&w, b, &samples, options.l2);
        history.push(loss);
        for j in 0..FEATURES {
            w[j] -= options.learning_rate * gw[j];
        }
        w[PRIOR] = w[PRIOR].max(0.0);
        b -= options.learning_rate * gb;
    }
    history.push(loss_and_grad(&w, b, &samples, options.l2).0);

    let raw_w: Vec<f64> = (0..FEATURES).map(|j| w[j] / scale[j]).collect();
    let raw_b = b - (0..FEATURES).map(|j| w[j] * mean[j] / scale[j]).sum::<f64>();
    let zero_bug = trends
        .iter()
        .filter(|t| t.series.iter().all(|p| p.bug_count == 0))
        .filter_map(|t| t.latest().map(|p| p.conditional_pct))
        .collect();

    Ok(ModelParams {
        weights: Weights {
            cov: raw_w[0],
            churn: raw_w[1],
            prior: raw_w[2],
        },
        bias: raw_b,
        std_weights: w,
        std_bias: b,
        feature_mean: mean,
        feature_scale: scale,
        churn_max,
        zero_bug_median: median(zero_bug),
        samples: raw.len(),
        options,
        loss_history: history,
    })
}

impl ModelParams {
    /// Predicted probability of a bug next month for raw features `x`.
    pub fn predict(&self, x: &[f64; FEATURES]) -> f64 {
        let z: f64 = self.std_bias
            + (0..FEATURES)
                .map(|j| self.std_weights[j] * (x[j] - self.feature_mean[j]) / self.feature_scale[j])
                .sum::<f64>();
        sigmoid(z)
    }

    /// Risk for `point` with its coverage replaced by `coverage_pct`.
    pub fn risk_at(&self, point: &TrendPoint, coverage_pct: f64) -> f64 {
        let mut x = features(point, self.churn_max);
        x[0] = coverage_pct / 100.0;
        self.predict(&x)
    }

    /// Whether more coverage lowers the predicted risk.
    pub fn coverage_helps(&self) -> bool {
        self.std_weights[0] < 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advisor::ingest::Period;
    use crate::rng::SplitMix64;

    fn trend(name: &str, points: &[(u32, f64)]) -> ComponentTrend {
        let mut period: Period = "2018-01".parse().unwrap();
        let series = points
            .iter()
            .map(|&(bugs, cov)| {
                let p = TrendPoint {
                    period,
                    bug_count: bugs,
                    conditional_pct: cov,
                    functional_pct: 100.0,
                    churn_lines: 10 * bugs as u64,
                };
                period = period.next();
                p
            })
            .collect();
        ComponentTrend {
            component: name.into(),
            series,
        }
    }

    #[test]
    fn too_few_samples() {
        let t = trend("X", &[(0, 50.0); 6]);
        assert_eq!(
            train_model(&[t], TrainOptions::default()),
            Err(TrainError::InsufficientData { samples: 5 })
        );
    }

    #[test]
    fn all_zero_labels_give_low_risk() {
        let trends: Vec<_> = (0..5)
            .map(|i| trend(&format!("T{i}"), &[(0, 40.0 + 10.0 * i as f64); 6]))
            .collect();
        let m = train_model(&trends, TrainOptions::default()).unwrap();
        assert!(m.std_bias < -2.0, "bias {}", m.std_bias);
        for t in &trends {
            for p in &t.series {
                assert!(m.risk_at(p, p.conditional_pct) < 0.1);
            }
        }
        assert_eq!(m.zero_bug_median, Some(60.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = SplitMix64::new(3);
        let samples: Vec<Sample> = (0..40)
            .map(|_| Sample {
                x: [rng.unit_f64() * 2.0 - 1.0, rng.unit_f64(), rng.unit_f64() * 3.0],
                y: (rng.below(2)) as f64,
            })
            .collect();
        let h = 1e-5;
        for _ in 0..100 {
            let w = [rng.unit_f64() * 4.0 - 2.0, rng.unit_f64() * 4.0 - 2.0, rng.unit_f64() * 4.0 - 2.0];
            let b = rng.unit_f64() * 2.0 - 1.0;
            let (_, gw, gb) = loss_and_grad(&w, b, &samples, 1e-3);
            for j in 0..=FEATURES {
                let (mut wp, mut wm, mut bp, mut bm) = (w, w, b, b);
                if j < FEATURES {
                    wp[j] += h;
                    wm[j] -= h;
                } else {
                    bp += h;
                    bm -= h;
                }
                let numeric = (loss_and_grad(&wp, bp, &samples, 1e-3).0 - loss_and_grad(&wm, bm, &samples, 1e-3).0) / (2.0 * h);
                let analytic = if j < FEATURES { gw[j] } else { gb };
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
                assert!(rel <= 1e-4, "component {j}: {analytic} vs {numeric}");
            }
        }
    }

    #[test]
    fn training_is_deterministic_and_loss_does_not_rise() {
        let trends: Vec<_> = (0..6)
            .map(|i| trend(&format!("T{i}"), &[(i % 2, 30.0 + 10.0 * i as f64), (1, 50.0), (0, 90.0), (i % 3, 60.0), (0, 70.0)]))
            .collect();
        let a = train_model(&trends, TrainOptions::default()).unwrap();
        let b = train_model(&trends, TrainOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.loss_history.len(), 501);
        for w in a.loss_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        assert!(a.std_weights[2] >= 0.0);
    }
}
