//! Linear probe: ℓ2-penalised logistic regression by full-batch gradient descent.
//!
//! Binary problems train one model; `K > 2` classes train one-vs-rest models
//! and predict the arg-max score.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticHyper {
    /// Step size. `None` uses `1 / L` for the loss's smoothness constant `L`.
    pub learning_rate: Option<f64>,
    pub epochs: usize,
    pub l2: f64,
    /// Stop once the gradient's ∞-norm falls below this.
    pub tolerance: f64,
    /// Weight samples by inverse class frequency.
    pub class_weighting: bool,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        Self {
            learning_rate: None,
            epochs: 3000,
            l2: 1e-2,
            tolerance: 1e-6,
            class_weighting: false,
        }
    }
}

/// Column-wise affine standardisation fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Array1<f64>,
    scale: Array1<f64>,
}

impl Standardizer {
    /// Constant columns keep unit scale, so they map to zero.
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mean = x.sum_axis(Axis(0)) / n;
        let mut scale = Array1::zeros(x.ncols());
        for (c, col) in x.axis_iter(Axis(1)).enumerate() {
            let var = col.iter().map(|v| (v - mean[c]).powi(2)).sum::<f64>() / n;
            scale[c] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.axis_iter_mut(Axis(0)) {
            row -= &self.mean;
            row /= &self.scale;
        }
        out
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

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Weighted mean logistic loss plus `λ/2 ‖w‖²` (bias unpenalised).
///
/// `params` holds the weights followed by the bias; `y` is 0/1.
pub fn logistic_loss(
    params: ArrayView1<'_, f64>,
    x: ArrayView2<'_, f64>,
    y: &[f64],
    sample_weights: &[f64],
    l2: f64,
) -> f64 {
    let d = x.ncols();
    let w = params.slice(ndarray::s![..d]);
    let b = params[d];
    let total: f64 = sample_weights.iter().sum();
    let data: f64 = x
        .axis_iter(Axis(0))
        .zip(y)
        .zip(sample_weights)
        .map(|((row, &yi), &si)| {
            let z = row.dot(&w) + b;
            si * (softplus(z) - yi * z)
        })
        .sum();
    data / total + 0.5 * l2 * w.dot(&w)
}

/// Analytic gradient of [`logistic_loss`].
pub fn logistic_gradient(
    params: ArrayView1<'_, f64>,
    x: ArrayView2<'_, f64>,
    y: &[f64],
    sample_weights: &[f64],
    l2: f64,
) -> Array1<f64> {
    let d = x.ncols();
    let w = params.slice(ndarray::s![..d]);
    let b = params[d];
    let total: f64 = sample_weights.iter().sum();
    let mut grad = Array1::zeros(d + 1);
    for ((row, &yi), &si) in x.axis_iter(Axis(0)).zip(y).zip(sample_weights) {
        let r = si * (sigmoid(row.dot(&w) + b) - yi) / total;
        grad.slice_mut(ndarray::s![..d]).scaled_add(r, &row);
        grad[d] += r;
    }
    grad.slice_mut(ndarray::s![..d]).scaled_add(l2, &w);
    grad
}

// Largest eigenvalue of Xᵀ diag(s) X / Σs (bias column included), by power iteration.
fn curvature_bound(x: ArrayView2<'_, f64>, sample_weights: &[f64]) -> f64 {
    let d = x.ncols() + 1;
    let total: f64 = sample_weights.iter().sum();
    let mut v = Array1::from_elem(d, 1.0 / (d as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..100 {
        let mut next = Array1::<f64>::zeros(d);
        for (row, &s) in x.axis_iter(Axis(0)).zip(sample_weights) {
            let proj = row.dot(&v.slice(ndarray::s![..d - 1])) + v[d - 1];
            next.slice_mut(ndarray::s![..d - 1]).scaled_add(s * proj / total, &row);
            next[d - 1] += s * proj / total;
        }
        let norm = next.dot(&next).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let converged = (norm - lambda).abs() <= 1e-9 * norm;
        lambda = norm;
        v = next / norm;
        if converged {
            break;
        }
    }
    lambda
}

/// One binary model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryLogistic {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs_run: usize,
    pub converged: bool,
}

impl BinaryLogistic {
    pub fn decision(&self, row: ArrayView1<'_, f64>) -> f64 {
        row.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias
    }
}

fn fit_binary(x: ArrayView2<'_, f64>, y: &[f64], sample_weights: &[f64], hyper: &LogisticHyper) -> Result<BinaryLogistic> {
    let d = x.ncols();
    let lr = match hyper.learning_rate {
        Some(lr) => lr,
        None => 1.0 / (0.25 * curvature_bound(x, sample_weights) * 1.05 + hyper.l2 + 1e-12),
    };
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::InvalidConfig(format!("learning rate must be positive, got {lr}")));
    }
    let mut params = Array1::<f64>::zeros(d + 1);
    let mut converged = false;
    let mut epochs_run = 0;
    for epoch in 0..hyper.epochs {
        let grad = logistic_gradient(params.view(), x, y, sample_weights, hyper.l2);
        let g_inf = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if !g_inf.is_finite() {
            return Err(Error::NonFinite(format!("gradient diverged at epoch {epoch}")));
        }
        epochs_run = epoch;
        if g_inf < hyper.tolerance {
            converged = true;
            break;
        }
        params.scaled_add(-lr, &grad);
        epochs_run = epoch + 1;
    }
    let loss = logistic_loss(params.view(), x, y, sample_weights, hyper.l2);
    if !loss.is_finite() {
        return Err(Error::NonFinite("training loss is not finite; lower the learning rate".into()));
    }
    Ok(BinaryLogistic {
        weights: params.slice(ndarray::s![..d]).to_vec(),
        bias: params[d],
        epochs_run,
        converged,
    })
}

/// Trained probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub n_classes: usize,
    /// One model for two classes, otherwise one per class.
    pub models: Vec<BinaryLogistic>,
}

impl LogisticModel {
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        x.axis_iter(Axis(0))
            .map(|row| {
                if self.n_classes == 2 {
                    usize::from(self.models[0].decision(row) > 0.0)
                } else {
                    let scores: Vec<f64> = self.models.iter().map(|m| m.decision(row)).collect();
                    (0..scores.len())
                        .fold(0, |best, k| if scores[k] > scores[best] { k } else { best })
                }
            })
            .collect()
    }
}

/// Inverse-frequency sample weights with mean one.
pub fn balanced_weights(labels: &[usize], n_classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count() as f64;
    labels
        .iter()
        .map(|&l| labels.len() as f64 / (present * counts[l] as f64))
        .collect()
}

/// Trains on rows of `x` (expected standardised) with labels in `0..n_classes`.
pub fn train_logistic(
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    n_classes: usize,
    hyper: &LogisticHyper,
) -> Result<LogisticModel> {
    if x.nrows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            actual: labels.len(),
        });
    }
    if x.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if n_classes < 2 || labels.iter().any(|&l| l >= n_classes) {
        return Err(Error::InvalidConfig(format!(
            "labels must lie in 0..{n_classes} with at least two classes"
        )));
    }
    let weights = if hyper.class_weighting {
        balanced_weights(labels, n_classes)
    } else {
        vec![1.0; labels.len()]
    };
    let targets: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
    let models = targets
        .into_iter()
        .map(|k| {
            let y: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l == k))).collect();
            fit_binary(x, &y, &weights, hyper)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LogisticModel { n_classes, models })
}

/// Fraction of matching entries.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}
