//! Generalized wavelets from a selector matrix (inference only).
//!
//! Row `j` of the `J × t_max` selector `F` weights the diffusion powers
//! `P^1 … P^{t_max}`. The bank is
//!
//! ```text
//! Ψ̃_0 x = x − Σ_t F(1,t) P^t x
//! Ψ̃_j x = Σ_t (F(j,t) − F(j+1,t)) P^t x      1 ≤ j ≤ J−1
//! Ψ̃_J x = Σ_t F(J,t) P^t x
//! ```
//!
//! With one-hot rows at `t̃_1 < … < t̃_J` this is the generalized wavelet
//! transform on scales `(0, t̃_1, …, t̃_J)`, with `Ψ̃_J` playing the low-pass.

use std::io::{BufRead, BufReader, Read, Write};

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::graph::DiffusionStack;
use crate::wavelets::{ScaleSet, WaveletBank, WaveletCoefficients};

/// Default logit placed on selected columns by [`one_hot_theta`].
pub const ONE_HOT_LOGIT: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorMatrix {
    theta: Array2<f64>,
    f: Array2<f64>,
    softmax_enabled: bool,
}

/// Builds `F` from `theta`, applying a row softmax when enabled.
pub fn selector_matrix(theta: Array2<f64>, softmax_enabled: bool) -> Result<SelectorMatrix> {
    if theta.nrows() < 2 || theta.ncols() < 2 {
        return Err(Error::DimensionError(format!(
            "need at least 2 rows and 2 columns, got {}x{}",
            theta.nrows(),
            theta.ncols()
        )));
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("selector parameters must be finite".into()));
    }
    let f = if softmax_enabled {
        let mut f = theta.clone();
        for mut row in f.axis_iter_mut(Axis(0)) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.mapv_inplace(|v| (v - max).exp());
            let total = row.sum();
            row.mapv_inplace(|v| v / total);
        }
        f
    } else {
        theta.clone()
    };
    Ok(SelectorMatrix {
        theta,
        f,
        softmax_enabled,
    })
}

impl SelectorMatrix {
    pub fn theta(&self) -> &Array2<f64> {
        &self.theta
    }

    pub fn f(&self) -> &Array2<f64> {
        &self.f
    }

    pub fn softmax_enabled(&self) -> bool {
        self.softmax_enabled
    }

    /// Number of selector rows, `J`.
    pub fn rows(&self) -> usize {
        self.f.nrows()
    }

    pub fn t_max(&self) -> usize {
        self.f.ncols()
    }
}

/// `θ` with [`ONE_HOT_LOGIT`] at column `t − 1` of row `j` for every
/// non-zero scale `t = scales[j + 1]`.
pub fn one_hot_theta(scales: &ScaleSet, t_max: usize) -> Result<Array2<f64>> {
    one_hot_theta_with(scales, t_max, ONE_HOT_LOGIT)
}

pub fn one_hot_theta_with(scales: &ScaleSet, t_max: usize, logit: f64) -> Result<Array2<f64>> {
    let targets = &scales.scales()[1..];
    if scales.max_scale() > t_max {
        return Err(Error::ScaleExceedsStack {
            scale: scales.max_scale(),
            max_scale: t_max,
        });
    }
    if targets.contains(&0) {
        return Err(Error::InvalidScale("selector rows cannot pick P^0".into()));
    }
    let mut theta = Array2::zeros((targets.len(), t_max));
    for (j, &t) in targets.iter().enumerate() {
        theta[[j, t - 1]] = logit;
    }
    Ok(theta)
}

/// Evaluates the selector-matrix wavelets on a diffusion stack.
///
/// `bands` holds `Ψ̃_0 … Ψ̃_{J−1}` and `lowpass` holds `Ψ̃_J`.
pub fn legs_wavelets(stack: &DiffusionStack, selector: &SelectorMatrix) -> Result<WaveletCoefficients> {
    if selector.t_max() > stack.max_scale() {
        return Err(Error::ScaleExceedsStack {
            scale: selector.t_max(),
            max_scale: stack.max_scale(),
        });
    }
    let f = &selector.f;
    let rows = f.nrows();
    let shape = (stack.n(), stack.channels());
    let weighted = |weight: &dyn Fn(usize) -> f64| -> Array2<f64> {
        let mut acc = Array2::zeros(shape);
        for t in 1..=selector.t_max() {
            let w = weight(t);
            if w != 0.0 {
                acc.scaled_add(w, &stack.frames()[t]);
            }
        }
        acc
    };
    let mut bands = Vec::with_capacity(rows);
    bands.push(&stack.frames()[0] - &weighted(&|t| f[[0, t - 1]]));
    for j in 0..rows - 1 {
        bands.push(weighted(&|t| f[[j, t - 1]] - f[[j + 1, t - 1]]));
    }
    let lowpass = weighted(&|t| f[[rows - 1, t - 1]]);
    Ok(WaveletCoefficients { bands, lowpass })
}

impl WaveletBank for SelectorMatrix {
    fn max_scale(&self) -> usize {
        self.t_max()
    }

    fn n_bands(&self) -> usize {
        self.rows()
    }

    fn coefficients(&self, stack: &DiffusionStack) -> Result<WaveletCoefficients> {
        legs_wavelets(stack, self)
    }
}

/// Writes a dense matrix as headerless CSV, 17 significant digits.
pub fn write_matrix_csv<W: Write>(m: &Array2<f64>, mut out: W) -> Result<()> {
    for row in m.axis_iter(Axis(0)) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads a headerless numeric CSV matrix.
pub fn read_matrix_csv<R: Read>(input: R) -> Result<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| cell.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::MalformedLine {
                file: "<matrix>".into(),
                line: k + 1,
                reason: e.to_string(),
            })?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::MalformedLine {
                    file: "<matrix>".into(),
                    line: k + 1,
                    reason: format!("expected {} columns, got {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), cols), flat).map_err(|e| Error::ShapeMismatch(e.to_string()))
}
