//! Diffusion wavelets, geometric scattering and moment pooling.
//!
//! A [`ScaleSet`] `t_0 = 0 ≤ t_1 ≤ … ≤ t_J` defines the bands
//! `Ψ_j = P^{t_{j-1}} − P^{t_j}` for `j = 1..=J` and the low-pass
//! `Φ = P^{t_J}`. With the dyadic set `{0, 1, 2, 4, …, 2^J}` the first band is
//! the high-pass `I − P`. Bands telescope: `Σ_j Ψ_j X + Φ X = X`.
//!
//! Scattering maps are `U[j] = σ(Ψ_j x)` and `U[j₁, j₂] = σ(Ψ_{j₂} σ(Ψ_{j₁} x))`.
//! Second-order paths use `1 ≤ j₁ < j₂`: the high-pass band is excluded from
//! the inner position. With `B` bands a channel therefore yields
//! `B + (B−1)(B−2)/2` maps, plus one low-pass map when enabled.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DiffusionOperator, DiffusionStack};

/// Non-decreasing integer diffusion scales starting at 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ScaleSet(Vec<usize>);

impl ScaleSet {
    pub fn new(scales: Vec<usize>) -> Result<Self> {
        match scales.first() {
            Some(0) => {}
            Some(t) => return Err(Error::InvalidScale(format!("scale sets start at 0, got {t}"))),
            None => return Err(Error::InvalidScale("empty scale set".into())),
        }
        if let Some(w) = scales.windows(2).find(|w| w[1] < w[0]) {
            return Err(Error::InvalidScale(format!(
                "scales must be non-decreasing, found {} after {}",
                w[1], w[0]
            )));
        }
        let last = *scales.last().unwrap();
        if last < 2 {
            return Err(Error::InvalidScale(format!("largest scale must be at least 2, got {last}")));
        }
        Ok(Self(scales))
    }

    pub fn scales(&self) -> &[usize] {
        &self.0
    }

    /// `t_J`.
    pub fn max_scale(&self) -> usize {
        *self.0.last().unwrap()
    }

    /// Number of band-pass filters, `J`.
    pub fn n_bands(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }
}

impl TryFrom<Vec<usize>> for ScaleSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        ScaleSet::new(v)
    }
}

impl From<ScaleSet> for Vec<usize> {
    fn from(s: ScaleSet) -> Self {
        s.0
    }
}

impl fmt::Display for ScaleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `{0, 1, 2, 4, …, 2^J}`.
pub fn dyadic_scales(j: usize) -> Result<ScaleSet> {
    if j < 1 {
        return Err(Error::InvalidScale("dyadic scales need J >= 1".into()));
    }
    if j >= usize::BITS as usize - 1 {
        return Err(Error::InvalidScale(format!("J = {j} overflows")));
    }
    let mut scales = vec![0];
    scales.extend((0..=j).map(|k| 1usize << k));
    ScaleSet::new(scales)
}

/// Band-pass outputs and the low-pass residual of a wavelet bank.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    pub bands: Vec<Array2<f64>>,
    pub lowpass: Array2<f64>,
}

impl WaveletCoefficients {
    /// `Σ_j bands[j] + lowpass`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let mut acc = self.lowpass.clone();
        for b in &self.bands {
            acc += b;
        }
        acc
    }
}

/// `bands[j-1] = P^{t_{j-1}} X − P^{t_j} X`, `lowpass = P^{t_J} X`.
///
/// Repeated scales give all-zero bands, which are kept.
pub fn wavelet_transform(stack: &DiffusionStack, scales: &ScaleSet) -> Result<WaveletCoefficients> {
    if scales.max_scale() > stack.max_scale() {
        return Err(Error::ScaleExceedsStack {
            scale: scales.max_scale(),
            max_scale: stack.max_scale(),
        });
    }
    let bands = scales
        .scales()
        .windows(2)
        .map(|w| Ok(stack.frame(w[0])? - stack.frame(w[1])?))
        .collect::<Result<Vec<_>>>()?;
    Ok(WaveletCoefficients {
        bands,
        lowpass: stack.frame(scales.max_scale())?.clone(),
    })
}

/// Anything that turns a diffusion stack into wavelet coefficients.
pub trait WaveletBank {
    /// Deepest diffusion power the bank reads.
    fn max_scale(&self) -> usize;
    fn n_bands(&self) -> usize;
    fn coefficients(&self, stack: &DiffusionStack) -> Result<WaveletCoefficients>;
}

impl WaveletBank for ScaleSet {
    fn max_scale(&self) -> usize {
        ScaleSet::max_scale(self)
    }

    fn n_bands(&self) -> usize {
        ScaleSet::n_bands(self)
    }

    fn coefficients(&self, stack: &DiffusionStack) -> Result<WaveletCoefficients> {
        wavelet_transform(stack, self)
    }
}

/// Pointwise nonlinearity applied to wavelet outputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Abs,
    Relu,
}

impl Activation {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Abs => v.abs(),
            Activation::Relu => v.max(0.0),
        }
    }

    fn apply_all(self, m: &Array2<f64>) -> Array2<f64> {
        m.mapv(|v| self.apply(v))
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "abs" | "modulus" => Ok(Activation::Abs),
            "relu" => Ok(Activation::Relu),
            _ => Err(Error::UnknownActivation(s.to_string())),
        }
    }
}

/// Which scattering map a node-level column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path {
    First(usize),
    Second(usize, usize),
    Lowpass,
}

/// Column key of the node-level scattering tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MapKey {
    pub path: Path,
    pub channel: usize,
}

impl fmt::Display for MapKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.path {
            Path::First(j) => write!(f, "o1_j{j}_c{}", self.channel),
            Path::Second(a, b) => write!(f, "o2_j{a}-{b}_c{}", self.channel),
            Path::Lowpass => write!(f, "lp_c{}", self.channel),
        }
    }
}

/// Key of one pooled graph-level feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureKey {
    pub map: MapKey,
    pub moment: usize,
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_m{}", self.map, self.moment)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatteringConfig {
    /// 1 or 2.
    pub order: usize,
    pub activation: Activation,
    /// Number of pooled moments `Q`.
    pub moments: usize,
    pub include_lowpass: bool,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        Self {
            order: 2,
            activation: Activation::Abs,
            moments: 4,
            include_lowpass: true,
        }
    }
}

impl ScatteringConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.order) {
            return Err(Error::InvalidConfig(format!(
                "scattering order must be 1 or 2, got {}",
                self.order
            )));
        }
        if self.moments < 1 {
            return Err(Error::InvalidConfig("at least one moment is required".into()));
        }
        Ok(())
    }
}

/// Map layout for `n_channels` channels whose banks have `n_bands` bands.
///
/// Lexicographic in (order, path, channel); the low-pass block comes last.
pub fn map_layout(n_channels: usize, n_bands: usize, config: &ScatteringConfig) -> Vec<MapKey> {
    let mut keys = Vec::new();
    for j in 0..n_bands {
        keys.extend((0..n_channels).map(|channel| MapKey {
            path: Path::First(j),
            channel,
        }));
    }
    if config.order >= 2 {
        for j1 in 1..n_bands {
            for j2 in j1 + 1..n_bands {
                keys.extend((0..n_channels).map(|channel| MapKey {
                    path: Path::Second(j1, j2),
                    channel,
                }));
            }
        }
    }
    if config.include_lowpass {
        keys.extend((0..n_channels).map(|channel| MapKey {
            path: Path::Lowpass,
            channel,
        }));
    }
    keys
}

/// Pooled feature layout: every map key expanded over moments `1..=Q`.
pub fn feature_layout(n_channels: usize, n_bands: usize, config: &ScatteringConfig) -> Vec<FeatureKey> {
    map_layout(n_channels, n_bands, config)
        .into_iter()
        .flat_map(|map| (1..=config.moments).map(move |moment| FeatureKey { map, moment }))
        .collect()
}

/// Length of the pooled feature vector.
pub fn feature_len(n_channels: usize, n_bands: usize, config: &ScatteringConfig) -> usize {
    let second = if config.order >= 2 && n_bands >= 2 {
        (n_bands - 1) * (n_bands - 2) / 2
    } else {
        0
    };
    n_channels * config.moments * (n_bands + second + usize::from(config.include_lowpass))
}

/// Node-level scattering maps, one column per [`MapKey`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMaps {
    pub maps: Array2<f64>,
    pub keys: Vec<MapKey>,
}

/// Scattering maps of every channel under one shared bank.
pub fn scattering<B: WaveletBank>(
    op: &DiffusionOperator,
    x: ArrayView2<'_, f64>,
    bank: &B,
    config: &ScatteringConfig,
) -> Result<NodeMaps> {
    let banks: Vec<&B> = vec![bank; x.ncols()];
    scattering_per_channel(op, x, &banks, config)
}

/// Scattering maps with a separate bank per channel.
///
/// Channels whose bank has fewer bands than the largest one get zero columns
/// for the missing paths so the layout stays rectangular.
pub fn scattering_per_channel<B: WaveletBank>(
    op: &DiffusionOperator,
    x: ArrayView2<'_, f64>,
    banks: &[&B],
    config: &ScatteringConfig,
) -> Result<NodeMaps> {
    config.validate()?;
    if banks.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            actual: banks.len(),
        });
    }
    if x.nrows() != op.n() {
        return Err(Error::DimensionMismatch {
            expected: op.n(),
            actual: x.nrows(),
        });
    }
    let n_bands = banks.iter().map(|b| b.n_bands()).max().unwrap_or(0);
    let keys = map_layout(x.ncols(), n_bands, config);
    let mut maps = Array2::zeros((x.nrows(), keys.len()));
    let column_of = |key: &MapKey| keys.binary_search_by(|k| layout_order(k).cmp(&layout_order(key)));

    for (c, bank) in banks.iter().enumerate() {
        let signal = x.slice(s![.., c..c + 1]);
        let stack = DiffusionStack::build(op, signal, bank.max_scale())?;
        let coeffs = bank.coefficients(&stack)?;
        let first: Vec<Array2<f64>> = coeffs.bands.iter().map(|b| config.activation.apply_all(b)).collect();
        for (j, u) in first.iter().enumerate() {
            let col = column_of(&MapKey {
                path: Path::First(j),
                channel: c,
            })
            .expect("first-order key in layout");
            maps.column_mut(col).assign(&u.column(0));
        }
        if config.order >= 2 {
            for j1 in 1..first.len() {
                let inner = DiffusionStack::build(op, first[j1].view(), bank.max_scale())?;
                let inner_coeffs = bank.coefficients(&inner)?;
                for j2 in j1 + 1..first.len() {
                    let col = column_of(&MapKey {
                        path: Path::Second(j1, j2),
                        channel: c,
                    })
                    .expect("second-order key in layout");
                    let v = config.activation.apply_all(&inner_coeffs.bands[j2]);
                    maps.column_mut(col).assign(&v.column(0));
                }
            }
        }
        if config.include_lowpass {
            let col = column_of(&MapKey {
                path: Path::Lowpass,
                channel: c,
            })
            .expect("low-pass key in layout");
            maps.column_mut(col).assign(&coeffs.lowpass.column(0));
        }
    }
    Ok(NodeMaps { maps, keys })
}

// Sort key matching `map_layout`: order block, then path, then channel.
fn layout_order(k: &MapKey) -> (u8, Path, usize) {
    let block = match k.path {
        Path::First(_) => 0,
        Path::Second(..) => 1,
        Path::Lowpass => 2,
    };
    (block, k.path, k.channel)
}

/// Unnormalized moments: entry `k·Q + (q−1)` is `Σ_i maps[i, k]^q`.
pub fn moment_pool(node_maps: ArrayView2<'_, f64>, q: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(node_maps.ncols() * q);
    for col in node_maps.axis_iter(Axis(1)) {
        for power in 1..=q as i32 {
            out.push(col.iter().map(|v| v.powi(power)).sum());
        }
    }
    out
}

/// Graph-level scattering features with their layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringFeatures {
    pub graph_vector: Vec<f64>,
    pub layout: Vec<FeatureKey>,
}

/// Pools [`NodeMaps`] into a graph vector.
pub fn pool_features(maps: &NodeMaps, moments: usize) -> ScatteringFeatures {
    let layout = maps
        .keys
        .iter()
        .flat_map(|&map| (1..=moments).map(move |moment| FeatureKey { map, moment }))
        .collect();
    ScatteringFeatures {
        graph_vector: moment_pool(maps.maps.view(), moments),
        layout,
    }
}
