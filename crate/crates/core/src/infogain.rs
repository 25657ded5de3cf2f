//! Unsupervised, per-channel selection of diffusion-wavelet scales.
//!
//! For every graph and channel `c`, each diffused signal `P^t x_c`
//! (`t = 2..=t_J`) is turned into a probability vector `q_c^t` (min-max
//! scaling, ℓ¹ normalisation, zero substitution) and compared to the smooth
//! reference `q_c^{t_J}` by KL divergence. Divergences are summed over graphs,
//! accumulated over `t`, and min-max rescaled into an information curve on
//! `t = 2..=t_J−1`. Interior scales are the first `t` at which the curve
//! reaches each selector quantile. Every channel's set starts with `(0, 1, 2)`
//! and ends with `t_J`.
//!
//! Logarithms are natural (nats).

use std::borrow::Borrow;

use ndarray::Array2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{diffuse_stack, lazy_random_walk, Graph};
use crate::wavelets::ScaleSet;

/// Version tag written into serialized models.
pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// How zero entries of a normalised vector are replaced before taking logs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroSubstitution {
    /// Half the smallest positive entry.
    HalfMinNonzero,
    /// A fixed value.
    Constant(f64),
}

impl Default for ZeroSubstitution {
    fn default() -> Self {
        ZeroSubstitution::HalfMinNonzero
    }
}

impl std::str::FromStr for ZeroSubstitution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half-min" | "half-min-nonzero" => Ok(ZeroSubstitution::HalfMinNonzero),
            other => match other.parse::<f64>() {
                Ok(eps) if eps > 0.0 && eps.is_finite() => Ok(ZeroSubstitution::Constant(eps)),
                _ => Err(Error::InvalidConfig(format!(
                    "zero substitution must be `half-min` or a positive number, got {other:?}"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfoGainConfig {
    /// Largest diffusion scale `t_J`; also the reference distribution's scale.
    pub max_scale: usize,
    /// Selector quantiles, strictly increasing in `(0, 1)`.
    pub quantiles: Vec<f64>,
    pub zero_substitution: ZeroSubstitution,
    /// Re-weight per-graph divergences by inverse class frequency.
    pub class_balance: bool,
    /// A channel whose reference distribution is constant on more than this
    /// fraction of fitted graphs is uninformative.
    pub uninformative_tolerance: f64,
    /// Fraction of the given graphs used for fitting.
    pub sample_fraction: f64,
    /// Seed for drawing the fitted subset when `sample_fraction < 1`.
    pub sample_seed: u64,
}

impl Default for InfoGainConfig {
    fn default() -> Self {
        Self {
            max_scale: 16,
            quantiles: quantiles_from_interval(0.25).expect("valid interval"),
            zero_substitution: ZeroSubstitution::HalfMinNonzero,
            class_balance: false,
            uninformative_tolerance: 0.5,
            sample_fraction: 1.0,
            sample_seed: 0,
        }
    }
}

impl InfoGainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_scale < 3 {
            return Err(Error::InvalidScale(format!(
                "t_J must be at least 3, got {}",
                self.max_scale
            )));
        }
        if self.quantiles.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::InvalidConfig("quantiles must lie strictly between 0 and 1".into()));
        }
        if self.quantiles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("quantiles must be strictly increasing".into()));
        }
        if let ZeroSubstitution::Constant(eps) = self.zero_substitution {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidConfig(format!("zero substitute must be positive, got {eps}")));
            }
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sample fraction must be in (0, 1], got {}",
                self.sample_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.uninformative_tolerance) {
            return Err(Error::InvalidConfig(format!(
                "uninformative tolerance must be in [0, 1], got {}",
                self.uninformative_tolerance
            )));
        }
        Ok(())
    }
}

/// Quantiles `k·interval` for `k = 1, 2, …` strictly below 1.
///
/// An interval of `1/4` gives `(0.25, 0.5, 0.75)`.
pub fn quantiles_from_interval(interval: f64) -> Result<Vec<f64>> {
    if !(interval > 0.0 && interval < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "quantile interval must be in (0, 1), got {interval}"
        )));
    }
    Ok((1..)
        .map(|k| k as f64 * interval)
        .take_while(|&q| q < 1.0 - 1e-9)
        .collect())
}

/// Strictly positive vector summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates an existing distribution.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::NonFinite("probabilities must be finite and positive".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self(p))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Min-max scales `v` to `[0, 1]`, ℓ¹-normalises, substitutes zeros and
/// renormalises.
///
/// With [`ZeroSubstitution::HalfMinNonzero`] the order of normalisation and
/// substitution does not matter; with a constant it is applied to the
/// normalised probabilities.
pub fn normalize_channel(v: &[f64], zeros: ZeroSubstitution) -> Result<ProbabilityVector> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("signal contains non-finite entries".into()));
    }
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if v.is_empty() || hi == lo {
        return Err(Error::ConstantVector);
    }
    let span = hi - lo;
    let mut q: Vec<f64> = v.iter().map(|&x| (x - lo) / span).collect();
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= total);
    let fill = match zeros {
        ZeroSubstitution::HalfMinNonzero => {
            0.5 * q.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min)
        }
        ZeroSubstitution::Constant(eps) => eps,
    };
    for x in q.iter_mut().filter(|x| **x == 0.0) {
        *x = fill;
    }
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= total);
    Ok(ProbabilityVector(q))
}

/// `D_KL(p ‖ q) = Σ p_k ln(p_k / q_k)` in nats.
pub fn kl_divergence(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    let d: f64 = p
        .0
        .iter()
        .zip(&q.0)
        .map(|(&a, &b)| if a == b { 0.0 } else { a * (a / b).ln() })
        .sum();
    // Rounding can leave tiny negative values for near-identical inputs.
    Ok(d.max(0.0))
}

/// Divergences indexed by `(t, c)` for `t = 2..=t_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTable {
    max_scale: usize,
    values: Array2<f64>,
}

impl DivergenceTable {
    pub fn zeros(max_scale: usize, channels: usize) -> Self {
        Self {
            max_scale,
            values: Array2::zeros((max_scale - 1, channels)),
        }
    }

    /// Wraps a `(t_J − 1) × C` matrix whose row `k` holds `t = k + 2`.
    pub fn from_values(max_scale: usize, values: Array2<f64>) -> Result<Self> {
        if max_scale < 2 || values.nrows() != max_scale - 1 {
            return Err(Error::ShapeMismatch(format!(
                "expected {} rows for t_J = {max_scale}, got {}",
                max_scale.saturating_sub(1),
                values.nrows()
            )));
        }
        Ok(Self { max_scale, values })
    }

    pub fn max_scale(&self) -> usize {
        self.max_scale
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }

    /// Divergence at scale `t ≥ 2` and channel `c`.
    pub fn get(&self, t: usize, c: usize) -> f64 {
        self.values[[t - 2, c]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// One graph's divergences plus the channels whose reference was constant.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDivergences {
    pub table: DivergenceTable,
    pub uninformative: Vec<bool>,
}

/// Per-graph KL divergences of every channel against its `t_J` reference.
///
/// A channel whose reference is constant gets a zero column and is marked.
/// A constant vector at an earlier scale is treated as the uniform
/// distribution.
pub fn per_graph_divergences(graph: &Graph, config: &InfoGainConfig) -> Result<GraphDivergences> {
    let t_j = config.max_scale;
    let op = lazy_random_walk(graph)?;
    let stack = diffuse_stack(&op, graph.features().view(), t_j)?;
    let channels = graph.n_channels();
    let n = graph.n_nodes();
    let mut table = DivergenceTable::zeros(t_j, channels);
    let mut uninformative = vec![false; channels];
    for c in 0..channels {
        let column = |t: usize| stack.frames()[t].column(c).to_vec();
        let reference = match normalize_channel(&column(t_j), config.zero_substitution) {
            Ok(q) => q,
            Err(Error::ConstantVector) => {
                uninformative[c] = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        for t in 2..t_j {
            let q = match normalize_channel(&column(t), config.zero_substitution) {
                Ok(q) => q,
                Err(Error::ConstantVector) => ProbabilityVector::uniform(n),
                Err(e) => return Err(e),
            };
            table.values[[t - 2, c]] = kl_divergence(&q, &reference)?;
        }
    }
    Ok(GraphDivergences { table, uninformative })
}

/// Inverse class-frequency weights `N / (K · count(class))`, mean one.
pub fn class_weights(labels: &[usize]) -> Vec<f64> {
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count() as f64;
    let n = labels.len() as f64;
    labels
        .iter()
        .map(|&l| n / (present * counts[l] as f64))
        .collect()
}

/// Weighted sum of per-graph tables, accumulated in the given order.
pub fn aggregate_divergences(
    tables: &[DivergenceTable],
    labels: Option<&[usize]>,
    class_balance: bool,
) -> Result<DivergenceTable> {
    let first = tables.first().ok_or(Error::EmptyDataset)?;
    let weights = if class_balance {
        let labels = labels.ok_or(Error::MissingLabels)?;
        if labels.len() != tables.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {} tables",
                labels.len(),
                tables.len()
            )));
        }
        class_weights(labels)
    } else {
        vec![1.0; tables.len()]
    };
    let mut total = DivergenceTable::zeros(first.max_scale, first.channels());
    for (table, w) in tables.iter().zip(weights) {
        if table.values.dim() != total.values.dim() {
            return Err(Error::ShapeMismatch(format!(
                "table of shape {:?} does not match {:?}",
                table.values.dim(),
                total.values.dim()
            )));
        }
        total.values.scaled_add(w, &table.values);
    }
    Ok(total)
}

/// Cumulative information of one channel over `t = 2..=t_J−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationCurve {
    pub channel: usize,
    pub raw_cumsum: Vec<f64>,
    pub rescaled: Vec<f64>,
    /// Set when `raw_cumsum` is constant; `rescaled` is then all zeros.
    pub degenerate: bool,
}

impl InformationCurve {
    /// First scale on the curve.
    pub const FIRST_SCALE: usize = 2;

    /// Diffusion scale of entry `k`.
    pub fn scale_at(&self, k: usize) -> usize {
        Self::FIRST_SCALE + k
    }

    /// Builds a curve from already-summed divergences `totals[k]` at `t = k + 2`.
    pub fn from_totals(channel: usize, totals: &[f64]) -> Self {
        let mut acc = 0.0;
        let raw_cumsum: Vec<f64> = totals
            .iter()
            .map(|&d| {
                acc += d;
                acc
            })
            .collect();
        let lo = raw_cumsum.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw_cumsum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let degenerate = raw_cumsum.is_empty() || hi == lo;
        let rescaled = if degenerate {
            vec![0.0; raw_cumsum.len()]
        } else {
            raw_cumsum.iter().map(|&s| (s - lo) / (hi - lo)).collect()
        };
        Self {
            channel,
            raw_cumsum,
            rescaled,
            degenerate,
        }
    }

    /// Errors with [`Error::DegenerateRange`] for a flat curve.
    pub fn check(&self) -> Result<&Self> {
        if self.degenerate {
            Err(Error::DegenerateRange(self.channel))
        } else {
            Ok(self)
        }
    }
}

/// Per-channel curves from aggregated divergences.
pub fn cumulative_information(totals: &DivergenceTable) -> Vec<InformationCurve> {
    let last = totals.max_scale - 1;
    (0..totals.channels())
        .map(|c| {
            let column: Vec<f64> = (2..=last).map(|t| totals.get(t, c)).collect();
            InformationCurve::from_totals(c, &column)
        })
        .collect()
}

/// Scales `(0, 1, 2, t(ρ_1), …, t(ρ_m), t_J)` where `t(ρ)` is the first scale
/// whose rescaled information reaches `ρ`.
///
/// Repeated scales are kept.
pub fn select_scales(curve: &InformationCurve, quantiles: &[f64], max_scale: usize) -> Result<ScaleSet> {
    if curve.degenerate {
        return Err(Error::UninformativeChannel(curve.channel));
    }
    if curve.rescaled.len() + 2 != max_scale {
        return Err(Error::ShapeMismatch(format!(
            "curve has {} points but t_J = {max_scale} needs {}",
            curve.rescaled.len(),
            max_scale.saturating_sub(2)
        )));
    }
    let mut scales = vec![0, 1, 2];
    for &rho in quantiles {
        let k = curve
            .rescaled
            .iter()
            .position(|&s| s >= rho)
            .unwrap_or(curve.rescaled.len() - 1);
        scales.push(curve.scale_at(k));
    }
    scales.push(max_scale);
    ScaleSet::new(scales)
}

/// Position-wise median over the informative channels; even counts round
/// the midpoint down.
pub fn median_scales(scales: &[ScaleSet], uninformative: &[bool]) -> Result<ScaleSet> {
    if scales.len() != uninformative.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scale sets for {} mask entries",
            scales.len(),
            uninformative.len()
        )));
    }
    let kept: Vec<&ScaleSet> = scales
        .iter()
        .zip(uninformative)
        .filter(|(_, &u)| !u)
        .map(|(s, _)| s)
        .collect();
    let len = kept.first().ok_or(Error::AllChannelsUninformative)?.scales().len();
    if kept.iter().any(|s| s.scales().len() != len) {
        return Err(Error::ShapeMismatch("scale sets differ in length".into()));
    }
    let medians = (0..len)
        .map(|pos| {
            let mut column: Vec<usize> = kept.iter().map(|s| s.scales()[pos]).collect();
            column.sort_unstable();
            let m = column.len();
            if m % 2 == 1 {
                column[m / 2]
            } else {
                (column[m / 2 - 1] + column[m / 2]) / 2
            }
        })
        .collect();
    ScaleSet::new(medians)
}

/// A fitted set of per-channel scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoGainModel {
    pub schema_version: u32,
    pub config: InfoGainConfig,
    /// One set per channel. Uninformative channels carry the median of the
    /// informative ones.
    pub per_channel_scales: Vec<ScaleSet>,
    pub uninformative_mask: Vec<bool>,
    pub curves: Vec<InformationCurve>,
}

impl InfoGainModel {
    pub fn n_channels(&self) -> usize {
        self.per_channel_scales.len()
    }

    pub fn informative_channels(&self) -> Vec<usize> {
        self.uninformative_mask
            .iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .map(|(c, _)| c)
            .collect()
    }

    /// Shared scale bank from the per-channel medians.
    pub fn median_scales(&self) -> Result<ScaleSet> {
        median_scales(&self.per_channel_scales, &self.uninformative_mask)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: InfoGainModel = serde_json::from_str(s)?;
        if model.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::SchemaError {
                pointer: "/schema_version".into(),
                reason: format!(
                    "unsupported version {}, expected {MODEL_SCHEMA_VERSION}",
                    model.schema_version
                ),
            });
        }
        model.config.validate()?;
        let c = model.per_channel_scales.len();
        if model.uninformative_mask.len() != c || model.curves.len() != c {
            return Err(Error::SchemaError {
                pointer: "/uninformative_mask".into(),
                reason: "mask, curves and scales must have one entry per channel".into(),
            });
        }
        Ok(model)
    }
}

/// Indices of the graphs used for fitting, ascending.
pub fn sample_indices(n_graphs: usize, config: &InfoGainConfig) -> Vec<usize> {
    if config.sample_fraction >= 1.0 {
        return (0..n_graphs).collect();
    }
    let m = ((config.sample_fraction * n_graphs as f64).ceil() as usize).clamp(1, n_graphs);
    let mut rng = ChaCha8Rng::seed_from_u64(config.sample_seed);
    let mut picked = sample(&mut rng, n_graphs, m).into_vec();
    picked.sort_unstable();
    picked
}

/// Fits per-channel scales on `graphs`.
///
/// Per-graph tables are computed in parallel on the current rayon pool and
/// summed in graph order, so the result does not depend on the thread count.
/// A one-graph input is the single-large-graph case: its table is used as the
/// totals directly.
pub fn fit<G: Borrow<Graph> + Sync>(
    graphs: &[G],
    labels: Option<&[usize]>,
    config: &InfoGainConfig,
) -> Result<InfoGainModel> {
    config.validate()?;
    if graphs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let channels = <G as Borrow<Graph>>::borrow(&graphs[0]).n_channels();
    if let Some((i, _)) = graphs
        .iter()
        .enumerate()
        .find(|(_, g)| <G as Borrow<Graph>>::borrow(g).n_channels() != channels)
    {
        return Err(Error::ShapeMismatch(format!(
            "graph {i} has a different channel count than graph 0"
        )));
    }
    if let Some(l) = labels {
        if l.len() != graphs.len() {
            return Err(Error::ShapeMismatch(format!("{} labels for {} graphs", l.len(), graphs.len())));
        }
    }
    let picked = sample_indices(graphs.len(), config);
    let per_graph = picked
        .par_iter()
        .map(|&i| per_graph_divergences(graphs[i].borrow(), config).map_err(|e| e.in_graph(i)))
        .collect::<Result<Vec<_>>>()?;
    let picked_labels: Option<Vec<usize>> = labels.map(|l| picked.iter().map(|&i| l[i]).collect());
    let tables: Vec<DivergenceTable> = per_graph.iter().map(|g| g.table.clone()).collect();
    let totals = aggregate_divergences(&tables, picked_labels.as_deref(), config.class_balance)?;
    let curves = cumulative_information(&totals);

    let fitted = per_graph.len() as f64;
    let mut uninformative = vec![false; channels];
    for (c, flag) in uninformative.iter_mut().enumerate() {
        let marked = per_graph.iter().filter(|g| g.uninformative[c]).count() as f64;
        *flag = marked > config.uninformative_tolerance * fitted || curves[c].degenerate;
    }

    let mut selected: Vec<Option<ScaleSet>> = Vec::with_capacity(channels);
    for (c, curve) in curves.iter().enumerate() {
        selected.push(if uninformative[c] {
            None
        } else {
            Some(select_scales(curve, &config.quantiles, config.max_scale)?)
        });
    }
    let informative: Vec<ScaleSet> = selected.iter().flatten().cloned().collect();
    if informative.is_empty() {
        return Err(Error::AllChannelsUninformative);
    }
    let fill = median_scales(&informative, &vec![false; informative.len()])?;
    let per_channel_scales = selected
        .into_iter()
        .map(|s| s.unwrap_or_else(|| fill.clone()))
        .collect();

    Ok(InfoGainModel {
        schema_version: MODEL_SCHEMA_VERSION,
        config: config.clone(),
        per_channel_scales,
        uninformative_mask: uninformative,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn normalize_three_step_pipeline() {
        let p = normalize_channel(&[2.0, 4.0, 6.0], ZeroSubstitution::HalfMinNonzero).unwrap();
        let expected = [1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0];
        for (a, b) in p.as_slice().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn normalize_reanchors_endpoints() {
        let p = normalize_channel(&[0.25, 0.75], ZeroSubstitution::HalfMinNonzero).unwrap();
        assert_abs_diff_eq!(p.as_slice()[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.as_slice()[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn normalize_constant_substitute() {
        // [0, 1] -> [0, 1] -> [0.01, 1] -> renormalised
        let p = normalize_channel(&[3.0, 5.0], ZeroSubstitution::Constant(1e-2)).unwrap();
        assert_abs_diff_eq!(p.as_slice()[0], 0.01 / 1.01, epsilon = 1e-15);
        assert_abs_diff_eq!(p.as_slice().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn normalize_constant_vector() {
        assert!(matches!(
            normalize_channel(&[5.0, 5.0, 5.0], ZeroSubstitution::HalfMinNonzero),
            Err(Error::ConstantVector)
        ));
    }

    #[test]
    fn kl_worked_value() {
        let d = kl_divergence(&pv(&[0.5, 0.5]), &pv(&[0.25, 0.75])).unwrap();
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(d, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(d, 0.143841, epsilon = 1e-6);
        assert_eq!(kl_divergence(&pv(&[0.2, 0.8]), &pv(&[0.2, 0.8])).unwrap(), 0.0);
        assert!(matches!(
            kl_divergence(&pv(&[0.5, 0.5]), &pv(&[0.25, 0.25, 0.5])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quantile_intervals() {
        assert_eq!(quantiles_from_interval(0.25).unwrap(), vec![0.25, 0.5, 0.75]);
        assert_eq!(quantiles_from_interval(0.2).unwrap().len(), 4);
        assert_eq!(quantiles_from_interval(0.125).unwrap().len(), 7);
        assert!(quantiles_from_interval(1.0).is_err());
    }

    #[test]
    fn class_weight_arithmetic() {
        assert_eq!(class_weights(&[0, 1]), vec![1.0, 1.0]);
        assert_eq!(class_weights(&[0, 0, 1]), vec![0.75, 0.75, 1.5]);
    }

    #[test]
    fn aggregate_weights_and_errors() {
        let t = |v: f64| DivergenceTable::from_values(3, array![[v], [0.0]]).unwrap();
        let tables = vec![t(1.0), t(2.0), t(4.0)];
        let plain = aggregate_divergences(&tables, None, false).unwrap();
        assert_eq!(plain.get(2, 0), 7.0);
        let balanced = aggregate_divergences(&tables, Some(&[0, 0, 1]), true).unwrap();
        assert_abs_diff_eq!(balanced.get(2, 0), 0.75 + 1.5 + 6.0, epsilon = 1e-15);
        assert!(matches!(aggregate_divergences(&tables, None, true), Err(Error::MissingLabels)));
        let odd = DivergenceTable::from_values(4, Array2::zeros((3, 1))).unwrap();
        assert!(matches!(
            aggregate_divergences(&[t(1.0), odd], None, false),
            Err(Error::ShapeMismatch(_))
        ));
        assert_eq!(aggregate_divergences(&tables[..1], None, false).unwrap(), tables[0]);
    }

    #[test]
    fn curve_arithmetic() {
        let c = InformationCurve::from_totals(0, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(c.raw_cumsum, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(c.rescaled, vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert!(InformationCurve::from_totals(0, &[0.0; 4]).degenerate);
        let front = InformationCurve::from_totals(3, &[4.0, 0.0, 0.0, 0.0]);
        assert!(front.degenerate);
        assert!(matches!(front.check(), Err(Error::DegenerateRange(3))));
    }

    fn curve(rescaled: Vec<f64>) -> InformationCurve {
        InformationCurve {
            channel: 0,
            raw_cumsum: rescaled.clone(),
            rescaled,
            degenerate: false,
        }
    }

    #[test]
    fn first_crossing_scan() {
        let c = curve(vec![0.0, 0.15, 0.35, 0.55, 0.70, 0.90, 1.0]);
        let s = select_scales(&c, &[0.25, 0.5, 0.75], 9).unwrap();
        assert_eq!(s.scales(), &[0, 1, 2, 4, 5, 7, 9]);
    }

    #[test]
    fn crossing_is_inclusive() {
        let c = curve(vec![0.0, 0.25, 1.0]);
        assert_eq!(select_scales(&c, &[0.25], 5).unwrap().scales(), &[0, 1, 2, 3, 5]);
    }

    #[test]
    fn steep_curve_duplicates() {
        let c = curve(vec![0.0, 1.0, 1.0, 1.0]);
        let s = select_scales(&c, &[0.25, 0.5, 0.75], 6).unwrap();
        assert_eq!(s.scales(), &[0, 1, 2, 3, 3, 3, 6]);
        let saturated = curve(vec![1.0; 4]);
        let s = select_scales(&saturated, &[0.25, 0.5, 0.75], 6).unwrap();
        assert_eq!(s.scales(), &[0, 1, 2, 2, 2, 2, 6]);
        let mut flat = curve(vec![0.0; 4]);
        flat.degenerate = true;
        assert!(matches!(select_scales(&flat, &[0.5], 6), Err(Error::UninformativeChannel(0))));
    }

    fn set(interior: &[usize]) -> ScaleSet {
        let mut v = vec![0, 1, 2];
        v.extend_from_slice(interior);
        v.push(16);
        ScaleSet::new(v).unwrap()
    }

    #[test]
    fn medians() {
        let same = median_scales(&[set(&[4, 5, 7]), set(&[4, 5, 7])], &[false, false]).unwrap();
        assert_eq!(same, set(&[4, 5, 7]));
        let three = median_scales(&[set(&[3, 6, 9]), set(&[5, 6, 11]), set(&[4, 8, 10])], &[false; 3]).unwrap();
        assert_eq!(three, set(&[4, 6, 10]));
        let even = median_scales(&[set(&[3, 6]), set(&[4, 7])], &[false; 2]).unwrap();
        assert_eq!(even, set(&[3, 6]));
        let masked = median_scales(&[set(&[3, 6]), set(&[9, 9])], &[false, true]).unwrap();
        assert_eq!(masked, set(&[3, 6]));
        assert!(matches!(
            median_scales(&[set(&[3, 6])], &[true]),
            Err(Error::AllChannelsUninformative)
        ));
    }

    fn path(n: usize, features: Array2<f64>) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        build_graph(&edges, n, features).unwrap()
    }

    #[test]
    fn constant_channel_is_marked() {
        // Constants are fixed by the walk only on regular graphs.
        let edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)];
        let g = build_graph(&edges, 4, array![[1.0, 1.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]).unwrap();
        let cfg = InfoGainConfig {
            max_scale: 4,
            ..Default::default()
        };
        let d = per_graph_divergences(&g, &cfg).unwrap();
        assert_eq!(d.uninformative, vec![true, false]);
        assert!(d.table.values().column(0).iter().all(|&v| v == 0.0));
        for c in 0..2 {
            assert_eq!(d.table.get(4, c), 0.0);
        }
    }

    #[test]
    fn fit_rejects_constant_single_channel() {
        let g = path(3, array![[2.0], [2.0], [2.0]]);
        assert!(matches!(
            fit(&[g], None, &InfoGainConfig::default()),
            Err(Error::AllChannelsUninformative)
        ));
        let empty: Vec<Graph> = Vec::new();
        assert!(matches!(fit(&empty, None, &InfoGainConfig::default()), Err(Error::EmptyDataset)));
    }

    #[test]
    fn duplicated_graph_fits_like_single() {
        let mut x = Array2::zeros((9, 2));
        x[[0, 0]] = 1.0;
        x[[4, 1]] = 1.0;
        x[[8, 1]] = 0.5;
        let g = path(9, x);
        let cfg = InfoGainConfig::default();
        let one = fit(&[g.clone()], None, &cfg).unwrap();
        let two = fit(&[g.clone(), g], None, &cfg).unwrap();
        assert_eq!(one.per_channel_scales, two.per_channel_scales);
        for (a, b) in one.curves.iter().zip(&two.curves) {
            for (x, y) in a.rescaled.iter().zip(&b.rescaled) {
                assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_seeded_and_sorted() {
        let cfg = InfoGainConfig {
            sample_fraction: 0.3,
            sample_seed: 7,
            ..Default::default()
        };
        let a = sample_indices(20, &cfg);
        assert_eq!(a.len(), 6);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a, sample_indices(20, &cfg));
        assert_eq!(sample_indices(5, &InfoGainConfig::default()), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn config_validation() {
        let bad = |f: fn(&mut InfoGainConfig)| {
            let mut c = InfoGainConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.max_scale = 2));
        assert!(bad(|c| c.quantiles = vec![0.5, 0.25]));
        assert!(bad(|c| c.quantiles = vec![0.0, 0.5]));
        assert!(bad(|c| c.zero_substitution = ZeroSubstitution::Constant(0.0)));
        assert!(bad(|c| c.sample_fraction = 0.0));
        assert!(InfoGainConfig::default().validate().is_ok());
        assert_eq!("1e-2".parse::<ZeroSubstitution>().unwrap(), ZeroSubstitution::Constant(0.01));
        assert_eq!("half-min".parse::<ZeroSubstitution>().unwrap(), ZeroSubstitution::HalfMinNonzero);
    }
}
