//! Feature extraction under a chosen wavelet bank, and stratified
//! cross-validation of the linear probe.
//!
//! Each fold fits InfoGain scales on its training graphs only, extracts
//! scattering moments for every graph, standardises with training statistics,
//! trains the probe and scores the held-out graphs. Folds run in parallel and
//! are gathered by fold index, so results do not depend on the worker count.

use std::path::PathBuf;
use std::time::Instant;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{accuracy, train_logistic, LogisticHyper, Standardizer};
use crate::error::{Error, Result};
use crate::graph::{lazy_random_walk, Graph};
use crate::infogain::{self, InfoGainConfig, InfoGainModel};
use crate::io::{load_dataset, GraphDataset, LoadOptions};
use crate::legs::{one_hot_theta, selector_matrix, SelectorMatrix};
use crate::wavelets::{
    dyadic_scales, moment_pool, scattering_per_channel, FeatureKey, ScaleSet, ScatteringConfig, WaveletBank,
};

/// Where wavelet scales come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSource {
    Dyadic { j: usize },
    Infogain(InfoGainConfig),
    LegsOnehot {
        scales: ScaleSet,
        #[serde(default = "default_true")]
        softmax: bool,
    },
}

fn default_true() -> bool {
    true
}

/// Full description of one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Benchmark directory or JSON file. Relative paths resolve against the
    /// config file's directory when loaded through [`ExperimentConfig::from_file`].
    pub dataset: PathBuf,
    #[serde(default)]
    pub load: LoadOptions,
    pub scale_source: ScaleSource,
    #[serde(default)]
    pub scattering: ScatteringConfig,
    #[serde(default)]
    pub classifier: LogisticHyper,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; `None` uses rayon's default.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Drop channels InfoGain marks uninformative.
    #[serde(default = "default_true")]
    pub drop_uninformative: bool,
}

fn default_folds() -> usize {
    10
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        if cfg.dataset.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.dataset = parent.join(&cfg.dataset);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be positive".into()));
        }
        self.scattering.validate()?;
        if let ScaleSource::Infogain(c) = &self.scale_source {
            c.validate()?;
        }
        Ok(())
    }
}

/// A wavelet bank ready to apply to every graph.
#[derive(Debug, Clone)]
pub enum Extractor {
    /// One scale set for all channels.
    Shared(ScaleSet),
    /// One scale set per kept channel.
    PerChannel {
        channels: Vec<usize>,
        scales: Vec<ScaleSet>,
    },
    Legs(SelectorMatrix),
}

impl Extractor {
    pub fn dyadic(j: usize) -> Result<Self> {
        Ok(Extractor::Shared(dyadic_scales(j)?))
    }

    /// Per-channel scales of a fitted model, optionally without its
    /// uninformative channels.
    pub fn from_model(model: &InfoGainModel, drop_uninformative: bool) -> Self {
        let channels: Vec<usize> = if drop_uninformative {
            model.informative_channels()
        } else {
            (0..model.n_channels()).collect()
        };
        let scales = channels.iter().map(|&c| model.per_channel_scales[c].clone()).collect();
        Extractor::PerChannel { channels, scales }
    }

    pub fn legs_onehot(scales: &ScaleSet, softmax: bool) -> Result<Self> {
        let theta = one_hot_theta(scales, scales.max_scale())?;
        Ok(Extractor::Legs(selector_matrix(theta, softmax)?))
    }

    /// Pooled features of one graph with their layout (original channel ids).
    pub fn graph_features(&self, graph: &Graph, config: &ScatteringConfig) -> Result<(Vec<f64>, Vec<FeatureKey>)> {
        let op = lazy_random_walk(graph)?;
        let x = graph.features();
        let (maps, channels) = match self {
            Extractor::Shared(s) => {
                let banks = vec![s; x.ncols()];
                (scattering_per_channel(&op, x.view(), &banks, config)?, (0..x.ncols()).collect::<Vec<_>>())
            }
            Extractor::PerChannel { channels, scales } => {
                if let Some(&c) = channels.iter().find(|&&c| c >= x.ncols()) {
                    return Err(Error::IndexOutOfRange {
                        index: c,
                        n_nodes: x.ncols(),
                    });
                }
                let sub = x.select(Axis(1), channels);
                let banks: Vec<&ScaleSet> = scales.iter().collect();
                (scattering_per_channel(&op, sub.view(), &banks, config)?, channels.clone())
            }
            Extractor::Legs(sel) => {
                let banks: Vec<&SelectorMatrix> = vec![sel; x.ncols()];
                (scattering_per_channel(&op, x.view(), &banks, config)?, (0..x.ncols()).collect())
            }
        };
        let vector = moment_pool(maps.maps.view(), config.moments);
        let layout = maps
            .keys
            .iter()
            .flat_map(|k| {
                let mut key = *k;
                key.channel = channels[k.channel];
                (1..=config.moments).map(move |moment| FeatureKey { map: key, moment })
            })
            .collect();
        Ok((vector, layout))
    }

    pub fn n_bands(&self) -> usize {
        match self {
            Extractor::Shared(s) => s.n_bands(),
            Extractor::PerChannel { scales, .. } => scales.iter().map(|s| s.n_bands()).max().unwrap_or(0),
            Extractor::Legs(sel) => WaveletBank::n_bands(sel),
        }
    }
}

/// Feature matrix (one row per graph) and its column layout.
pub fn extract_features<G: std::borrow::Borrow<Graph> + Sync>(
    graphs: &[G],
    extractor: &Extractor,
    config: &ScatteringConfig,
) -> Result<(Array2<f64>, Vec<FeatureKey>)> {
    config.validate()?;
    let rows = graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| extractor.graph_features(g.borrow(), config).map_err(|e| e.in_graph(i)))
        .collect::<Result<Vec<_>>>()?;
    let Some((_, layout)) = rows.first() else {
        return Err(Error::EmptyDataset);
    };
    let layout = layout.clone();
    let mut out = Array2::zeros((rows.len(), layout.len()));
    for (i, (v, _)) in rows.into_iter().enumerate() {
        out.row_mut(i).assign(&ndarray::ArrayView1::from(&v));
    }
    Ok((out, layout))
}

/// Fold id of every sample. Each class is shuffled and dealt round-robin, so
/// fold sizes differ by at most one and class ratios are preserved.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    if folds > labels.len() {
        return Err(Error::InvalidConfig(format!(
            "{folds} folds for {} samples",
            labels.len()
        )));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Outcome of one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Per-channel scales fitted on this fold's training graphs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<ScaleSet>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uninformative_mask: Option<Vec<bool>>,
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub fit: f64,
    pub transform: f64,
    pub train: f64,
}

/// Everything one fold produced, including the fitted model.
#[derive(Debug, Clone)]
pub struct FoldOutput {
    pub result: FoldResult,
    pub model: Option<InfoGainModel>,
    pub timings: PhaseTimings,
}

/// Aggregate metrics; deterministic for a fixed dataset, config and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub dataset: String,
    pub n_graphs: usize,
    pub feature_len: usize,
    pub majority_baseline: f64,
    pub per_fold: Vec<FoldResult>,
    pub mean: f64,
    /// Sample standard deviation over folds (n − 1 denominator).
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub per_fold: Vec<PhaseTimings>,
    pub total: PhaseTimings,
}

/// Mean and (n − 1) standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn labels_of(ds: &GraphDataset) -> Result<&[usize]> {
    ds.labels
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig(format!("dataset {} has no graph labels", ds.name)))
}

/// Runs one train/test split.
pub fn run_fold(
    ds: &GraphDataset,
    fold: usize,
    train: &[usize],
    test: &[usize],
    config: &ExperimentConfig,
) -> Result<FoldOutput> {
    let labels = labels_of(ds)?;
    let train_graphs: Vec<&Graph> = train.iter().map(|&i| &ds.graphs[i]).collect();
    let test_graphs: Vec<&Graph> = test.iter().map(|&i| &ds.graphs[i]).collect();
    let train_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let test_labels: Vec<usize> = test.iter().map(|&i| labels[i]).collect();

    let start = Instant::now();
    let (extractor, model) = match &config.scale_source {
        ScaleSource::Dyadic { j } => (Extractor::dyadic(*j)?, None),
        ScaleSource::Infogain(ig) => {
            let model = infogain::fit(&train_graphs, Some(&train_labels), ig)?;
            (Extractor::from_model(&model, config.drop_uninformative), Some(model))
        }
        ScaleSource::LegsOnehot { scales, softmax } => (Extractor::legs_onehot(scales, *softmax)?, None),
    };
    let fit = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let (x_train, _) = extract_features(&train_graphs, &extractor, &config.scattering)?;
    let (x_test, _) = extract_features(&test_graphs, &extractor, &config.scattering)?;
    let transform = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let standardizer = Standardizer::fit(x_train.view());
    let x_train = standardizer.transform(x_train.view());
    let x_test = standardizer.transform(x_test.view());
    let probe = train_logistic(x_train.view(), &train_labels, ds.n_classes(), &config.classifier)?;
    let acc = accuracy(&probe.predict(x_test.view()), &test_labels);
    let train_secs = start.elapsed().as_secs_f64();

    Ok(FoldOutput {
        result: FoldResult {
            fold,
            accuracy: acc,
            n_train: train.len(),
            n_test: test.len(),
            scales: model.as_ref().map(|m| m.per_channel_scales.clone()),
            uninformative_mask: model.as_ref().map(|m| m.uninformative_mask.clone()),
        },
        model,
        timings: PhaseTimings {
            fit,
            transform,
            train: train_secs,
        },
    })
}

/// Runs `f` on a pool with `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Output of a cross-validation run.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub metrics: Metrics,
    pub timings: Timings,
    /// Fitted InfoGain model per fold, when scales come from InfoGain.
    pub models: Vec<Option<InfoGainModel>>,
}

/// Stratified k-fold cross-validation on an already-loaded dataset.
pub fn cross_validate_dataset(ds: &GraphDataset, config: &ExperimentConfig) -> Result<CvReport> {
    config.validate()?;
    let labels = labels_of(ds)?;
    if ds.n_classes() < 2 {
        return Err(Error::InvalidConfig("need at least two classes".into()));
    }
    let assignment = stratified_folds(labels, config.folds, config.seed)?;
    let outputs = with_workers(config.workers, || {
        (0..config.folds)
            .into_par_iter()
            .map(|k| {
                let train: Vec<usize> = (0..ds.len()).filter(|&i| assignment[i] != k).collect();
                let test: Vec<usize> = (0..ds.len()).filter(|&i| assignment[i] == k).collect();
                run_fold(ds, k, &train, &test, config)
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let accs: Vec<f64> = outputs.iter().map(|o| o.result.accuracy).collect();
    let (mean, std) = mean_std(&accs);
    let counts = ds.class_counts();
    let majority = *counts.iter().max().unwrap_or(&0) as f64 / ds.len() as f64;
    let feature_len = {
        let extractor = match &config.scale_source {
            ScaleSource::Dyadic { j } => Extractor::dyadic(*j)?,
            ScaleSource::LegsOnehot { scales, softmax } => Extractor::legs_onehot(scales, *softmax)?,
            ScaleSource::Infogain(_) => outputs[0]
                .model
                .as_ref()
                .map(|m| Extractor::from_model(m, config.drop_uninformative))
                .expect("infogain folds carry a model"),
        };
        extractor.graph_features(&ds.graphs[0], &config.scattering)?.0.len()
    };
    let per_fold_timings: Vec<PhaseTimings> = outputs.iter().map(|o| o.timings.clone()).collect();
    let total = per_fold_timings.iter().fold(PhaseTimings::default(), |acc, t| PhaseTimings {
        fit: acc.fit + t.fit,
        transform: acc.transform + t.transform,
        train: acc.train + t.train,
    });
    let models = outputs.iter().map(|o| o.model.clone()).collect();
    Ok(CvReport {
        metrics: Metrics {
            dataset: ds.name.clone(),
            n_graphs: ds.len(),
            feature_len,
            majority_baseline: majority,
            per_fold: outputs.into_iter().map(|o| o.result).collect(),
            mean,
            std,
        },
        timings: Timings {
            per_fold: per_fold_timings,
            total,
        },
        models,
    })
}

/// Loads the configured dataset and cross-validates.
pub fn cross_validate(config: &ExperimentConfig) -> Result<CvReport> {
    config.validate()?;
    let ds = load_dataset(&config.dataset, config.load)?;
    cross_validate_dataset(&ds, config)
}
