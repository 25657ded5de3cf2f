//! Graph scattering with data-driven diffusion wavelet scales.
//!
//! The crate builds lazy random-walk diffusion on sparse graphs, evaluates
//! diffusion wavelets on arbitrary scale sets, selects per-channel scales from
//! KL-divergence information curves (InfoGain), and provides the selector
//! matrix (LEGS) wavelets for comparison. A small harness runs stratified
//! cross-validation of a logistic probe on pooled scattering moments.

pub mod classifier;
pub mod error;
pub mod graph;
pub mod harness;
pub mod infogain;
pub mod io;
pub mod legs;
pub mod wavelets;

pub use error::{Error, Result};
pub use graph::{build_graph, diffuse_stack, lazy_random_walk, DiffusionOperator, DiffusionStack, Graph, SparseMatrix};
pub use infogain::{fit, InfoGainConfig, InfoGainModel, InformationCurve};
pub use io::{load_dataset, GraphDataset};
pub use legs::{legs_wavelets, selector_matrix, SelectorMatrix};
pub use wavelets::{dyadic_scales, scattering, wavelet_transform, Activation, ScaleSet, ScatteringConfig, WaveletBank};
