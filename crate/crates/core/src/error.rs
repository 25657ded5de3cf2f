use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for graph with {n_nodes} nodes")]
    IndexOutOfRange { index: usize, n_nodes: usize },
    #[error("edge ({i}, {j}) has non-positive weight {weight}")]
    NonPositiveWeight { i: usize, j: usize, weight: f64 },
    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),
    #[error("edge ({i}, {j}) given twice with different weights {first} and {second}")]
    ConflictingWeight {
        i: usize,
        j: usize,
        first: f64,
        second: f64,
    },
    #[error("node {0} has no incident edge")]
    IsolatedNode(usize),
    #[error("node {0} has zero degree")]
    DegenerateDegree(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("scale {scale} exceeds diffusion stack depth {max_scale}")]
    ScaleExceedsStack { scale: usize, max_scale: usize },
    #[error("unknown activation {0:?}")]
    UnknownActivation(String),
    #[error("constant vector: min-max scaling is undefined")]
    ConstantVector,
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("class balancing requested but no labels were given")]
    MissingLabels,
    #[error("cumulative information of channel {0} is constant")]
    DegenerateRange(usize),
    #[error("channel {0} is uninformative")]
    UninformativeChannel(usize),
    #[error("every channel is uninformative")]
    AllChannelsUninformative,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("selector matrix dimensions invalid: {0}")]
    DimensionError(String),
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{line}: {reason}")]
    MalformedLine {
        file: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("edge on line {line} joins node {a} of graph {graph_a} to node {b} of graph {graph_b}")]
    DanglingEdge {
        line: usize,
        a: usize,
        b: usize,
        graph_a: usize,
        graph_b: usize,
    },
    #[error("graph {0} has no nodes")]
    EmptyGraph(usize),
    #[error("schema error at {pointer}: {reason}")]
    SchemaError { pointer: String, reason: String },
    #[error("graph {index}: {source}")]
    InGraph {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by a failure inside the library.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io(_) | Error::NonFinite(_) => false,
            Error::InGraph { source, .. } => source.is_validation(),
            _ => true,
        }
    }

    pub(crate) fn in_graph(self, index: usize) -> Error {
        Error::InGraph {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
