//! Sparse graphs, the lazy random-walk operator and recursive diffusion.
//!
//! The operator is `P = ½(I + A D⁻¹)`. It acts on column signals, so it is
//! column-stochastic: `1ᵀ P = 1ᵀ`, and diffusion conserves the sum of every
//! signal column. Note that `A D⁻¹` (column normalisation) is used, not the
//! row-normalised `D⁻¹ A`.
//!
//! Powers of `P` are never formed. `P^t X` is produced by `t` successive sparse
//! products, each costing `O(nnz · C)`.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a CSR matrix from `(row, col, value)` triplets.
    ///
    /// Duplicate coordinates are summed and resulting zeros are dropped, so the
    /// stored pattern never holds explicit zeros.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n_rows];
        for (r, c, v) in triplets {
            if r >= n_rows {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    n_nodes: n_rows,
                });
            }
            if c >= n_cols {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    n_nodes: n_cols,
                });
            }
            *rows[r].entry(c).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(col, value)` over the stored entries of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Stored value at `(r, c)`, or zero.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// Row sums.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    /// Column sums.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols];
        for (&c, &v) in self.col_idx.iter().zip(&self.values) {
            sums[c] += v;
        }
        sums
    }

    /// `y = M x` for a dense matrix `x` with `n_cols` rows.
    pub fn mul_dense(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: x.nrows(),
            });
        }
        let mut y = Array2::zeros((self.n_rows, x.ncols()));
        for (r, mut out) in y.axis_iter_mut(Axis(0)).enumerate() {
            for (c, v) in self.row(r) {
                out.scaled_add(v, &x.row(c));
            }
        }
        Ok(y)
    }

    /// `y = M x` for a dense vector.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: x.len(),
            });
        }
        Ok((0..self.n_rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect())
    }

    /// Dense copy. Only meant for small matrices and tests.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n_rows, self.n_cols));
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                d[[r, c]] = v;
            }
        }
        d
    }
}

/// How ingestion treats nodes without incident edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsolatedNodes {
    /// Reject the graph with [`Error::IsolatedNode`].
    #[default]
    Reject,
    /// Keep the node; the walk leaves it in place (`P e_i = e_i`).
    FixedPoint,
}

/// Undirected weighted graph with a dense node-feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: SparseMatrix,
    features: Array2<f64>,
    label: Option<usize>,
    isolated: IsolatedNodes,
}

/// Builds a graph from an undirected edge list, rejecting isolated nodes.
///
/// Each edge may be listed once or in both directions; repeated listings must
/// carry the same weight.
pub fn build_graph(
    edges: &[(usize, usize, f64)],
    n_nodes: usize,
    features: Array2<f64>,
) -> Result<Graph> {
    Graph::new(edges, n_nodes, features, IsolatedNodes::Reject)
}

impl Graph {
    pub fn new(
        edges: &[(usize, usize, f64)],
        n_nodes: usize,
        features: Array2<f64>,
        isolated: IsolatedNodes,
    ) -> Result<Self> {
        if features.nrows() != n_nodes {
            return Err(Error::DimensionMismatch {
                expected: n_nodes,
                actual: features.nrows(),
            });
        }
        let mut seen: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, w) in edges {
            for index in [i, j] {
                if index >= n_nodes {
                    return Err(Error::IndexOutOfRange { index, n_nodes });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight { i, j, weight: w });
            }
            let key = (i.min(j), i.max(j));
            if let Some(&first) = seen.get(&key) {
                if first != w {
                    return Err(Error::ConflictingWeight {
                        i: key.0,
                        j: key.1,
                        first,
                        second: w,
                    });
                }
            } else {
                seen.insert(key, w);
            }
        }
        let triplets = seen
            .iter()
            .flat_map(|(&(i, j), &w)| [(i, j, w), (j, i, w)]);
        let adjacency = SparseMatrix::from_triplets(n_nodes, n_nodes, triplets)?;
        if isolated == IsolatedNodes::Reject {
            if let Some(node) = (0..n_nodes).find(|&r| adjacency.row_ptr[r] == adjacency.row_ptr[r + 1]) {
                return Err(Error::IsolatedNode(node));
            }
        }
        Ok(Self {
            adjacency,
            features,
            label: None,
            isolated,
        })
    }

    pub fn with_label(mut self, label: Option<usize>) -> Self {
        self.label = label;
        self
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.n_rows()
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.adjacency.nnz() / 2
    }

    pub fn n_channels(&self) -> usize {
        self.features.ncols()
    }

    pub fn adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn isolated_policy(&self) -> IsolatedNodes {
        self.isolated
    }

    /// Weighted degrees (adjacency row sums).
    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency.row_sums()
    }

    /// Undirected edge list `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let a = &self.adjacency;
        (0..a.n_rows())
            .flat_map(|i| a.row(i).filter(move |&(j, _)| j > i).map(move |(j, w)| (i, j, w)))
            .collect()
    }

    /// Same graph with node `i` moved to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.n_nodes();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: perm.len(),
            });
        }
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(i, j, w)| (perm[i], perm[j], w))
            .collect();
        let mut features = Array2::zeros(self.features.raw_dim());
        for (i, row) in self.features.axis_iter(Axis(0)).enumerate() {
            features.row_mut(perm[i]).assign(&row);
        }
        Ok(Graph::new(&edges, n, features, self.isolated)?.with_label(self.label))
    }

    /// Same topology with a different feature matrix.
    pub fn with_features(&self, features: Array2<f64>) -> Result<Graph> {
        if features.nrows() != self.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_nodes(),
                actual: features.nrows(),
            });
        }
        Ok(Graph {
            features,
            ..self.clone()
        })
    }
}

/// The lazy random-walk matrix `P = ½(I + A D⁻¹)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionOperator {
    matrix: SparseMatrix,
}

/// Builds `P = ½(I + A D⁻¹)` for `graph`.
pub fn lazy_random_walk(graph: &Graph) -> Result<DiffusionOperator> {
    let a = graph.adjacency();
    let n = a.n_rows();
    let degrees = graph.degrees();
    let mut triplets = Vec::with_capacity(a.nnz() + n);
    for (j, &d) in degrees.iter().enumerate() {
        if d <= 0.0 {
            match graph.isolated_policy() {
                IsolatedNodes::FixedPoint => {
                    triplets.push((j, j, 1.0));
                    continue;
                }
                IsolatedNodes::Reject => return Err(Error::DegenerateDegree(j)),
            }
        }
        triplets.push((j, j, 0.5));
    }
    for i in 0..n {
        for (j, w) in a.row(i) {
            triplets.push((i, j, 0.5 * w / degrees[j]));
        }
    }
    Ok(DiffusionOperator {
        matrix: SparseMatrix::from_triplets(n, n, triplets)?,
    })
}

impl DiffusionOperator {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n_rows()
    }

    /// `P X` for an `n × C` signal matrix.
    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.matrix.mul_dense(x)
    }

    /// `P x` for a single signal.
    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.matrix.mul_vec(x)
    }
}

/// The frames `P^t X` for `t = 0..=max_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionStack {
    frames: Vec<Array2<f64>>,
}

/// Diffuses `x` up to `P^{max_scale} X` by repeated sparse products.
pub fn diffuse_stack(op: &DiffusionOperator, x: ArrayView2<'_, f64>, max_scale: usize) -> Result<DiffusionStack> {
    if max_scale < 2 {
        return Err(Error::InvalidScale(format!(
            "maximum diffusion scale must be at least 2, got {max_scale}"
        )));
    }
    DiffusionStack::build(op, x, max_scale)
}

impl DiffusionStack {
    /// Same as [`diffuse_stack`] without the `max_scale ≥ 2` guard.
    pub(crate) fn build(op: &DiffusionOperator, x: ArrayView2<'_, f64>, max_scale: usize) -> Result<Self> {
        if x.nrows() != op.n() {
            return Err(Error::DimensionMismatch {
                expected: op.n(),
                actual: x.nrows(),
            });
        }
        let mut frames = Vec::with_capacity(max_scale + 1);
        frames.push(x.to_owned());
        for t in 0..max_scale {
            let next = op.apply(frames[t].view())?;
            frames.push(next);
        }
        Ok(Self { frames })
    }

    pub fn max_scale(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn channels(&self) -> usize {
        self.frames[0].ncols()
    }

    pub fn n(&self) -> usize {
        self.frames[0].nrows()
    }

    /// `P^t X`.
    pub fn frame(&self, t: usize) -> Result<&Array2<f64>> {
        self.frames.get(t).ok_or(Error::ScaleExceedsStack {
            scale: t,
            max_scale: self.max_scale(),
        })
    }

    pub fn frames(&self) -> &[Array2<f64>] {
        &self.frames
    }
}
