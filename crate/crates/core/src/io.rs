//! Dataset ingestion and CSV/JSON exports.
//!
//! Two input formats are supported:
//!
//! * the benchmark text layout: a directory holding `DS_A.txt` (1-based
//!   `i, j` node pairs, one per line), `DS_graph_indicator.txt`,
//!   `DS_graph_labels.txt` and optionally `DS_node_labels.txt` and
//!   `DS_node_attributes.txt`;
//! * a JSON array of `{"nodes", "edges": [[i, j, w]], "features": [[..]], "label"}`.
//!
//! See `docs/formats.md` for the byte-level description of every file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{Graph, IsolatedNodes};
use crate::infogain::InfoGainModel;
use crate::wavelets::FeatureKey;

/// A labelled collection of graphs sharing one channel count.
#[derive(Debug, Clone)]
pub struct GraphDataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    /// Class index per graph, `0..K`, when every graph is labelled.
    pub labels: Option<Vec<usize>>,
    /// Original label value of each class index.
    pub label_values: Vec<i64>,
    pub n_channels: usize,
}

impl GraphDataset {
    /// Validates shapes and remaps raw labels to `0..K` in ascending order.
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, raw_labels: Option<Vec<i64>>) -> Result<Self> {
        let first = graphs.first().ok_or(Error::EmptyDataset)?;
        let n_channels = first.n_channels();
        if let Some((i, g)) = graphs.iter().enumerate().find(|(_, g)| g.n_channels() != n_channels) {
            return Err(Error::ShapeMismatch(format!(
                "graph {i} has {} channels, graph 0 has {n_channels}",
                g.n_channels()
            )));
        }
        let (labels, label_values) = match raw_labels {
            Some(raw) => {
                if raw.len() != graphs.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "{} labels for {} graphs",
                        raw.len(),
                        graphs.len()
                    )));
                }
                let values: Vec<i64> = raw.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
                let labels: Vec<usize> = raw.iter().map(|v| values.binary_search(v).unwrap()).collect();
                (Some(labels), values)
            }
            None => (None, Vec::new()),
        };
        let graphs = match &labels {
            Some(l) => graphs
                .into_iter()
                .zip(l)
                .map(|(g, &y)| g.with_label(Some(y)))
                .collect(),
            None => graphs,
        };
        Ok(Self {
            name: name.into(),
            graphs,
            labels,
            label_values,
            n_channels,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.label_values.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in self.labels.iter().flatten() {
            counts[l] += 1;
        }
        counts
    }

    /// Subset by graph index, preserving order.
    pub fn subset(&self, indices: &[usize]) -> GraphDataset {
        GraphDataset {
            name: self.name.clone(),
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            label_values: self.label_values.clone(),
            n_channels: self.n_channels,
        }
    }

    pub fn stats(&self) -> DatasetStats {
        let n = self.len() as f64;
        DatasetStats {
            name: self.name.clone(),
            graphs: self.len(),
            node_features: self.n_channels,
            mean_nodes: self.graphs.iter().map(|g| g.n_nodes() as f64).sum::<f64>() / n,
            mean_edges: self.graphs.iter().map(|g| g.n_edges() as f64).sum::<f64>() / n,
            classes: self.n_classes(),
            class_counts: self.class_counts(),
        }
    }
}

/// Summary counts of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub name: String,
    pub graphs: usize,
    pub node_features: usize,
    pub mean_nodes: f64,
    pub mean_edges: f64,
    pub classes: usize,
    pub class_counts: Vec<usize>,
}

/// When to read `DS_node_attributes.txt`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeAttributes {
    /// Only when the dataset has no node labels.
    #[default]
    Auto,
    /// Append attributes after the one-hot labels.
    Concat,
    Ignore,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadOptions {
    pub node_attributes: NodeAttributes,
    pub isolated: IsolatedNodes,
}

fn find_prefix(dir: &Path) -> Result<(String, PathBuf)> {
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if dir.join(format!("{name}_A.txt")).is_file() {
        return Ok((name.clone(), dir.join(&name)));
    }
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    let mut found = None;
    for entry in fs::read_dir(dir)? {
        let file = entry?.file_name().to_string_lossy().into_owned();
        if let Some(prefix) = file.strip_suffix("_A.txt") {
            found = Some(prefix.to_string());
            break;
        }
    }
    match found {
        Some(prefix) => Ok((prefix.clone(), dir.join(prefix))),
        None => Err(Error::MissingFile(dir.join(format!("{name}_A.txt")))),
    }
}

fn part(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(format!("_{suffix}.txt"));
    PathBuf::from(s)
}

/// Non-empty lines of a file with their 1-based line numbers.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.is_empty() {
            out.push((k + 1, trimmed.to_string()));
        }
    }
    Ok(out)
}

fn parse_cell<T: std::str::FromStr>(path: &Path, line: usize, cell: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    cell.trim().parse::<T>().map_err(|e| Error::MalformedLine {
        file: path.to_path_buf(),
        line,
        reason: format!("{cell:?}: {e}"),
    })
}

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedLine {
        file: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Loads a benchmark text-format directory with default options.
pub fn load_benchmark_dir(path: impl AsRef<Path>) -> Result<GraphDataset> {
    load_benchmark_dir_with(path, LoadOptions::default())
}

/// Loads a benchmark text-format directory.
///
/// Node labels become one-hot channels over the sorted distinct label values.
/// Self-loops in the edge file are skipped.
pub fn load_benchmark_dir_with(path: impl AsRef<Path>, options: LoadOptions) -> Result<GraphDataset> {
    let dir = path.as_ref();
    let (name, base) = find_prefix(dir)?;

    let indicator_path = part(&base, "graph_indicator");
    let node_graph: Vec<usize> = read_lines(&indicator_path)?
        .into_iter()
        .map(|(line, s)| {
            let g: usize = parse_cell(&indicator_path, line, &s)?;
            if g == 0 {
                return Err(malformed(&indicator_path, line, "graph ids are 1-based"));
            }
            Ok(g - 1)
        })
        .collect::<Result<_>>()?;
    let n_total = node_graph.len();

    let labels_path = part(&base, "graph_labels");
    let raw_labels: Vec<i64> = read_lines(&labels_path)?
        .into_iter()
        .map(|(line, s)| parse_cell(&labels_path, line, &s))
        .collect::<Result<_>>()?;
    let n_graphs = raw_labels.len();

    // Local index of every global node within its graph.
    let mut sizes = vec![0usize; n_graphs];
    let mut local = Vec::with_capacity(n_total);
    for (k, &g) in node_graph.iter().enumerate() {
        if g >= n_graphs {
            return Err(malformed(
                &indicator_path,
                k + 1,
                format!("graph id {} but only {n_graphs} graph labels", g + 1),
            ));
        }
        local.push(sizes[g]);
        sizes[g] += 1;
    }
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyGraph(g));
    }

    let a_path = part(&base, "A");
    let mut edges: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n_graphs];
    for (line, s) in read_lines(&a_path)? {
        let mut cells = s.split(',');
        let (Some(a), Some(b), None) = (cells.next(), cells.next(), cells.next()) else {
            return Err(malformed(&a_path, line, "expected `i, j`"));
        };
        let a: usize = parse_cell(&a_path, line, a)?;
        let b: usize = parse_cell(&a_path, line, b)?;
        if a == 0 || b == 0 || a > n_total || b > n_total {
            return Err(malformed(
                &a_path,
                line,
                format!("node ids must be in 1..={n_total}"),
            ));
        }
        let (a, b) = (a - 1, b - 1);
        if node_graph[a] != node_graph[b] {
            return Err(Error::DanglingEdge {
                line,
                a: a + 1,
                b: b + 1,
                graph_a: node_graph[a] + 1,
                graph_b: node_graph[b] + 1,
            });
        }
        if a != b {
            edges[node_graph[a]].push((local[a], local[b], 1.0));
        }
    }

    let mut channels: Vec<Vec<f64>> = Vec::new();
    let node_labels_path = part(&base, "node_labels");
    let has_labels = node_labels_path.is_file();
    if has_labels {
        let rows = read_lines(&node_labels_path)?;
        if rows.len() != n_total {
            return Err(malformed(
                &node_labels_path,
                rows.len(),
                format!("{} node labels for {n_total} nodes", rows.len()),
            ));
        }
        let values: Vec<i64> = rows
            .iter()
            .map(|(line, s)| parse_cell(&node_labels_path, *line, s.split(',').next().unwrap_or("")))
            .collect::<Result<_>>()?;
        let distinct: Vec<i64> = values.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        channels = values
            .iter()
            .map(|v| {
                let k = distinct.binary_search(v).unwrap();
                let mut row = vec![0.0; distinct.len()];
                row[k] = 1.0;
                row
            })
            .collect();
    }
    let attrs_path = part(&base, "node_attributes");
    let use_attrs = attrs_path.is_file()
        && match options.node_attributes {
            NodeAttributes::Auto => !has_labels,
            NodeAttributes::Concat => true,
            NodeAttributes::Ignore => false,
        };
    if use_attrs {
        let rows = read_lines(&attrs_path)?;
        if rows.len() != n_total {
            return Err(malformed(
                &attrs_path,
                rows.len(),
                format!("{} attribute rows for {n_total} nodes", rows.len()),
            ));
        }
        let mut width = None;
        for (k, (line, s)) in rows.iter().enumerate() {
            let vals: Vec<f64> = s
                .split(',')
                .map(|c| parse_cell(&attrs_path, *line, c))
                .collect::<Result<_>>()?;
            if *width.get_or_insert(vals.len()) != vals.len() {
                return Err(malformed(&attrs_path, *line, "inconsistent attribute count"));
            }
            if channels.len() < n_total {
                channels.push(vals);
            } else {
                channels[k].extend(vals);
            }
        }
    }
    if channels.is_empty() {
        // No node features at all: one constant channel.
        channels = vec![vec![1.0]; n_total];
    }
    let width = channels[0].len();

    let mut features: Vec<Array2<f64>> = sizes.iter().map(|&s| Array2::zeros((s, width))).collect();
    for (k, row) in channels.into_iter().enumerate() {
        let g = node_graph[k];
        for (c, v) in row.into_iter().enumerate() {
            features[g][[local[k], c]] = v;
        }
    }
    let graphs = edges
        .into_iter()
        .zip(features)
        .zip(&sizes)
        .enumerate()
        .map(|(g, ((e, x), &n))| Graph::new(&e, n, x, options.isolated).map_err(|err| err.in_graph(g)))
        .collect::<Result<Vec<_>>>()?;
    GraphDataset::new(name, graphs, Some(raw_labels))
}

fn schema(pointer: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::SchemaError {
        pointer: pointer.into(),
        reason: reason.into(),
    }
}

fn as_count(v: &Value, pointer: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| schema(pointer, "expected a non-negative integer"))
}

fn as_real(v: &Value, pointer: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema(pointer, "expected a number"))
}

fn as_array<'a>(v: &'a Value, pointer: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(pointer, "expected an array"))
}

/// Parses one graph object of the JSON dataset format.
fn graph_from_json(v: &Value, at: &str, isolated: IsolatedNodes) -> Result<(Graph, Option<i64>)> {
    let obj = v.as_object().ok_or_else(|| schema(at, "expected an object"))?;
    let field = |k: &str| obj.get(k).ok_or_else(|| schema(format!("{at}/{k}"), "missing field"));
    let n = as_count(field("nodes")?, &format!("{at}/nodes"))?;
    let mut edges = Vec::new();
    for (e, edge) in as_array(field("edges")?, &format!("{at}/edges"))?.iter().enumerate() {
        let p = format!("{at}/edges/{e}");
        let triple = as_array(edge, &p)?;
        if triple.len() != 3 {
            return Err(schema(p, "expected [i, j, weight]"));
        }
        edges.push((
            as_count(&triple[0], &format!("{p}/0"))?,
            as_count(&triple[1], &format!("{p}/1"))?,
            as_real(&triple[2], &format!("{p}/2"))?,
        ));
    }
    let rows = as_array(field("features")?, &format!("{at}/features"))?;
    if rows.len() != n {
        return Err(schema(
            format!("{at}/features"),
            format!("{} feature rows for {n} nodes", rows.len()),
        ));
    }
    let mut width = None;
    let mut flat = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let p = format!("{at}/features/{i}");
        let cells = as_array(row, &p)?;
        if *width.get_or_insert(cells.len()) != cells.len() {
            return Err(schema(p, "rows differ in length"));
        }
        for (c, cell) in cells.iter().enumerate() {
            flat.push(as_real(cell, &format!("{p}/{c}"))?);
        }
    }
    let width = width.unwrap_or(0);
    let features = Array2::from_shape_vec((n, width), flat).map_err(|e| schema(format!("{at}/features"), e.to_string()))?;
    let label = match obj.get("label") {
        None | Some(Value::Null) => None,
        Some(l) => Some(l.as_i64().ok_or_else(|| schema(format!("{at}/label"), "expected an integer"))?),
    };
    let graph = Graph::new(&edges, n, features, isolated).map_err(|e| schema(at, e.to_string()))?;
    Ok((graph, label))
}

/// Parses a JSON dataset held in memory.
pub fn parse_json_graphs(name: &str, text: &str, isolated: IsolatedNodes) -> Result<GraphDataset> {
    let root: Value = serde_json::from_str(text)?;
    let items = as_array(&root, "")?;
    if items.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut graphs = Vec::with_capacity(items.len());
    let mut labels = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let (g, l) = graph_from_json(item, &format!("/{i}"), isolated)?;
        graphs.push(g);
        labels.push(l);
    }
    if let Some(c) = graphs.iter().position(|g| g.n_channels() != graphs[0].n_channels()) {
        return Err(schema(format!("/{c}/features"), "channel count differs from graph 0"));
    }
    let raw = if labels.iter().all(Option::is_some) {
        Some(labels.into_iter().flatten().collect())
    } else {
        None
    };
    GraphDataset::new(name, graphs, raw)
}

/// Loads a JSON dataset file.
pub fn load_json_graphs(path: impl AsRef<Path>) -> Result<GraphDataset> {
    load_json_graphs_with(path, IsolatedNodes::Reject)
}

pub fn load_json_graphs_with(path: impl AsRef<Path>, isolated: IsolatedNodes) -> Result<GraphDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_json_graphs(&name, &text, isolated)
}

/// Loads either format: directories as benchmark text, files as JSON.
pub fn load_dataset(path: impl AsRef<Path>, options: LoadOptions) -> Result<GraphDataset> {
    let path = path.as_ref();
    if path.is_dir() {
        load_benchmark_dir_with(path, options)
    } else {
        load_json_graphs_with(path, options.isolated)
    }
}

/// Serializes a dataset in the JSON format (original label values).
pub fn dataset_to_json(ds: &GraphDataset) -> Value {
    let items: Vec<Value> = ds
        .graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let edges: Vec<Value> = g.edges().into_iter().map(|(a, b, w)| json!([a, b, w])).collect();
            let features: Vec<Vec<f64>> = g.features().rows().into_iter().map(|r| r.to_vec()).collect();
            let label = ds.labels.as_ref().map(|l| ds.label_values[l[i]]);
            json!({
                "nodes": g.n_nodes(),
                "edges": edges,
                "features": features,
                "label": label,
            })
        })
        .collect();
    Value::Array(items)
}

pub fn write_json_graphs(ds: &GraphDataset, path: impl AsRef<Path>) -> Result<()> {
    let out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer(out, &dataset_to_json(ds))?;
    Ok(())
}

/// Formats a float with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Graph-level feature matrix with column names and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub labels: Vec<Option<usize>>,
    pub values: Array2<f64>,
}

impl FeatureTable {
    pub fn from_layout(layout: &[FeatureKey], labels: Vec<Option<usize>>, values: Array2<f64>) -> Self {
        Self {
            columns: layout.iter().map(|k| k.to_string()).collect(),
            labels,
            values,
        }
    }
}

/// Writes `graph,label,<columns…>` then one row per graph.
pub fn write_features<W: Write>(table: &FeatureTable, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    write!(out, "graph,label")?;
    for c in &table.columns {
        write!(out, ",{c}")?;
    }
    writeln!(out)?;
    for (i, row) in table.values.rows().into_iter().enumerate() {
        write!(out, "{i},")?;
        if let Some(l) = table.labels[i] {
            write!(out, "{l}")?;
        }
        for v in row {
            write!(out, ",{}", fmt_real(*v))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn export_features(table: &FeatureTable, path: impl AsRef<Path>) -> Result<()> {
    write_features(table, fs::File::create(path)?)
}

/// Reads a file written by [`export_features`].
pub fn import_features(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let (_, header) = lines.first().ok_or_else(|| malformed(path, 1, "missing header"))?;
    let mut head = header.split(',');
    if head.next() != Some("graph") || head.next() != Some("label") {
        return Err(malformed(path, 1, "header must start with `graph,label`"));
    }
    let columns: Vec<String> = head.map(str::to_string).collect();
    let mut labels = Vec::new();
    let mut flat = Vec::new();
    for (line, s) in &lines[1..] {
        let cells: Vec<&str> = s.split(',').collect();
        if cells.len() != columns.len() + 2 {
            return Err(malformed(path, *line, format!("expected {} cells", columns.len() + 2)));
        }
        labels.push(if cells[1].is_empty() {
            None
        } else {
            Some(parse_cell(path, *line, cells[1])?)
        });
        for c in &cells[2..] {
            flat.push(parse_cell::<f64>(path, *line, c)?);
        }
    }
    let values = Array2::from_shape_vec((labels.len(), columns.len()), flat)
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    Ok(FeatureTable {
        columns,
        labels,
        values,
    })
}

/// Writes `t,channel,raw_cumsum,rescaled` rows for every informative channel.
pub fn write_curves<W: Write>(model: &InfoGainModel, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "t,channel,raw_cumsum,rescaled")?;
    for curve in &model.curves {
        if model.uninformative_mask[curve.channel] {
            continue;
        }
        for (k, (raw, res)) in curve.raw_cumsum.iter().zip(&curve.rescaled).enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                curve.scale_at(k),
                curve.channel,
                fmt_real(*raw),
                fmt_real(*res)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn export_curves(model: &InfoGainModel, path: impl AsRef<Path>) -> Result<()> {
    write_curves(model, fs::File::create(path)?)
}

pub fn export_model(model: &InfoGainModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model.to_json()? + "\n")?;
    Ok(())
}

pub fn import_model(path: impl AsRef<Path>) -> Result<InfoGainModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    InfoGainModel::from_json(&text)
}

/// Counts label occurrences, keyed by original label value.
pub fn label_histogram(ds: &GraphDataset) -> BTreeMap<i64, usize> {
    ds.class_counts()
        .into_iter()
        .enumerate()
        .map(|(k, c)| (ds.label_values[k], c))
        .collect()
}
