//! Shared generators and independent reference implementations for the
//! integration tests. Nothing here calls into the library's numerics; the
//! oracles work on plain `Vec`s with dense loops.

#![allow(dead_code)]

use std::path::PathBuf;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use infogain_wavelets::{build_graph, Graph};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Benchmark data root: `$INFOGAIN_DATA_DIR` or `<workspace>/data`.
pub fn data_dir() -> PathBuf {
    std::env::var_os("INFOGAIN_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// Random connected weighted graph: a shuffled spanning path plus extra edges.
pub fn random_edges<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut seen = std::collections::BTreeSet::new();
    let mut edges = Vec::new();
    let mut push = |a: usize, b: usize, w: f64, edges: &mut Vec<(usize, usize, f64)>| {
        let key = (a.min(b), a.max(b));
        if a != b && seen.insert(key) {
            edges.push((a, b, w));
        }
    };
    for w in order.windows(2) {
        push(w[0], w[1], rng.random_range(0.1..3.0), &mut edges);
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        push(a, b, rng.random_range(0.1..3.0), &mut edges);
    }
    edges
}

pub fn random_features<R: Rng>(rng: &mut R, n: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, c), |_| rng.random_range(-2.0..2.0))
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, c: usize) -> Graph {
    let extra = rng.random_range(0..=2 * n);
    let edges = random_edges(rng, n, extra);
    build_graph(&edges, n, random_features(rng, n, c)).expect("generated graph is valid")
}

/// Dense `½(I + A D⁻¹)` built straight from an edge list.
pub fn dense_lazy_walk(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        a[i][j] += w;
        a[j][i] += w;
    }
    let deg: Vec<f64> = (0..n).map(|j| (0..n).map(|i| a[i][j]).sum()).collect();
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            p[i][j] = 0.5 * a[i][j] / deg[j];
        }
        p[i][i] += 0.5;
    }
    p
}

pub fn dense_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

pub fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

/// `P^t` by repeated dense multiplication.
pub fn dense_power(p: &[Vec<f64>], t: usize) -> Vec<Vec<f64>> {
    let mut out = identity(p.len());
    for _ in 0..t {
        out = dense_matmul(&out, p);
    }
    out
}

pub fn to_rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Straight-line InfoGain reference on dense powers.
pub struct ReferenceFit {
    pub raw: Vec<Vec<f64>>,
    pub rescaled: Vec<Vec<f64>>,
    pub scales: Vec<Vec<usize>>,
    pub uninformative: Vec<bool>,
}

pub enum RefZeros {
    HalfMin,
    Constant(f64),
}

fn ref_normalize(v: &[f64], zeros: &RefZeros) -> Option<Vec<f64>> {
    let mut lo = v[0];
    let mut hi = v[0];
    for &x in v {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    if hi == lo {
        return None;
    }
    let mut p: Vec<f64> = v.iter().map(|x| (x - lo) / (hi - lo)).collect();
    let s: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= s;
    }
    let fill = match zeros {
        RefZeros::HalfMin => {
            let mut m = f64::INFINITY;
            for &x in &p {
                if x > 0.0 && x < m {
                    m = x;
                }
            }
            m / 2.0
        }
        RefZeros::Constant(e) => *e,
    };
    for x in p.iter_mut() {
        if *x == 0.0 {
            *x = fill;
        }
    }
    let s: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= s;
    }
    Some(p)
}

fn ref_kl(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for k in 0..p.len() {
        if p[k] != q[k] {
            d += p[k] * (p[k] / q[k]).ln();
        }
    }
    d.max(0.0)
}

pub fn reference_fit(
    graphs: &[(usize, Vec<(usize, usize, f64)>, Vec<Vec<f64>>)],
    labels: &[usize],
    t_j: usize,
    quantiles: &[f64],
    zeros: RefZeros,
    class_balance: bool,
    tolerance: f64,
) -> ReferenceFit {
    let channels = graphs[0].2[0].len();
    let n_graphs = graphs.len();
    let n_classes = labels.iter().max().map_or(1, |m| m + 1);
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count() as f64;

    // totals[t - 2][c]
    let mut totals = vec![vec![0.0; channels]; t_j - 1];
    let mut marked = vec![0usize; channels];
    for (g, (n, edges, x)) in graphs.iter().enumerate() {
        let p = dense_lazy_walk(*n, edges);
        let weight = if class_balance {
            n_graphs as f64 / (present * counts[labels[g]] as f64)
        } else {
            1.0
        };
        let diffused = |t: usize, c: usize| -> Vec<f64> {
            let pt = dense_power(&p, t);
            (0..*n).map(|i| (0..*n).map(|k| pt[i][k] * x[k][c]).sum()).collect()
        };
        for c in 0..channels {
            let Some(q) = ref_normalize(&diffused(t_j, c), &zeros) else {
                marked[c] += 1;
                continue;
            };
            for t in 2..t_j {
                let p_t = ref_normalize(&diffused(t, c), &zeros).unwrap_or_else(|| vec![1.0 / *n as f64; *n]);
                totals[t - 2][c] += weight * ref_kl(&p_t, &q);
            }
        }
    }

    let mut raw = Vec::new();
    let mut rescaled = Vec::new();
    let mut scales = Vec::new();
    let mut uninformative = Vec::new();
    for c in 0..channels {
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for t in 2..t_j {
            acc += totals[t - 2][c];
            cum.push(acc);
        }
        let lo = cum[0];
        let hi = cum[cum.len() - 1];
        let flat = hi == lo;
        let r: Vec<f64> = if flat {
            vec![0.0; cum.len()]
        } else {
            cum.iter().map(|v| (v - lo) / (hi - lo)).collect()
        };
        let bad = flat || marked[c] as f64 > tolerance * n_graphs as f64;
        let mut s = vec![0, 1, 2];
        if !bad {
            for &rho in quantiles {
                let mut k = r.len() - 1;
                for (i, &v) in r.iter().enumerate() {
                    if v >= rho {
                        k = i;
                        break;
                    }
                }
                s.push(k + 2);
            }
            s.push(t_j);
        }
        raw.push(cum);
        rescaled.push(r);
        scales.push(s);
        uninformative.push(bad);
    }

    // Median fill for uninformative channels.
    let good: Vec<&Vec<usize>> = scales.iter().zip(&uninformative).filter(|(_, &u)| !u).map(|(s, _)| s).collect();
    if !good.is_empty() {
        let len = good[0].len();
        let median: Vec<usize> = (0..len)
            .map(|i| {
                let mut col: Vec<usize> = good.iter().map(|s| s[i]).collect();
                col.sort();
                let m = col.len();
                if m % 2 == 1 {
                    col[m / 2]
                } else {
                    (col[m / 2 - 1] + col[m / 2]) / 2
                }
            })
            .collect();
        for c in 0..channels {
            if uninformative[c] {
                scales[c] = median.clone();
            }
        }
    }
    ReferenceFit {
        raw,
        rescaled,
        scales,
        uninformative,
    }
}

/// Worst relative error between the analytic logistic gradient and central
/// differences over `points` random parameter vectors.
pub fn gradient_check(seed: u64, points: usize) -> f64 {
    use infogain_wavelets::classifier::{logistic_gradient, logistic_loss};
    use ndarray::Array1;
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let (n, d) = (rng.random_range(5..40), rng.random_range(1..8));
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
        let y: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect();
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let l2 = rng.random_range(0.0..0.1);
        let theta = Array1::from_shape_fn(d + 1, |_| rng.random_range(-1.5..1.5));
        let g = logistic_gradient(theta.view(), x.view(), &y, &s, l2);
        let h = 1e-6;
        let mut fd = Array1::zeros(d + 1);
        for k in 0..=d {
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[k] += h;
            down[k] -= h;
            fd[k] = (logistic_loss(up.view(), x.view(), &y, &s, l2) - logistic_loss(down.view(), x.view(), &y, &s, l2))
                / (2.0 * h);
        }
        let diff = (&g - &fd).mapv(|v| v * v).sum().sqrt();
        let scale = g.mapv(|v| v * v).sum().sqrt().max(fd.mapv(|v| v * v).sum().sqrt()).max(1e-8);
        worst = worst.max(diff / scale);
    }
    worst
}

pub type RawGraph = (usize, Vec<(usize, usize, f64)>, Vec<Vec<f64>>);

/// Random small dataset; with `constant_channel` the last channel is 1.0
/// everywhere on a cycle, which the walk leaves fixed.
pub fn random_dataset(rng: &mut rand_chacha::ChaCha8Rng, constant_channel: bool) -> (Vec<RawGraph>, Vec<usize>) {
    let n_graphs = rng.random_range(4..=15);
    let channels = rng.random_range(1..=3);
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    for g in 0..n_graphs {
        let n = rng.random_range(3..=12);
        let edges = if constant_channel {
            (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect()
        } else {
            let extra = rng.random_range(0..=n);
            random_edges(rng, n, extra)
        };
        let mut x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..channels).map(|_| rng.random_range(-1.0..3.0)).collect())
            .collect();
        if constant_channel {
            for row in x.iter_mut() {
                row.push(1.0);
            }
        }
        graphs.push((n, edges, x));
        labels.push(g % 2);
    }
    (graphs, labels)
}

pub fn to_graph((n, edges, x): &RawGraph) -> Graph {
    let c = x[0].len();
    let feats = Array2::from_shape_fn((*n, c), |(i, j)| x[i][j]);
    build_graph(edges, *n, feats).unwrap()
}
