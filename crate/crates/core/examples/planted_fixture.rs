//! Generates the planted-scale fixture used by the test suite.
//!
//! Every graph is a disjoint union of cycles plus one edge whose features are
//! zero. The zero edge pins the min-max floor at 0, so each normalised signal
//! is the diffused mass distribution itself. Each cycle carries
//! `1 + a cos(2πi/n + φ)` per channel; on `C_n` that mode decays like
//! `λ_n^t` with `λ_n = (1 + cos(2π/n)) / 2`.
//!
//! Class 1 scales the amplitudes of the 7-, 9- and 13-cycles up and class 0
//! scales them down. Their octave bands `P^s − P^{2s}` respond most strongly at
//! `s = 3, 6, 12`. The 3- and 20-cycles carry no class signal and shape
//! the information curve. With `t_J = 32` InfoGain then places its interior
//! scales next to the planted ones.
//!
//! ```text
//! cargo run --example planted_fixture -- crates/core/tests/fixtures/planted.json
//! ```

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use infogain_wavelets::io::{write_json_graphs, GraphDataset};
use infogain_wavelets::wavelets::dyadic_scales;
use infogain_wavelets::{build_graph, fit, InfoGainConfig, Result};

/// (cycle length, amplitude, carries class signal)
const CYCLES: [(usize, f64, bool); 5] = [(3, 0.65, false), (7, 0.75, true), (9, 0.4, true), (13, 0.4, true), (20, 0.75, false)];
const CONTRAST: f64 = 0.1;
const JITTER: f64 = 0.3;
const CHANNELS: usize = 4;
const GRAPHS: usize = 20;
const SEED: u64 = 20_240_613;

fn planted_graph(rng: &mut ChaCha8Rng, class: usize) -> Result<infogain_wavelets::Graph> {
    let n: usize = CYCLES.iter().map(|c| c.0).sum::<usize>() + 2;
    let mut edges = Vec::new();
    let mut x = Array2::zeros((n, CHANNELS));
    let mut offset = 0;
    for &(len, amp, signal) in &CYCLES {
        for i in 0..len {
            edges.push((offset + i, offset + (i + 1) % len, 1.0));
        }
        let gain = if signal {
            if class == 1 {
                1.0 + CONTRAST
            } else {
                1.0 - CONTRAST
            }
        } else {
            1.0
        };
        for c in 0..CHANNELS {
            let a = amp * gain * (1.0 + JITTER * rng.random_range(-1.0..1.0));
            let phase = rng.random_range(0.0..2.0 * PI);
            for i in 0..len {
                x[[offset + i, c]] = 1.0 + a * (2.0 * PI * i as f64 / len as f64 + phase).cos();
            }
        }
        offset += len;
    }
    edges.push((offset, offset + 1, 1.0));
    build_graph(&edges, n, x)
}

fn main() -> Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/tests/fixtures/planted.json".into());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    for g in 0..GRAPHS {
        let class = g % 2;
        graphs.push(planted_graph(&mut rng, class)?);
        labels.push(class as i64);
    }
    let ds = GraphDataset::new("planted", graphs, Some(labels))?;
    write_json_graphs(&ds, &out)?;
    println!("wrote {} graphs to {out}", ds.len());

    let cfg = InfoGainConfig {
        max_scale: 32,
        ..Default::default()
    };
    let model = fit(&ds.graphs, ds.labels.as_deref(), &cfg)?;
    for (c, s) in model.per_channel_scales.iter().enumerate() {
        println!("channel {c}: {s}");
    }
    println!("dyadic reference: {}", dyadic_scales(5)?);
    Ok(())
}
