//! Dyadic wavelet bank, telescoping check and pooled scattering moments for
//! one random graph.
//!
//! ```text
//! cargo run --example dyadic_scattering
//! ```

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use infogain_wavelets::wavelets::{feature_len, pool_features};
use infogain_wavelets::{
    build_graph, diffuse_stack, dyadic_scales, lazy_random_walk, scattering, wavelet_transform, Result,
    ScatteringConfig,
};

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 25;
    let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|i| (rng.random_range(0..i), i, 1.0)).collect();
    edges.push((0, n - 1, 1.0));
    let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(0.0..1.0));
    let g = build_graph(&edges, n, x)?;
    let p = lazy_random_walk(&g)?;

    let scales = dyadic_scales(4)?;
    let stack = diffuse_stack(&p, g.features().view(), scales.max_scale())?;
    let w = wavelet_transform(&stack, &scales)?;
    let err = (&w.reconstruct() - g.features()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("scales {scales}, {} bands, telescoping error {err:.1e}", w.bands.len());

    let cfg = ScatteringConfig::default();
    let maps = scattering(&p, g.features().view(), &scales, &cfg)?;
    let pooled = pool_features(&maps, cfg.moments);
    println!(
        "{} node maps, {} pooled features (layout formula {})",
        maps.keys.len(),
        pooled.graph_vector.len(),
        feature_len(2, scales.n_bands(), &cfg)
    );
    for (key, v) in pooled.layout.iter().zip(&pooled.graph_vector).take(8) {
        println!("  {key:<16} {v:.4}");
    }
    Ok(())
}
