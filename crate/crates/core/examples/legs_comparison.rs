//! Compares the LEGS selector bank with the dyadic bank: one-hot logits
//! reproduce the dyadic wavelets, random logits give a smooth mixture that
//! still telescopes.
//!
//! ```text
//! cargo run --example legs_comparison
//! ```

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use infogain_wavelets::legs::{one_hot_theta, write_matrix_csv};
use infogain_wavelets::{
    build_graph, diffuse_stack, dyadic_scales, lazy_random_walk, legs_wavelets, selector_matrix, wavelet_transform,
    Result,
};

fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 30;
    let edges: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, rng.random_range(0.5..2.0))).collect();
    let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-1.0..1.0));
    let g = build_graph(&edges, n, x)?;
    let stack = diffuse_stack(&lazy_random_walk(&g)?, g.features().view(), 16)?;

    let scales = dyadic_scales(4)?;
    let dyadic = wavelet_transform(&stack, &scales)?;
    let one_hot = legs_wavelets(&stack, &selector_matrix(one_hot_theta(&scales, 16)?, true)?)?;
    let worst = dyadic
        .bands
        .iter()
        .zip(&one_hot.bands)
        .map(|(a, b)| max_diff(a, b))
        .fold(max_diff(&dyadic.lowpass, &one_hot.lowpass), f64::max);
    println!("one-hot selector vs dyadic: max difference {worst:.2e}");

    let theta = Array2::from_shape_fn((5, 16), |_| rng.random_range(-1.0..1.0));
    let random = selector_matrix(theta, true)?;
    let soft = legs_wavelets(&stack, &random)?;
    println!(
        "random selector: telescoping error {:.2e}",
        max_diff(&soft.reconstruct(), g.features())
    );
    println!("row-softmax selector F:");
    write_matrix_csv(random.f(), std::io::stdout().lock())?;
    Ok(())
}
