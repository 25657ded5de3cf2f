//! Builds a small graph, forms the lazy random walk and watches a point mass
//! spread out while its total stays fixed.
//!
//! ```text
//! cargo run --example diffusion_basics
//! ```

use ndarray::Array2;

use infogain_wavelets::{build_graph, diffuse_stack, lazy_random_walk, Result};

fn main() -> Result<()> {
    // A 6-cycle with one chord.
    let mut edges: Vec<(usize, usize, f64)> = (0..6).map(|i| (i, (i + 1) % 6, 1.0)).collect();
    edges.push((0, 3, 2.0));
    let mut x = Array2::zeros((6, 1));
    x[[0, 0]] = 1.0;
    let g = build_graph(&edges, 6, x)?;

    let p = lazy_random_walk(&g)?;
    println!("P (column-stochastic):\n{:.3}", p.matrix().to_dense());

    let stack = diffuse_stack(&p, g.features().view(), 8)?;
    for t in [0, 1, 2, 4, 8] {
        let col = stack.frame(t)?.column(0).to_owned();
        println!("t = {t}: {:.3}  (mass {:.6})", col, col.sum());
    }
    Ok(())
}
