mod common;

use ndarray::{Array2, Axis};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use infogain_wavelets::legs::{legs_wavelets, selector_matrix};
use infogain_wavelets::wavelets::{pool_features, scattering, wavelet_transform, ScaleSet, ScatteringConfig};
use infogain_wavelets::{build_graph, diffuse_stack, dyadic_scales, lazy_random_walk};

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn random_scale_set(rng: &mut ChaCha8Rng, t_max: usize) -> ScaleSet {
    let interior = rng.random_range(1..=4);
    let mut s = vec![0, 1];
    for _ in 0..interior {
        s.push(rng.random_range(1..=t_max));
    }
    s.push(t_max);
    s.sort_unstable();
    ScaleSet::new(s).unwrap()
}

#[test]
fn sparse_powers_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let n = rng.random_range(2..=20);
        let extra = rng.random_range(0..=2 * n);
        let edges = random_edges(&mut rng, n, extra);
        let x = random_features(&mut rng, n, 3);
        let g = build_graph(&edges, n, x.clone()).unwrap();
        let stack = diffuse_stack(&lazy_random_walk(&g).unwrap(), x.view(), 16).unwrap();
        let p = dense_lazy_walk(n, &edges);
        let rows = to_rows(&x);
        for t in 0..=16 {
            let expected = dense_matmul(&dense_power(&p, t), &rows);
            let got = stack.frame(t).unwrap();
            for i in 0..n {
                for c in 0..3 {
                    let e = expected[i][c];
                    let err = (got[[i, c]] - e).abs() / e.abs().max(1.0);
                    assert!(err <= 1e-9, "t={t} node {i}: {} vs {e}", got[[i, c]]);
                }
            }
        }
    }
}

#[test]
fn octave_band_energy_peaks_at_planted_scales() {
    // Brute force over octave bands (P^s − P^{2s}) restricted to each
    // class-carrying cycle of the planted fixture.
    let ds = infogain_wavelets::io::load_json_graphs(fixture("planted.json")).unwrap();
    let cycles = [(3usize, 7usize, 3usize), (10, 9, 6), (19, 13, 12)];
    for (start, len, planted) in cycles {
        let mut best = (0, f64::MIN);
        for s in 1..=16 {
            let mut class_energy = [0.0f64; 2];
            for (g, &y) in ds.graphs.iter().zip(ds.labels.as_ref().unwrap()) {
                let stack = diffuse_stack(&lazy_random_walk(g).unwrap(), g.features().view(), 2 * s).unwrap();
                let band = stack.frame(s).unwrap() - stack.frame(2 * s).unwrap();
                let e: f64 = band.slice(ndarray::s![start..start + len, ..]).iter().map(|v| v * v).sum();
                class_energy[y] += e / 10.0;
            }
            let gap = (class_energy[1] - class_energy[0]).abs();
            if gap > best.1 {
                best = (s, gap);
            }
        }
        assert_eq!(best.0, planted, "cycle of length {len}");
    }
}

fn graph_strategy() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 2usize..30, 1usize..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_is_column_stochastic((seed, n, c) in graph_strategy()) {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, c);
        let p = lazy_random_walk(&g).unwrap();
        let dense = p.matrix().to_dense();
        prop_assert!(dense.iter().all(|&v| v >= 0.0));
        for s in dense.sum_axis(Axis(0)) {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn diffusion_conserves_mass_and_contracts((seed, n, c) in graph_strategy()) {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, c);
        let stack = diffuse_stack(&lazy_random_walk(&g).unwrap(), g.features().view(), 8).unwrap();
        for t in 1..=8 {
            let prev = stack.frame(t - 1).unwrap();
            let cur = stack.frame(t).unwrap();
            for ch in 0..c {
                let (a, b) = (prev.column(ch), cur.column(ch));
                prop_assert!((a.sum() - b.sum()).abs() <= 1e-10 * (1.0 + a.sum().abs()));
                let l1 = |v: ndarray::ArrayView1<f64>| v.iter().map(|x| x.abs()).sum::<f64>();
                prop_assert!(l1(b) <= l1(a) + 1e-12);
            }
        }
    }

    #[test]
    fn telescoping_reconstructs_input((seed, n, c) in graph_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, c);
        let stack = diffuse_stack(&lazy_random_walk(&g).unwrap(), g.features().view(), 16).unwrap();
        for scales in [dyadic_scales(4).unwrap(), random_scale_set(&mut rng, 16)] {
            let w = wavelet_transform(&stack, &scales).unwrap();
            prop_assert!(max_abs(&(w.reconstruct() - g.features())) <= 1e-10);
        }
    }

    #[test]
    fn permutation_equivariance((seed, n, c) in graph_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, c);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let h = g.permuted(&perm).unwrap();
        let scales = dyadic_scales(3).unwrap();
        let cfg = ScatteringConfig::default();
        let mg = scattering(&lazy_random_walk(&g).unwrap(), g.features().view(), &scales, &cfg).unwrap();
        let mh = scattering(&lazy_random_walk(&h).unwrap(), h.features().view(), &scales, &cfg).unwrap();
        for i in 0..n {
            for k in 0..mg.maps.ncols() {
                let (a, b) = (mg.maps[[i, k]], mh.maps[[perm[i], k]]);
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
        let (fg, fh) = (pool_features(&mg, 4), pool_features(&mh, 4));
        prop_assert_eq!(&fg.layout, &fh.layout);
        for (a, b) in fg.graph_vector.iter().zip(&fh.graph_vector) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn legs_wavelets_are_linear((seed, n, c) in graph_strategy(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, c);
        let p = lazy_random_walk(&g).unwrap();
        let x = random_features(&mut rng, n, c);
        let y = random_features(&mut rng, n, c);
        let theta = Array2::from_shape_fn((4, 8), |_| rng.random_range(-2.0..2.0));
        let sel = selector_matrix(theta, true).unwrap();
        let w = |z: &Array2<f64>| legs_wavelets(&diffuse_stack(&p, z.view(), 8).unwrap(), &sel).unwrap();
        let combo = &x * alpha + &y * beta;
        let (wx, wy, wc) = (w(&x), w(&y), w(&combo));
        for j in 0..wc.bands.len() {
            let expected = &wx.bands[j] * alpha + &wy.bands[j] * beta;
            prop_assert!(max_abs(&(&wc.bands[j] - &expected)) <= 1e-10);
        }
        let expected = &wx.lowpass * alpha + &wy.lowpass * beta;
        prop_assert!(max_abs(&(&wc.lowpass - &expected)) <= 1e-10);
        // The selector bank also telescopes.
        prop_assert!(max_abs(&(wx.reconstruct() - &x)) <= 1e-10);
    }
}
