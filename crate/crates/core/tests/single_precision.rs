//! The same pipeline in `f32`: basis, filters and a short training run.

use ndarray::Array2;
use pinvgcn::eigen::{spectral_basis, EigSolveConfig};
use pinvgcn::graph::NormalizedAdjacency;
use pinvgcn::model::{evaluate, train, Precomputed, Split, TrainConfig};
use pinvgcn::{FilterBank32, SparseGraph32};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn two_cliques_in_single_precision() {
    let mut edges = Vec::new();
    for base in [0, 8] {
        for i in 0..8 {
            for j in i + 1..8 {
                edges.push((base + i, base + j, 1.0f32));
            }
        }
    }
    edges.push((7, 8, 0.2));
    let g = SparseGraph32::from_edges(16, &edges).unwrap();
    let op = NormalizedAdjacency::new(&g).unwrap();
    let basis = spectral_basis(&op, 2, &EigSolveConfig::sparse().with_tol(1e-5)).unwrap();
    let eigvec = basis.vectors().column(0).to_owned();
    // The Fiedler vector separates the cliques.
    assert!((0..8).all(|i| eigvec[i].signum() == eigvec[0].signum()));
    assert!((8..16).all(|i| eigvec[i].signum() == -eigvec[0].signum()));

    let bank = FilterBank32::new(basis);
    let labels: Vec<usize> = (0..16).map(|i| i / 8).collect();
    let split = Split::sample(&labels, 2, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let x0 = Array2::<f32>::eye(16);
    let cfg = TrainConfig {
        epochs: 100,
        ..TrainConfig::default()
    };
    let out = train(&bank, x0.view(), &split, &cfg).unwrap();
    assert!(out.losses.iter().all(|l| l.is_finite()));
    let pre = Precomputed::new(&bank, x0.view()).unwrap();
    assert_eq!(evaluate(&bank, &pre, &out.params, &split).unwrap(), 1.0);
}
