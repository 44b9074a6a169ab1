use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::eigen::{spectral_basis, EigSolveConfig};
use crate::filters::{FilterBank, FilterPart};
use crate::graph::{NormalizedAdjacency, SparseGraph};

fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> SparseGraph<f64> {
    let mut edges: Vec<(usize, usize, f64)> =
        (1..n).map(|i| (rng.gen_range(0..i), i, 1.0)).collect();
    while edges.len() < 3 * n {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (a, b) = (a.min(b), a.max(b));
        if a != b
            && !edges
                .iter()
                .any(|&(x, y, _)| (x.min(y), x.max(y)) == (a, b))
        {
            edges.push((a, b, rng.gen_range(0.5..2.0)));
        }
    }
    SparseGraph::from_edges(n, &edges).unwrap()
}

struct Instance {
    bank: FilterBank<f64>,
    x0: Array2<f64>,
    pre: Precomputed<f64>,
    split: Split,
    params: ModelParams<f64>,
}

fn instance(n: usize, d: usize, h: usize, m: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(n, &mut rng);
    let op = NormalizedAdjacency::new(&g).unwrap();
    let bank =
        FilterBank::new(spectral_basis(&op, 4, &EigSolveConfig::sparse().with_tol(1e-12)).unwrap());
    let x0 = Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0));
    let pre = Precomputed::new(&bank, x0.view()).unwrap();
    let labels: Vec<usize> = (0..n).map(|i| i % m).collect();
    let split = Split::sample(&labels, m, 3, &mut rng).unwrap();
    let mut params = init_params(d, h, m, seed);
    for b in params.b1.iter_mut().chain(params.b2.iter_mut()) {
        *b = rng.gen_range(-0.1..0.1);
    }
    Instance {
        bank,
        x0,
        pre,
        split,
        params,
    }
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[test]
fn forward_matches_dense_oracle() {
    let inst = instance(40, 5, 6, 3, 1);
    let ks = FilterPart::ALL.map(|p| inst.bank.dense_conv_matrix(p).unwrap());
    let p = &inst.params;
    let mut z1 = Array2::<f64>::zeros((40, 6));
    for (k, kk) in ks.iter().enumerate() {
        z1 += &kk.dot(&inst.x0).dot(&p.w1[k]);
    }
    z1 += &p.b1.view().insert_axis(Axis(0));
    let x1 = z1.mapv(|v| v.max(0.0));
    let mut x2 = Array2::<f64>::zeros((40, 3));
    for (k, kk) in ks.iter().enumerate() {
        x2 += &kk.dot(&x1).dot(&p.w2[k]);
    }
    x2 += &p.b2.view().insert_axis(Axis(0));
    let got = forward(&inst.bank, &inst.pre, p, Mode::Eval)
        .unwrap()
        .logits;
    assert!(max_abs(&(&got - &x2)) <= 1e-10 * max_abs(&x2).max(1.0));
}

#[test]
fn zero_parameters_give_zero_logits() {
    let inst = instance(30, 4, 5, 2, 2);
    let zero = inst.params.zeros_like();
    let logits = forward(&inst.bank, &inst.pre, &zero, Mode::Eval)
        .unwrap()
        .logits;
    assert!(logits.iter().all(|&v| v == 0.0));
}

#[test]
fn unit_mask_matches_eval() {
    let inst = instance(30, 4, 5, 2, 3);
    let ones = Array2::from_elem((30, 5), 1.0);
    let a = forward(&inst.bank, &inst.pre, &inst.params, Mode::Train(&ones)).unwrap();
    let b = forward(&inst.bank, &inst.pre, &inst.params, Mode::Eval).unwrap();
    assert_eq!(a.logits, b.logits);
}

#[test]
fn loss_examples() {
    let split = Split::new(vec![0, 1], vec![0, 1, 1], 2).unwrap();
    let l = loss(Array2::<f64>::zeros((3, 2)).view(), &split);
    assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
    let confident = ndarray::array![[800.0, -800.0], [-800.0, 800.0], [0.0, 0.0]];
    assert!(loss(confident.view(), &split) < 1e-300);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let logits: Array2<f64> = Array2::from_shape_fn((10, 4), |_| rng.gen_range(-3.0..3.0));
    let labels: Vec<usize> = (0..10).map(|i| i % 4).collect();
    let split = Split::new((0..10).collect(), labels.clone(), 4).unwrap();
    let direct: f64 = (0..10)
        .map(|i| {
            let row = logits.row(i);
            let z: f64 = row.iter().map(|v| v.exp()).sum();
            -(row[labels[i]].exp() / z).ln()
        })
        .sum::<f64>()
        / 10.0;
    assert!((loss(logits.view(), &split) - direct).abs() < 1e-12);

    let p = softmax(logits.view());
    assert!(p.sum_axis(Axis(1)).iter().all(|s| (s - 1.0).abs() < 1e-12));
}

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..3 {
        let inst = instance(30, 4, 5, 3, 10 + seed);
        let errors =
            gradient_check(&inst.bank, &inst.pre, &inst.params, &inst.split, 1e-5).unwrap();
        assert_eq!(errors.len(), 8);
        assert!(errors.iter().all(|&e| e <= 1e-4), "{errors:?}");
    }
}

#[test]
fn balanced_zero_parameters_give_zero_output_bias_gradient() {
    let inst = instance(30, 4, 5, 2, 5);
    let zero = inst.params.zeros_like();
    let cache = forward(&inst.bank, &inst.pre, &zero, Mode::Eval).unwrap();
    let g = backward(
        &inst.bank,
        &inst.pre,
        &zero,
        &inst.split,
        &cache,
        Mode::Eval,
    )
    .unwrap();
    assert!(g.b2.iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn loss_ignores_non_training_rows() {
    let split = Split::new(vec![0, 2], vec![0, 1, 1, 0], 2).unwrap();
    let mut logits = Array2::from_shape_fn((4, 2), |(i, j)| (i * 2 + j) as f64 * 0.3);
    let before = loss(logits.view(), &split);
    logits[[1, 0]] += 5.0;
    logits[[3, 1]] -= 2.0;
    assert_eq!(loss(logits.view(), &split), before);
}

#[test]
fn dropout_is_unbiased_at_the_second_layer() {
    let inst = instance(20, 3, 4, 2, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let eval = forward(&inst.bank, &inst.pre, &inst.params, Mode::Eval)
        .unwrap()
        .logits;
    let trials = 10_000;
    let mut mean = Array2::<f64>::zeros(eval.dim());
    let mut sq = Array2::<f64>::zeros(eval.dim());
    for _ in 0..trials {
        let mask =
            Array2::from_shape_fn((20, 4), |_| if rng.gen::<f64>() < 0.5 { 0.0 } else { 2.0 });
        let out = forward(&inst.bank, &inst.pre, &inst.params, Mode::Train(&mask))
            .unwrap()
            .logits;
        mean += &out;
        sq += &out.mapv(|v| v * v);
    }
    mean /= trials as f64;
    sq /= trials as f64;
    let se = (sq - mean.mapv(|v| v * v)).mapv(|v| (v.max(0.0) / trials as f64).sqrt());
    for ((m, e), s) in mean.iter().zip(&eval).zip(&se) {
        assert!((m - e).abs() <= 5.0 * s + 1e-12, "{m} vs {e} (se {s})");
    }
}

fn two_cliques() -> (FilterBank<f64>, Array2<f64>, Vec<usize>) {
    let mut edges = Vec::new();
    for c in 0..2 {
        for i in 0..20 {
            for j in (i + 1)..20 {
                edges.push((20 * c + i, 20 * c + j, 1.0));
            }
        }
    }
    edges.push((0, 20, 1.0));
    let g = SparseGraph::from_edges(40, &edges).unwrap();
    let op = NormalizedAdjacency::new(&g).unwrap();
    let bank = FilterBank::new(spectral_basis(&op, 3, &EigSolveConfig::sparse()).unwrap());
    let labels: Vec<usize> = (0..40).map(|i| i / 20).collect();
    (bank, Array2::eye(40), labels)
}

#[test]
fn separates_two_cliques() {
    let (bank, x0, labels) = two_cliques();
    let split = Split::new(vec![3, 7, 25, 31], labels, 2).unwrap();
    let cfg = TrainConfig {
        epochs: 200,
        ..TrainConfig::default()
    };
    let out = train(&bank, x0.view(), &split, &cfg).unwrap();
    assert!(out.losses.iter().all(|l| l.is_finite()));
    assert!(out.losses.last().unwrap() < &out.losses[0]);
    let pre = Precomputed::new(&bank, x0.view()).unwrap();
    let logits = forward(&bank, &pre, &out.params, Mode::Eval)
        .unwrap()
        .logits;
    let pred = predict(logits.view());
    assert!(split.train_idx.iter().all(|&i| pred[i] == split.labels[i]));
    assert!(evaluate(&bank, &pre, &out.params, &split).unwrap() > 0.9);

    let again = train(&bank, x0.view(), &split, &cfg).unwrap();
    assert_eq!(again.params, out.params);
    assert_eq!(again.losses, out.losses);
}

#[test]
fn tied_mode_keeps_high_pass_equal_to_pseudoinverse() {
    let (bank, x0, labels) = two_cliques();
    let split = Split::new(vec![3, 25], labels, 2).unwrap();
    let cfg = TrainConfig {
        epochs: 20,
        tie_high_pass: true,
        ..TrainConfig::default()
    };
    let out = train(&bank, x0.view(), &split, &cfg).unwrap();
    assert_eq!(out.params.w1[1], out.params.w1[2]);
    assert_eq!(out.params.w2[1], out.params.w2[2]);
}

#[test]
fn split_sampling() {
    let labels: Vec<usize> = (0..100).map(|i| i / 50).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let split = Split::sample(&labels, 2, 10, &mut rng).unwrap();
    assert_eq!(split.train_idx.len(), 20);
    assert_eq!(split.test_idx().len(), 80);
    assert_eq!(
        split.train_idx.iter().filter(|&&i| labels[i] == 0).count(),
        10
    );
    let again = Split::sample(&labels, 2, 10, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(split, again);
    assert!(matches!(
        Split::sample(&labels, 2, 51, &mut rng),
        Err(crate::Error::ClassTooSmall { class: 0, .. })
    ));
}

#[test]
fn accuracy_and_ties() {
    let split = Split::new(vec![0], vec![0, 1, 0, 1], 2).unwrap();
    let perfect = ndarray::array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
    assert_eq!(accuracy(perfect.view(), &split).unwrap(), 1.0);
    let tied = Array2::<f64>::zeros((4, 2));
    assert_eq!(predict(tied.view()).to_vec(), vec![0, 0, 0, 0]);
    assert!((accuracy(tied.view(), &split).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let full = Split::new(vec![0, 1, 2, 3], vec![0, 1, 0, 1], 2).unwrap();
    assert!(accuracy(perfect.view(), &full).is_err());
}

#[test]
fn non_finite_loss_is_reported() {
    let (bank, x0, labels) = two_cliques();
    let split = Split::new(vec![3, 25], labels, 2).unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        lr: f64::INFINITY,
        ..TrainConfig::default()
    };
    assert!(matches!(
        train(&bank, x0.view(), &split, &cfg),
        Err(crate::Error::NonFiniteLoss { epoch: 1 })
    ));
}
