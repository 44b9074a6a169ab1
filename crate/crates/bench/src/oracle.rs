//! Dense-oracle equivalence suites: Krylov eigensolver against Jacobi,
//! hypergraph Gram route against the dense clique-expansion Laplacian,
//! factored filters against dense convolution matrices, and backward
//! against finite differences.

use std::fmt;

use ndarray::{s, Array1, Array2, Axis};
use pinvgcn::eigen::{
    dense_eig_oracle, spectral_basis, symmetric_eigen, EigSolveConfig, SpectralBasis,
};
use pinvgcn::filters::{FilterBank, FilterPart};
use pinvgcn::graph::{unit_degree_vector, NormalizedAdjacency, SparseGraph};
use pinvgcn::hypergraph::{
    clique_expansion_dense, gram_matrix, hypergraph_spectral_basis, Hypergraph, RankPolicy,
};
use pinvgcn::model::{gradient_check, init_params_with, Precomputed, Split};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::BenchError;

pub const DEFAULT_SCALE: usize = 200;

/// Eigenvalue agreement with the dense oracle.
pub const EIGENVALUE_TOL: f64 = 1e-8;
/// Sine of the largest principal angle between matching invariant subspaces.
pub const SUBSPACE_TOL: f64 = 1e-6;
pub const HYPERGRAPH_TOL: f64 = 1e-10;
pub const FEATURE_MAP_TOL: f64 = 1e-10;
pub const PSEUDOINVERSE_TOL: f64 = 1e-8;
pub const GRADIENT_TOL: f64 = 1e-4;

/// Krylov tolerance used by the suites; tighter than the library default so
/// that eigenvector errors stay below the subspace tolerance.
const SUITE_KRYLOV_TOL: f64 = 1e-11;
/// Oracle eigenvalues closer than this form one degenerate cluster.
const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Passed,
    Failed,
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub instances: usize,
    pub outcome: Outcome,
    /// `(quantity, worst observed, tolerance)`.
    pub metrics: Vec<(&'static str, f64, f64)>,
}

impl SuiteReport {
    fn from_metrics(
        name: &'static str,
        instances: usize,
        metrics: Vec<(&'static str, f64, f64)>,
    ) -> Self {
        let ok = metrics.iter().all(|&(_, worst, tol)| worst <= tol);
        Self {
            name,
            instances,
            outcome: if ok { Outcome::Passed } else { Outcome::Failed },
            metrics,
        }
    }

    fn skipped(name: &'static str, reason: String) -> Self {
        Self {
            name,
            instances: 0,
            outcome: Outcome::Skipped(reason),
            metrics: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Failed
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Skipped(why) => write!(f, "[SKIP] {}: {why}", self.name),
            outcome => {
                let tag = if *outcome == Outcome::Passed {
                    "PASS"
                } else {
                    "FAIL"
                };
                write!(f, "[{tag}] {}: {} instances", self.name, self.instances)?;
                for (what, worst, tol) in &self.metrics {
                    write!(f, ", {what} {worst:.2e} (tol {tol:.0e})")?;
                }
                Ok(())
            }
        }
    }
}

/// Perturbations that make each suite fail, to check the checker.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Fault(pub bool);

impl Fault {
    fn apply(self, x: f64, delta: f64) -> f64 {
        if self.0 {
            x + delta
        } else {
            x
        }
    }
}

/// Random spanning tree plus about `2n` extra edges, weights in `[0.1, 1]`.
pub fn random_connected_graph(n: usize, rng: &mut ChaCha8Rng) -> SparseGraph<f64> {
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        seen.insert((j, i));
        edges.push((j, i, rng.gen_range(0.1..1.0)));
    }
    let target = edges.len() + 2 * n;
    let max_edges = n * (n - 1) / 2;
    while edges.len() < target.min(max_edges) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let key = (a.min(b), a.max(b));
        if a != b && seen.insert(key) {
            edges.push((key.0, key.1, rng.gen_range(0.1..1.0)));
        }
    }
    SparseGraph::from_edges(n, &edges).expect("spanning tree keeps the graph connected")
}

/// Random memberships: each node joins each of `m` hyperedges with
/// probability `p`; retried until every node is covered, every hyperedge
/// has two members, the incidence has full column rank and the hypergraph
/// is connected.
pub fn random_hypergraph(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Hypergraph<f64> {
    let p = (3.0 / m as f64).min(0.5);
    loop {
        let mut edges = vec![Vec::new(); m];
        for i in 0..n {
            let mut joined = false;
            for e in edges.iter_mut() {
                if rng.gen::<f64>() < p {
                    e.push(i);
                    joined = true;
                }
            }
            if !joined {
                edges[rng.gen_range(0..m)].push(i);
            }
        }
        let weights = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
        let Ok(hg) = Hypergraph::new(n, edges, weights) else {
            continue;
        };
        let (sigma2, _) = symmetric_eigen(&gram_matrix(&hg));
        let full_rank = sigma2[0] > 1e-8;
        let connected = m < 2 || sigma2[m - 2] < 1.0 - 1e-8;
        if full_rank && connected {
            return hg;
        }
    }
}

/// `I - D^{-1/2} A D^{-1/2}` assembled densely from an explicit adjacency.
fn dense_laplacian(a: &Array2<f64>) -> Array2<f64> {
    let d = a.sum_axis(Axis(1)).mapv(|x| x.sqrt().recip());
    let n = a.nrows();
    Array2::eye(n) - a * &d.view().insert_axis(Axis(1)) * d.view().insert_axis(Axis(0))
}

fn spectral_norm(m: &Array2<f64>) -> f64 {
    let (vals, _) = symmetric_eigen(&m.t().dot(m));
    vals.iter().fold(0.0f64, |acc, &v| acc.max(v)).sqrt()
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest principal-angle sine between the Krylov columns and the oracle
/// eigenvectors, comparing degenerate clusters as whole subspaces.
pub fn worst_subspace_sine(
    oracle_vals: &Array1<f64>,
    oracle_vecs: &Array2<f64>,
    basis: &SpectralBasis<f64>,
) -> f64 {
    let r = basis.rank();
    let n = oracle_vals.len();
    let mut worst = 0.0f64;
    let mut start = 1;
    while start <= r {
        let mut end = start + 1;
        while end < n
            && oracle_vals[end] - oracle_vals[end - 1]
                <= CLUSTER_GAP * oracle_vals[end].abs().max(1.0)
        {
            end += 1;
        }
        let q = oracle_vecs.slice(s![.., start..end]);
        let k = basis
            .vectors()
            .slice(s![.., (start - 1)..end.min(r + 1) - 1]);
        let resid = &k - &q.dot(&q.t().dot(&k));
        worst = worst.max(spectral_norm(&resid));
        start = end;
    }
    worst
}

/// Krylov eigenpairs of random connected graphs against the Jacobi oracle.
pub fn eigensolver_suite(
    instances: usize,
    scale: usize,
    seed: u64,
    fault: Fault,
) -> Result<SuiteReport, BenchError> {
    const NAME: &str = "eigensolver";
    let max_n = scale.min(200);
    if max_n < 12 {
        return Ok(SuiteReport::skipped(
            NAME,
            format!("scale {scale} below the minimum of 12 nodes"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_val, mut worst_angle) = (0.0f64, 0.0f64);
    for _ in 0..instances {
        let n = rng.gen_range((max_n / 2).max(12)..=max_n);
        let r = rng.gen_range(1..=10.min(n - 2));
        let g = random_connected_graph(n, &mut rng);
        let op = NormalizedAdjacency::new(&g)?;
        let cfg = EigSolveConfig::sparse()
            .with_tol(SUITE_KRYLOV_TOL)
            .with_seed(rng.gen());
        let basis = spectral_basis(&op, r, &cfg)?;
        let (vals, vecs) = dense_eig_oracle(&dense_laplacian(&g.to_dense()))?;
        for i in 0..r {
            let got = fault.apply(basis.lambda()[i], 1e-6);
            worst_val = worst_val.max((got - vals[i + 1]).abs());
        }
        worst_angle = worst_angle.max(worst_subspace_sine(&vals, &vecs, &basis));
    }
    Ok(SuiteReport::from_metrics(
        NAME,
        instances,
        vec![
            ("max |d lambda|", worst_val, EIGENVALUE_TOL),
            ("max sin angle", worst_angle, SUBSPACE_TOL),
        ],
    ))
}

/// Gram-matrix spectra of random hypergraphs against the dense Laplacian of
/// the explicit clique expansion.
pub fn hypergraph_suite(
    instances: usize,
    scale: usize,
    seed: u64,
    fault: Fault,
) -> Result<SuiteReport, BenchError> {
    const NAME: &str = "hypergraph";
    let max_n = scale.min(300);
    if max_n < 10 {
        return Ok(SuiteReport::skipped(
            NAME,
            format!("scale {scale} below the minimum of 10 nodes"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_ones, mut worst_vals) = (0.0f64, 0.0f64);
    let mut count_mismatch = 0.0f64;
    for _ in 0..instances {
        let m = rng.gen_range(3..=20.min(max_n / 2));
        let n = rng.gen_range((max_n / 2).max(m + 2)..=max_n);
        let hg = random_hypergraph(n, m, &mut rng);
        let (vals, _) = dense_eig_oracle(&dense_laplacian(&clique_expansion_dense(&hg)?))?;

        // Exactly n - |E| eigenvalues at one: the |E| nontrivial ones stay
        // away from it by a margin, the rest sit on it.
        let ones: Vec<f64> = vals.iter().map(|v| (v - 1.0).abs()).collect();
        let mut sorted = ones.clone();
        sorted.sort_by(f64::total_cmp);
        let at_one = ones.iter().filter(|&&d| d <= HYPERGRAPH_TOL).count();
        count_mismatch = count_mismatch.max((at_one as f64 - (n - m) as f64).abs());
        worst_ones = worst_ones.max(sorted[n - m - 1]);

        let basis = hypergraph_spectral_basis(&hg, m - 1, RankPolicy::Strict)?;
        worst_vals = worst_vals.max(fault.apply(vals[0].abs(), 1e-9));
        for i in 0..m - 1 {
            worst_vals = worst_vals.max((basis.lambda()[i] - vals[i + 1]).abs());
        }
    }
    Ok(SuiteReport::from_metrics(
        NAME,
        instances,
        vec![
            ("eigenvalue-one count mismatch", count_mismatch, 0.0),
            ("max |lambda - 1| on unit block", worst_ones, HYPERGRAPH_TOL),
            ("max |d lambda| (r+1 smallest)", worst_vals, HYPERGRAPH_TOL),
        ],
    ))
}

/// Factored feature map against the dense three-term sum, and the best
/// rank-r approximation property of the pseudoinverse part.
pub fn filter_suite(
    instances: usize,
    scale: usize,
    seed: u64,
    fault: Fault,
) -> Result<SuiteReport, BenchError> {
    const NAME: &str = "filters";
    let max_n = scale.min(200);
    if max_n < 12 {
        return Ok(SuiteReport::skipped(
            NAME,
            format!("scale {scale} below the minimum of 12 nodes"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_map, mut worst_sum, mut worst_pinv) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..instances {
        let n = rng.gen_range((max_n / 2).max(12)..=max_n);
        let r = rng.gen_range(2..=10.min(n - 2));
        let (c, c_out) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let g = random_connected_graph(n, &mut rng);
        let (vals, vecs) = dense_eig_oracle(&dense_laplacian(&g.to_dense()))?;
        let u0 = unit_degree_vector(g_degrees(&g).view())?;
        let lambda = vals.slice(s![1..=r]).to_owned();
        let u = vecs.slice(s![.., 1..=r]).to_owned();
        let basis =
            SpectralBasis::from_parts(u0.clone(), lambda.clone(), u.clone(), 0.0, vec![0.0; r])?;
        let bank = FilterBank::new(basis);

        let x = Array2::from_shape_fn((n, c), |_| rng.gen_range(-1.0..1.0));
        let w: [Array2<f64>; 3] = std::array::from_fn(|_| {
            Array2::from_shape_fn((c, c_out), |_| rng.gen_range(-1.0..1.0))
        });

        // Dense convolution matrices straight from the oracle eigenpairs.
        let l1 = lambda[0];
        let p0 = u0
            .view()
            .insert_axis(Axis(1))
            .dot(&u0.view().insert_axis(Axis(0)));
        let k2 = (&u * &lambda.mapv(|l| l1 / l).view().insert_axis(Axis(0))).dot(&u.t());
        let k3 = (Array2::<f64>::eye(n) - &p0 - u.dot(&u.t())) * l1;
        let dense = [p0, k2, k3];
        let mut expected = Array2::<f64>::zeros((n, c_out));
        for k in 0..3 {
            expected += &dense[k].dot(&x).dot(&w[k]);
        }
        let mut got = bank.feature_map(x.view(), w[0].view(), w[1].view(), w[2].view())?;
        got[[0, 0]] = fault.apply(got[[0, 0]], 1e-6 * max_abs(&expected));
        let scale_ref = max_abs(&expected).max(f64::MIN_POSITIVE);
        worst_map = worst_map.max(max_abs(&(&got - &expected)) / scale_ref);

        let mut summed = Array2::<f64>::zeros((n, c_out));
        for part in FilterPart::ALL {
            summed += &bank.conv_apply(part, x.view())?.dot(&w[part.index()]);
        }
        worst_sum = worst_sum.max(max_abs(&(&got - &summed)) / scale_ref);

        let mut pinv = Array2::<f64>::zeros((n, n));
        for i in 1..n {
            let v = vecs.column(i);
            pinv += &(v.insert_axis(Axis(1)).dot(&v.insert_axis(Axis(0))) / vals[i]);
        }
        let approx = bank.dense_conv_matrix(FilterPart::Pseudoinverse)? / l1;
        let (diff_vals, _) = symmetric_eigen(&(pinv - approx));
        let norm = diff_vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst_pinv = worst_pinv.max((norm - 1.0 / vals[r + 1]).abs());
    }
    Ok(SuiteReport::from_metrics(
        NAME,
        instances,
        vec![
            ("feature map vs dense (rel)", worst_map, FEATURE_MAP_TOL),
            ("feature map vs conv sum (rel)", worst_sum, 1e-12),
            (
                "| |L+ - K2/l1|_2 - 1/lambda_(r+1) |",
                worst_pinv,
                PSEUDOINVERSE_TOL,
            ),
        ],
    ))
}

fn g_degrees(g: &SparseGraph<f64>) -> Array1<f64> {
    pinvgcn::graph::degrees(g).expect("connected graph")
}

/// Backward pass against central finite differences, dropout off.
pub fn gradient_suite(
    instances: usize,
    scale: usize,
    seed: u64,
    fault: Fault,
) -> Result<SuiteReport, BenchError> {
    const NAME: &str = "gradients";
    let max_n = scale.min(50);
    if max_n < 10 {
        return Ok(SuiteReport::skipped(
            NAME,
            format!("scale {scale} below the minimum of 10 nodes"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.gen_range((max_n / 2).max(10)..=max_n);
        let (d, h, m) = (
            rng.gen_range(2..=5),
            rng.gen_range(2..=6),
            rng.gen_range(2..=3),
        );
        let r = rng.gen_range(1..=4.min(n - 2));
        let g = random_connected_graph(n, &mut rng);
        let op = NormalizedAdjacency::new(&g)?;
        let bank = FilterBank::new(spectral_basis(
            &op,
            r,
            &EigSolveConfig::sparse().with_tol(1e-12),
        )?);
        let x0 = Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0));
        let pre = Precomputed::new(&bank, x0.view())?;
        let labels: Vec<usize> = (0..n).map(|i| i % m).collect();
        let split = Split::sample(&labels, m, 2, &mut rng)?;
        let mut params = init_params_with(d, h, m, &mut rng);
        for b in params.b1.iter_mut().chain(params.b2.iter_mut()) {
            *b = rng.gen_range(-0.2..0.2);
        }
        let errors = gradient_check(&bank, &pre, &params, &split, 1e-5)?;
        for e in errors {
            worst = worst.max(fault.apply(e, 1e-2));
        }
    }
    Ok(SuiteReport::from_metrics(
        NAME,
        instances,
        vec![("max relative gradient error", worst, GRADIENT_TOL)],
    ))
}

/// All four suites at the given scale, a few instances each.
pub fn cmd_oracle_check(
    scale: usize,
    seed: u64,
    fault: Fault,
) -> Result<Vec<SuiteReport>, BenchError> {
    Ok(vec![
        eigensolver_suite(5, scale, seed, fault)?,
        hypergraph_suite(5, scale, seed.wrapping_add(1), fault)?,
        filter_suite(5, scale, seed.wrapping_add(2), fault)?,
        gradient_suite(3, scale, seed.wrapping_add(3), fault)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_scale_skips_every_suite() {
        let reports = cmd_oracle_check(3, 0, Fault::default()).unwrap();
        assert!(reports
            .iter()
            .all(|r| matches!(r.outcome, Outcome::Skipped(_))));
        assert!(reports.iter().all(SuiteReport::passed));
        assert!(reports[0].to_string().starts_with("[SKIP] eigensolver"));
    }

    #[test]
    fn small_scale_passes_and_faults_fail() {
        let reports = cmd_oracle_check(30, 1, Fault::default()).unwrap();
        for r in &reports {
            assert_eq!(r.outcome, Outcome::Passed, "{r}");
        }
        let faulty = cmd_oracle_check(30, 1, Fault(true)).unwrap();
        for r in &faulty {
            assert_eq!(r.outcome, Outcome::Failed, "{r}");
        }
    }

    #[test]
    fn generators_respect_their_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_connected_graph(30, &mut rng);
        assert!(g.is_connected());
        let hg = random_hypergraph(40, 8, &mut rng);
        assert_eq!(hg.edge_count(), 8);
        assert!(hg.edges().iter().all(|e| e.len() >= 2));
    }
}
