use ndarray::{s, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Hypergraph;
use crate::eigen::{symmetric_eigen, SpectralBasis};
use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Largest node count for [`clique_expansion_dense`].
pub const CLIQUE_DENSE_LIMIT: usize = 2000;

/// Gram eigenvalues `sigma^2` at or below this count as zero.
pub const GRAM_TOLERANCE: f64 = 1e-12;

const BASIS_TOL: f64 = 1e-10;

/// What to do when `H~` has fewer than `r + 1` nonzero singular values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankPolicy {
    /// Fill the missing columns of `U_r` with seeded random unit vectors
    /// orthogonal to the range of `H~`; they are exact eigenvectors to the
    /// eigenvalue 1.
    Complete { seed: u64 },
    /// Fail with [`Error::RankDeficient`].
    Strict,
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy::Complete { seed: 0 }
    }
}

/// `H~ = D^{-1/2} H W^{1/2} B^{-1/2}` as a dense `n x |E|` block.
pub fn normalized_incidence<T: Scalar>(hg: &Hypergraph<T>) -> Array2<T> {
    let scale = edge_scales(hg);
    let inv_sqrt_d = hg.node_degrees().mapv(|d| d.sqrt().recip());
    let mut h = Array2::zeros((hg.node_count(), hg.edge_count()));
    for (e, members) in hg.edges().iter().enumerate() {
        for &i in members {
            h[[i, e]] = scale[e] * inv_sqrt_d[i];
        }
    }
    h
}

/// `G = H~^T H~`, accumulated node by node over pairs of incident edges.
pub fn gram_matrix<T: Scalar>(hg: &Hypergraph<T>) -> Array2<T> {
    let scale = edge_scales(hg);
    let degrees = hg.node_degrees();
    let m = hg.edge_count();
    let mut g = Array2::zeros((m, m));
    for (i, &d) in degrees.iter().enumerate() {
        let es = hg.incident_edges(i);
        for (a, &e) in es.iter().enumerate() {
            let se = scale[e] / d;
            for &f in &es[a..] {
                g[[e, f]] += se * scale[f];
            }
        }
    }
    for e in 0..m {
        for f in (e + 1)..m {
            g[[f, e]] = g[[e, f]];
        }
    }
    g
}

/// `sqrt(w_e / B_ee)` per hyperedge.
fn edge_scales<T: Scalar>(hg: &Hypergraph<T>) -> Vec<T> {
    hg.weights()
        .iter()
        .zip(hg.edge_degrees())
        .map(|(&w, b)| (w / b).sqrt())
        .collect()
}

/// Explicit clique expansion `H W B^{-1} H^T`, loops included.
pub fn clique_expansion_dense<T: Scalar>(hg: &Hypergraph<T>) -> Result<Array2<T>> {
    let n = hg.node_count();
    if n > CLIQUE_DENSE_LIMIT {
        return Err(Error::ScaleGuard {
            n,
            limit: CLIQUE_DENSE_LIMIT,
        });
    }
    let mut a = Array2::zeros((n, n));
    for (members, (&w, b)) in hg
        .edges()
        .iter()
        .zip(hg.weights().iter().zip(hg.edge_degrees()))
    {
        let v = w / b;
        for &i in members {
            for &j in members {
                a[[i, j]] += v;
            }
        }
    }
    Ok(a)
}

/// Exact `u0` and `r` smallest nonzero eigenpairs of the hypergraph
/// Laplacian `I - H~ H~^T`, from the eigendecomposition of the Gram matrix:
/// `lambda = 1 - sigma^2`, `u = H~ v / sigma`.
pub fn hypergraph_spectral_basis<T: Scalar>(
    hg: &Hypergraph<T>,
    r: usize,
    policy: RankPolicy,
) -> Result<SpectralBasis<T>> {
    let m = hg.edge_count();
    if r == 0 || r + 1 > m {
        return Err(Error::RankTooLarge {
            rank: r,
            max: m.saturating_sub(1),
        });
    }
    let h = normalized_incidence(hg);
    let (sigma2_asc, vecs_asc) = symmetric_eigen(&gram_matrix(hg));
    let zero: T = cast(GRAM_TOLERANCE);
    let nonzero = sigma2_asc.iter().filter(|&&s| s > zero).count();
    if nonzero < r + 1 && policy == RankPolicy::Strict {
        return Err(Error::RankDeficient {
            needed: r + 1,
            available: nonzero,
        });
    }

    // Descending sigma^2; position 0 is the trivial pair.
    let lift = |k: usize| -> (T, Array1<T>) {
        let idx = m - 1 - k;
        let s2 = sigma2_asc[idx].min(T::one());
        let mut u = h.dot(&vecs_asc.column(idx));
        let norm = u.dot(&u).sqrt();
        u.mapv_inplace(|x| x / norm);
        (T::one() - s2, u)
    };

    let (_, mut u0) = lift(0);
    if u0.sum() < T::zero() {
        u0.mapv_inplace(|x| -x);
    }
    let lifted = r.min(nonzero - 1);
    let mut lambda = Vec::with_capacity(r);
    let mut vectors = Array2::zeros((hg.node_count(), r));
    for k in 1..=lifted {
        let (l, u) = lift(k);
        lambda.push(l);
        vectors.column_mut(k - 1).assign(&u);
    }
    if let RankPolicy::Complete { seed } = policy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in lifted..r {
            let v = random_complement_vector(&mut rng, &u0, &vectors, c);
            vectors.column_mut(c).assign(&v);
            lambda.push(T::one());
        }
    }
    polish(&u0, &mut vectors);

    let lambda = Array1::from(lambda);
    if lambda[0] <= cast(BASIS_TOL) {
        return Err(Error::NumericallyDisconnected {
            lambda1: lambda[0].to_f64().unwrap_or(f64::NAN),
        });
    }
    let residuals = residual_norms(&h, &vectors, &lambda);
    SpectralBasis::from_parts(u0, lambda, vectors, BASIS_TOL, residuals)
}

/// Random unit vector orthogonal to `u0` and the first `filled` columns.
fn random_complement_vector<T: Scalar>(
    rng: &mut ChaCha8Rng,
    u0: &Array1<T>,
    vectors: &Array2<T>,
    filled: usize,
) -> Array1<T> {
    loop {
        let mut v = Array1::from_iter((0..u0.len()).map(|_| cast::<T>(rng.gen_range(-1.0..1.0))));
        for _ in 0..2 {
            let c = u0.dot(&v);
            v.scaled_add(-c, u0);
            for q in vectors.slice(s![.., ..filled]).axis_iter(Axis(1)) {
                let c = q.dot(&v);
                v.scaled_add(-c, &q);
            }
        }
        let norm = v.dot(&v).sqrt();
        if norm > cast(1e-6) {
            return v.mapv(|x| x / norm);
        }
    }
}

/// One modified Gram–Schmidt pass of the columns against `u0` and each other.
fn polish<T: Scalar>(u0: &Array1<T>, vectors: &mut Array2<T>) {
    for c in 0..vectors.ncols() {
        let mut v = vectors.column(c).to_owned();
        let p = u0.dot(&v);
        v.scaled_add(-p, u0);
        for q in 0..c {
            let col = vectors.column(q);
            let p = col.dot(&v);
            v.scaled_add(-p, &col);
        }
        let norm = v.dot(&v).sqrt();
        vectors.column_mut(c).assign(&v.mapv(|x| x / norm));
    }
}

fn residual_norms<T: Scalar>(h: &Array2<T>, u: &Array2<T>, lambda: &Array1<T>) -> Vec<T> {
    let hu = h.dot(&h.t().dot(u));
    (0..u.ncols())
        .map(|c| {
            let mut res = u.column(c).to_owned();
            res -= &hu.column(c);
            res.scaled_add(-lambda[c], &u.column(c));
            res.dot(&res).sqrt()
        })
        .collect()
}
