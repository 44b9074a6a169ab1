//! Thick-restart Lanczos (the symmetric Krylov–Schur method) with full
//! reorthogonalization.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::symmetric_eigen;
use super::EigSolveConfig;
use crate::error::{Error, Result};
use crate::graph::SymmetricOperator;
use crate::scalar::{cast, Scalar};

/// Converged extremal eigenpairs.
#[derive(Debug, Clone)]
pub struct EigenPairs<T> {
    /// Eigenvalues, descending.
    pub values: Array1<T>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: Array2<T>,
    /// Relative residuals `|M v - mu v| / max(1, |mu|)`, measured explicitly.
    pub residuals: Vec<T>,
    pub restarts: usize,
    pub matvecs: usize,
}

/// The `r` largest eigenpairs of a symmetric operator.
///
/// When `orthogonal_to` is given the iteration is confined to its orthogonal
/// complement (the vector is assumed to have unit norm); the start vector is
/// seeded uniform random noise projected accordingly.
pub fn largest_eigenpairs<T, Op>(
    op: &Op,
    r: usize,
    cfg: &EigSolveConfig,
    orthogonal_to: Option<ArrayView1<'_, T>>,
) -> Result<EigenPairs<T>>
where
    T: Scalar,
    Op: SymmetricOperator<T> + ?Sized,
{
    let n = op.dim();
    let n_eff = n - usize::from(orthogonal_to.is_some());
    if r == 0 {
        return Err(Error::InvalidArgument("rank must be at least 1".into()));
    }
    if r >= n || r > n_eff {
        return Err(Error::RankTooLarge {
            rank: r,
            max: n_eff.min(n - 1),
        });
    }
    cfg.validate(r)?;

    let m = cfg.subspace_size(r).min(n_eff);
    // Ritz vectors carried over a restart: the wanted ones plus a quarter more.
    let keep = (r + r.div_ceil(4)).min(m.saturating_sub(1)).max(r.min(m));
    let tol: T = cast(cfg.tol);

    let mut solver = Lanczos {
        op,
        n,
        locked: orthogonal_to.map(|u| u.to_owned()),
        basis: Vec::with_capacity(m + 1),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        matvecs: 0,
    };

    let mut proj = Array2::<T>::zeros((m, m));
    let mut coupling: Vec<T> = Vec::new();
    let mut next = solver.random_orthogonal_vector();
    let mut restarts = 0;

    loop {
        let k = coupling.len();
        solver.basis.truncate(k);
        // Projected matrix: diagonal Ritz block, arrow row, then tridiagonal.
        for i in k..m {
            for j in 0..m {
                proj[[i, j]] = T::zero();
                proj[[j, i]] = T::zero();
            }
        }
        for (i, &b) in coupling.iter().enumerate() {
            proj[[i, k]] = b;
            proj[[k, i]] = b;
        }

        let (size, last_beta, residual) = solver.expand(&mut proj, next, k, m);
        let t = proj.slice(ndarray::s![0..size, 0..size]).to_owned();
        let (asc_vals, asc_vecs) = symmetric_eigen(&t);
        let theta: Vec<T> = asc_vals.iter().rev().copied().collect();
        let svecs = asc_vecs.slice(ndarray::s![.., ..;-1]).to_owned();

        let exhausted = size == n_eff || size < m;
        let estimates: Vec<T> = (0..r)
            .map(|i| (last_beta * svecs[[size - 1, i]]).abs() / theta[i].abs().max(T::one()))
            .collect();
        let estimated_ok = estimates.iter().all(|&e| e <= tol);

        if estimated_ok || exhausted {
            let ritz = solver.combine(&svecs, r);
            let values = Array1::from_iter(theta[..r].iter().copied());
            let residuals = solver.residuals(&ritz, &values);
            if residuals.iter().all(|&e| e <= tol) || exhausted {
                return Ok(EigenPairs {
                    values,
                    vectors: ritz,
                    residuals,
                    restarts,
                    matvecs: solver.matvecs,
                });
            }
        }

        if restarts >= cfg.max_restarts {
            let residuals: Vec<f64> = estimates
                .iter()
                .map(|e| e.to_f64().unwrap_or(f64::NAN))
                .collect();
            return Err(Error::NoConvergence {
                restarts,
                worst_residual: residuals.iter().cloned().fold(0.0, f64::max),
                residuals,
            });
        }
        restarts += 1;

        let kept = solver.combine(&svecs, keep);
        solver.basis.clear();
        solver
            .basis
            .extend(kept.axis_iter(Axis(1)).map(|c| c.to_owned()));
        for i in 0..keep {
            for j in 0..m {
                proj[[i, j]] = T::zero();
            }
            proj[[i, i]] = theta[i];
        }
        match residual {
            Some(v) => {
                coupling = (0..keep)
                    .map(|i| last_beta * svecs[[size - 1, i]])
                    .collect();
                next = v;
            }
            None => {
                coupling = vec![T::zero(); keep];
                next = solver.random_orthogonal_vector();
            }
        }
    }
}

struct Lanczos<'a, T: Scalar, Op: ?Sized> {
    op: &'a Op,
    n: usize,
    locked: Option<Array1<T>>,
    basis: Vec<Array1<T>>,
    rng: ChaCha8Rng,
    matvecs: usize,
}

impl<T: Scalar, Op: SymmetricOperator<T> + ?Sized> Lanczos<'_, T, Op> {
    fn apply_basis(&mut self, j: usize) -> Array1<T> {
        self.matvecs += 1;
        self.op
            .apply(self.basis[j].view().insert_axis(Axis(1)))
            .index_axis_move(Axis(1), 0)
    }

    /// Two passes of classical Gram–Schmidt against the locked vector and
    /// the current basis.
    fn orthogonalize(&self, w: &mut Array1<T>) {
        for _ in 0..2 {
            if let Some(u) = &self.locked {
                let c = u.dot(w);
                w.scaled_add(-c, u);
            }
            for q in &self.basis {
                let c = q.dot(w);
                w.scaled_add(-c, q);
            }
        }
    }

    fn random_orthogonal_vector(&mut self) -> Array1<T> {
        for _ in 0..8 {
            let mut v =
                Array1::from_iter((0..self.n).map(|_| cast::<T>(self.rng.gen_range(-1.0..1.0))));
            self.orthogonalize(&mut v);
            let norm = v.dot(&v).sqrt();
            if norm > cast(1e-8) {
                v.mapv_inplace(|x| x / norm);
                return v;
            }
        }
        Array1::zeros(self.n)
    }

    /// Extends the basis from `k` to at most `m` vectors, writing the
    /// Rayleigh quotient into `proj`. Returns the basis size reached, the
    /// final residual norm, and the normalized residual direction.
    fn expand(
        &mut self,
        proj: &mut Array2<T>,
        start: Array1<T>,
        k: usize,
        m: usize,
    ) -> (usize, T, Option<Array1<T>>) {
        self.basis.push(start);
        let mut j = k;
        loop {
            let mut w = self.apply_basis(j);
            proj[[j, j]] = self.basis[j].dot(&w);
            self.orthogonalize(&mut w);
            let beta = w.dot(&w).sqrt();
            let scale = proj[[j, j]].abs().max(T::one());
            let breakdown = beta <= cast::<T>(1e-10) * scale;

            if j + 1 == m {
                if breakdown {
                    return (m, T::zero(), None);
                }
                w.mapv_inplace(|x| x / beta);
                return (m, beta, Some(w));
            }

            let next = if breakdown {
                // Invariant subspace: continue with a fresh direction.
                let v = self.random_orthogonal_vector();
                if v.iter().all(|&x| x == T::zero()) {
                    return (j + 1, T::zero(), None);
                }
                v
            } else {
                proj[[j, j + 1]] = beta;
                proj[[j + 1, j]] = beta;
                w.mapv_inplace(|x| x / beta);
                w
            };
            self.basis.push(next);
            j += 1;
        }
    }

    /// `V S[:, 0..count]` for the current basis.
    fn combine(&self, svecs: &Array2<T>, count: usize) -> Array2<T> {
        let mut out = Array2::zeros((self.n, count));
        for (i, q) in self.basis.iter().enumerate().take(svecs.nrows()) {
            for c in 0..count {
                let coef = svecs[[i, c]];
                out.column_mut(c).scaled_add(coef, q);
            }
        }
        out
    }

    fn residuals(&mut self, vectors: &Array2<T>, values: &Array1<T>) -> Vec<T> {
        self.matvecs += vectors.ncols();
        let mv = self.op.apply(vectors.view());
        (0..vectors.ncols())
            .map(|c| {
                let mut r = mv.column(c).to_owned();
                r.scaled_add(-values[c], &vectors.column(c));
                r.dot(&r).sqrt() / values[c].abs().max(T::one())
            })
            .collect()
    }
}
