//! Eigensolvers: thick-restart Lanczos for the informative Laplacian
//! eigenpairs, a dense QL solver for small projected problems, and an
//! independent Jacobi oracle.

mod basis;
mod dense;
mod jacobi;
mod krylov;

pub use basis::{spectral_basis, spectral_basis_with_stats, SolveStats, SpectralBasis};
pub use dense::symmetric_eigen;
pub use jacobi::{dense_eig_oracle, ORACLE_LIMIT};
pub use krylov::{largest_eigenpairs, EigenPairs};

use crate::error::{Error, Result};

/// Settings for [`largest_eigenpairs`] and [`spectral_basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct EigSolveConfig {
    /// Relative residual tolerance, `|M v - mu v| <= tol * max(1, |mu|)`.
    pub tol: f64,
    /// Krylov subspace dimension; `None` means `max(2r + 10, 40)`.
    pub max_subspace: Option<usize>,
    pub max_restarts: usize,
    pub seed: u64,
}

impl EigSolveConfig {
    /// Defaults for explicit sparse graphs.
    pub fn sparse() -> Self {
        Self {
            tol: 1e-8,
            max_subspace: None,
            max_restarts: 200,
            seed: 0,
        }
    }

    /// Defaults for Gaussian point clouds.
    pub fn point_cloud() -> Self {
        Self {
            tol: 1e-3,
            ..Self::sparse()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub(crate) fn subspace_size(&self, r: usize) -> usize {
        self.max_subspace.unwrap_or_else(|| (2 * r + 10).max(40))
    }

    pub(crate) fn validate(&self, r: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eigensolver tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.subspace_size(r) <= r {
            return Err(Error::InvalidArgument(format!(
                "Krylov subspace size {} must exceed the rank {r}",
                self.subspace_size(r)
            )));
        }
        Ok(())
    }
}

impl Default for EigSolveConfig {
    fn default() -> Self {
        Self::sparse()
    }
}
