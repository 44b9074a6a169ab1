//! Graph representations and matrix-free application of the normalized
//! adjacency `D^{-1/2} A D^{-1/2}` and of the deflated signless Laplacian.
//!
//! Two adjacency sources are supported: an explicit [`SparseGraph`] in CSR
//! layout, and a [`GaussianCloud`] whose fully connected kernel adjacency is
//! recomputed block by block and never stored.

mod cloud;
mod operator;
mod sparse;

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use cloud::{GaussianCloud, DEFAULT_BLOCK_SIZE};
pub use operator::{
    unit_degree_vector, DeflatedSignless, DenseOperator, NormalizedAdjacency, SymmetricOperator,
};
pub use sparse::{connected_components, connectivity_check, SparseGraph};

/// Symmetric nonnegative adjacency with zero diagonal, applied matrix-free.
pub trait Adjacency<T: Scalar>: Sync {
    /// Node count.
    fn node_count(&self) -> usize;

    /// Returns `A X` for an `n x c` block `X`.
    fn adjacency_apply(&self, x: ArrayView2<'_, T>) -> Array2<T>;

    /// Row sums of `A`, without validation.
    fn row_sums(&self) -> Array1<T>;
}

/// Node degrees `d_i = sum_j A_ij`, rejecting isolated nodes.
pub fn degrees<T: Scalar, G: Adjacency<T> + ?Sized>(graph: &G) -> Result<Array1<T>> {
    let d = graph.row_sums();
    if let Some(node) = d.iter().position(|&v| !(v > T::zero())) {
        return Err(Error::IsolatedNode { node });
    }
    Ok(d)
}
