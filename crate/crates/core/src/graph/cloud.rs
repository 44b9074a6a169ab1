use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use super::Adjacency;
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Rows per kernel block when none is configured.
pub const DEFAULT_BLOCK_SIZE: usize = 256;

/// Fully connected graph over 3D points with weights
/// `A_ij = exp(-|x_i - x_j|^2 / sigma^2)` for `i != j` and `A_ii = 0`.
///
/// The adjacency is never materialized: products are computed in row blocks
/// of `block_size` rows whose kernel entries are recomputed on every call, so
/// memory stays at `O(n * block_size)`.
#[derive(Debug, Clone)]
pub struct GaussianCloud<T> {
    points: Array2<T>,
    sigma: T,
    block_size: usize,
}

impl<T: Scalar> GaussianCloud<T> {
    pub fn new(points: Array2<T>, sigma: T) -> Result<Self> {
        if points.ncols() != 3 {
            return Err(Error::InvalidCloud(format!(
                "points must have 3 coordinates, found {}",
                points.ncols()
            )));
        }
        if points.nrows() < 2 {
            return Err(Error::InvalidCloud(
                "at least two points are required".into(),
            ));
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidCloud(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if let Some(i) = points
            .rows()
            .into_iter()
            .position(|r| r.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidCloud(format!(
                "point {i} has non-finite coordinates"
            )));
        }

        let mut order: Vec<usize> = (0..points.nrows()).collect();
        let key = |i: usize| [points[[i, 0]], points[[i, 1]], points[[i, 2]]];
        order.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).expect("finite coordinates"));
        if let Some(w) = order.windows(2).find(|w| key(w[0]) == key(w[1])) {
            return Err(Error::InvalidCloud(format!(
                "points {} and {} coincide",
                w[0].min(w[1]),
                w[0].max(w[1])
            )));
        }

        Ok(Self {
            points,
            sigma,
            block_size: DEFAULT_BLOCK_SIZE,
        })
    }

    pub fn with_block_size(mut self, block_size: usize) -> Self {
        self.block_size = block_size.max(1);
        self
    }

    pub fn points(&self) -> &Array2<T> {
        &self.points
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Kernel rows `start..end` as a dense `(end - start) x n` block.
    fn kernel_rows(&self, start: usize, end: usize) -> Array2<T> {
        let n = self.points.nrows();
        let inv_s2 = (self.sigma * self.sigma).recip();
        let mut block = Array2::zeros((end - start, n));
        for (bi, mut row) in block.rows_mut().into_iter().enumerate() {
            let i = start + bi;
            let xi = self.points.row(i);
            for (j, out) in row.iter_mut().enumerate() {
                if j == i {
                    continue;
                }
                let xj = self.points.row(j);
                let dx = xi[0] - xj[0];
                let dy = xi[1] - xj[1];
                let dz = xi[2] - xj[2];
                *out = (-(dx * dx + dy * dy + dz * dz) * inv_s2).exp();
            }
        }
        block
    }

    fn block_ranges(&self) -> Vec<(usize, usize)> {
        let n = self.points.nrows();
        (0..n)
            .step_by(self.block_size)
            .map(|s| (s, (s + self.block_size).min(n)))
            .collect()
    }

    /// Explicit adjacency; only for oracle checks at small scale.
    pub fn to_dense(&self) -> Array2<T> {
        self.kernel_rows(0, self.points.nrows())
    }
}

impl<T: Scalar> Adjacency<T> for GaussianCloud<T> {
    fn node_count(&self) -> usize {
        self.points.nrows()
    }

    fn adjacency_apply(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let n = self.points.nrows();
        check_dim("gaussian adjacency apply", n, x.nrows()).expect("row count");
        let blocks: Vec<Array2<T>> = self
            .block_ranges()
            .into_par_iter()
            .map(|(s, e)| self.kernel_rows(s, e).dot(&x))
            .collect();
        let mut out = Array2::zeros((n, x.ncols()));
        for ((s, e), b) in self.block_ranges().into_iter().zip(blocks) {
            out.slice_mut(s![s..e, ..]).assign(&b);
        }
        out
    }

    fn row_sums(&self) -> Array1<T> {
        let parts: Vec<Array1<T>> = self
            .block_ranges()
            .into_par_iter()
            .map(|(s, e)| self.kernel_rows(s, e).sum_axis(Axis(1)))
            .collect();
        Array1::from_iter(parts.into_iter().flatten())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degrees;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, 3), |_| rng.gen_range(-2.0..2.0))
    }

    #[test]
    fn two_point_degrees() {
        let pts = array![[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]];
        let cloud = GaussianCloud::new(pts, 1.0).unwrap();
        let d = degrees(&cloud).unwrap();
        let e3 = (-3.0f64).exp();
        assert!((d[0] - e3).abs() < 1e-16 && (d[1] - e3).abs() < 1e-16);
    }

    #[test]
    fn degrees_match_dense_kernel_rows() {
        let pts = random_cloud(50, 1);
        // Oracle: explicit pairwise assembly.
        let mut dense = Array2::<f64>::zeros((50, 50));
        for i in 0..50 {
            for j in 0..50 {
                if i != j {
                    let d2: f64 = (0..3).map(|k| (pts[[i, k]] - pts[[j, k]]).powi(2)).sum();
                    dense[[i, j]] = (-d2 / 0.81).exp();
                }
            }
        }
        let cloud = GaussianCloud::new(pts, 0.9).unwrap().with_block_size(7);
        let d = degrees(&cloud).unwrap();
        for i in 0..50 {
            assert!((d[i] - dense.row(i).sum()).abs() < 1e-12);
        }
    }

    #[test]
    fn block_size_independence() {
        let pts = random_cloud(90, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = Array2::from_shape_fn((90, 3), |_| rng.gen_range(-1.0..1.0));
        let reference = GaussianCloud::new(pts.clone(), 1.3)
            .unwrap()
            .with_block_size(90)
            .adjacency_apply(x.view());
        let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for b in [1, 7, 64] {
            let out = GaussianCloud::new(pts.clone(), 1.3)
                .unwrap()
                .with_block_size(b)
                .adjacency_apply(x.view());
            let err = (&out - &reference)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(err <= 1e-12 * scale, "block {b}: {err}");
        }
    }

    #[test]
    fn rejects_invalid_clouds() {
        let one = GaussianCloud::new(array![[0.0, 0.0, 0.0]], 1.0);
        assert!(matches!(one, Err(Error::InvalidCloud(_))));
        let dup = GaussianCloud::new(
            array![[0.0, 1.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            1.0,
        );
        assert!(matches!(dup, Err(Error::InvalidCloud(_))));
        let sigma = GaussianCloud::new(array![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], 0.0);
        assert!(matches!(sigma, Err(Error::InvalidCloud(_))));
    }
}
