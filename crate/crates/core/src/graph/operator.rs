use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{degrees, Adjacency};
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Symmetric linear operator applied to blocks of column vectors.
pub trait SymmetricOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    /// Returns `M X` for an `n x c` block.
    fn apply(&self, x: ArrayView2<'_, T>) -> Array2<T>;
}

/// Explicit symmetric matrix as an operator (tests and small problems).
#[derive(Debug, Clone)]
pub struct DenseOperator<T>(pub Array2<T>);

impl<T: Scalar> SymmetricOperator<T> for DenseOperator<T> {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        self.0.dot(&x)
    }
}

/// Unit eigenvector of the normalized adjacency to eigenvalue one:
/// `u0_i = sqrt(d_i) / |sqrt(d)|`.
pub fn unit_degree_vector<T: Scalar>(d: ArrayView1<'_, T>) -> Result<Array1<T>> {
    if let Some(node) = d.iter().position(|&v| !(v > T::zero())) {
        return Err(Error::IsolatedNode { node });
    }
    let mut u = d.mapv(T::sqrt);
    let norm = u.dot(&u).sqrt();
    u.mapv_inplace(|v| v / norm);
    Ok(u)
}

/// `D^{-1/2} A D^{-1/2}` for any adjacency source.
pub struct NormalizedAdjacency<'g, T: Scalar> {
    graph: &'g dyn Adjacency<T>,
    degrees: Array1<T>,
    inv_sqrt_degrees: Array1<T>,
}

impl<'g, T: Scalar> NormalizedAdjacency<'g, T> {
    pub fn new(graph: &'g dyn Adjacency<T>) -> Result<Self> {
        let degrees = degrees(graph)?;
        let inv_sqrt_degrees = degrees.mapv(|v| v.sqrt().recip());
        Ok(Self {
            graph,
            degrees,
            inv_sqrt_degrees,
        })
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &Array1<T> {
        &self.degrees
    }

    pub fn unit_degree_vector(&self) -> Array1<T> {
        unit_degree_vector(self.degrees.view()).expect("degrees validated at construction")
    }

    /// `Â X`, scaling rows before and after the adjacency product.
    pub fn apply(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        check_dim("normalized adjacency apply", self.dim(), x.nrows())?;
        let scale = self.inv_sqrt_degrees.view().insert_axis(Axis(1));
        let scaled = &x * &scale;
        let mut y = self.graph.adjacency_apply(scaled.view());
        y *= &scale;
        Ok(y)
    }

    /// `x + Â x - 2 u0 (u0^T x)`, the signless Laplacian `2I - L_sym` with the
    /// trivial eigenpair deflated to zero.
    pub fn deflated_signless_apply(
        &self,
        u0: ArrayView1<'_, T>,
        x: ArrayView2<'_, T>,
    ) -> Result<Array2<T>> {
        check_dim("deflated signless apply", self.dim(), u0.len())?;
        let mut y = self.apply(x)?;
        y += &x;
        let coeff = u0.dot(&x);
        let two = T::one() + T::one();
        for (mut row, &ui) in y.rows_mut().into_iter().zip(u0.iter()) {
            row.scaled_add(-two * ui, &coeff);
        }
        Ok(y)
    }

    /// Explicit `Â` via application to the identity; oracle use only.
    pub fn to_dense(&self) -> Array2<T> {
        self.apply(Array2::eye(self.dim()).view())
            .expect("square identity")
    }
}

/// Deflated signless operator bound to its trivial eigenvector, for the
/// Krylov eigensolver.
pub struct DeflatedSignless<'a, 'g, T: Scalar> {
    op: &'a NormalizedAdjacency<'g, T>,
    u0: Array1<T>,
}

impl<'a, 'g, T: Scalar> DeflatedSignless<'a, 'g, T> {
    pub fn new(op: &'a NormalizedAdjacency<'g, T>, u0: Array1<T>) -> Result<Self> {
        check_dim("deflated signless operator", op.dim(), u0.len())?;
        Ok(Self { op, u0 })
    }

    pub fn u0(&self) -> &Array1<T> {
        &self.u0
    }
}

impl<T: Scalar> SymmetricOperator<T> for DeflatedSignless<'_, '_, T> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        self.op
            .deflated_signless_apply(self.u0.view(), x)
            .expect("dimensions checked by caller")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GaussianCloud, SparseGraph};
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> SparseGraph<f64> {
        SparseGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> SparseGraph<f64> {
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        for i in 1..n {
            let j = rng.gen_range(0..i);
            seen.insert((j, i));
            edges.push((j, i, rng.gen_range(0.1..2.0)));
        }
        for _ in 0..2 * n {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b && seen.insert((a.min(b), a.max(b))) {
                edges.push((a, b, rng.gen_range(0.1..2.0)));
            }
        }
        SparseGraph::from_edges(n, &edges).unwrap()
    }

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn unit_degree_vector_examples() {
        let g = triangle();
        let op = NormalizedAdjacency::new(&g).unwrap();
        let u0 = op.unit_degree_vector();
        for v in u0.iter() {
            assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        let u = unit_degree_vector(array![1.0, 4.0].view()).unwrap();
        assert!((u[0] - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((u[1] - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            unit_degree_vector(array![1.0, 0.0].view()),
            Err(Error::IsolatedNode { node: 1 })
        ));
    }

    #[test]
    fn stationary_vector_of_random_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_graph(120, &mut rng);
        let op = NormalizedAdjacency::new(&g).unwrap();
        let u0 = op.unit_degree_vector().insert_axis(Axis(1));
        // Oracle: dense D^{-1/2} A D^{-1/2}.
        let a = g.to_dense();
        let d = a.sum_axis(Axis(1));
        let dense = Array2::from_shape_fn((120, 120), |(i, j)| a[[i, j]] / (d[i] * d[j]).sqrt());
        let r = &dense.dot(&u0) - &u0;
        assert!(r.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-10);
    }

    #[test]
    fn single_edge_swaps_basis_vectors() {
        let g = SparseGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let op = NormalizedAdjacency::new(&g).unwrap();
        let y = op.apply(array![[1.0], [0.0]].view()).unwrap();
        assert_eq!(y, array![[0.0], [1.0]]);
    }

    #[test]
    fn deflated_operator_examples() {
        let g = triangle();
        let op = NormalizedAdjacency::new(&g).unwrap();
        let u0 = op.unit_degree_vector();
        let y = op
            .deflated_signless_apply(u0.view(), u0.view().insert_axis(Axis(1)))
            .unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-15));
        let y = op
            .deflated_signless_apply(u0.view(), array![[1.0], [-1.0], [0.0]].view())
            .unwrap();
        let expected = array![[0.5], [-0.5], [0.0]];
        assert!(max_abs(&(&y - &expected)) < 1e-15);
    }

    #[test]
    fn deflated_operator_matches_dense_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(60, &mut rng);
        let op = NormalizedAdjacency::new(&g).unwrap();
        let u0 = op.unit_degree_vector();
        let m = op
            .deflated_signless_apply(u0.view(), Array2::eye(60).view())
            .unwrap();
        let a = g.to_dense();
        let d = a.sum_axis(Axis(1));
        let dense = Array2::from_shape_fn((60, 60), |(i, j)| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta + a[[i, j]] / (d[i] * d[j]).sqrt() - 2.0 * u0[i] * u0[j]
        });
        assert!(max_abs(&(&m - &dense)) < 1e-12);
    }

    #[test]
    fn cloud_apply_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Array2<f64> = Array2::from_shape_fn((100, 3), |_| rng.gen_range(0.0..3.0));
        let x = Array2::from_shape_fn((100, 4), |_| rng.gen_range(-1.0..1.0));
        let cloud = GaussianCloud::new(pts.clone(), 1.5)
            .unwrap()
            .with_block_size(33);
        let op = NormalizedAdjacency::new(&cloud).unwrap();
        let y = op.apply(x.view()).unwrap();

        let mut a = Array2::<f64>::zeros((100, 100));
        for i in 0..100 {
            for j in 0..100 {
                if i != j {
                    let d2: f64 = (0..3).map(|k| (pts[[i, k]] - pts[[j, k]]).powi(2)).sum();
                    a[[i, j]] = (-d2 / 2.25).exp();
                }
            }
        }
        let d = a.sum_axis(Axis(1));
        let dense = Array2::from_shape_fn((100, 100), |(i, j)| a[[i, j]] / (d[i] * d[j]).sqrt());
        let expected = dense.dot(&x);
        assert!(max_abs(&(&y - &expected)) <= 1e-11 * max_abs(&expected));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = triangle();
        let op = NormalizedAdjacency::new(&g).unwrap();
        assert!(matches!(
            op.apply(Array2::zeros((4, 1)).view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
