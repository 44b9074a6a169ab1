//! First-layer input storage: dense, or compressed sparse rows when most
//! entries are zero, as for one-hot incidence features.

use ndarray::{Array2, ArrayView2};

use crate::scalar::Scalar;

/// Inputs with at most this fraction of nonzeros are stored sparse.
pub const SPARSE_DENSITY: f64 = 0.25;

#[derive(Debug, Clone)]
pub(crate) enum Features<T> {
    Dense(Array2<T>),
    Sparse(Csr<T>),
}

impl<T: Scalar> Features<T> {
    pub(crate) fn new(x: ArrayView2<'_, T>) -> Self {
        let nnz = x.iter().filter(|&&v| v != T::zero()).count();
        if (nnz as f64) <= SPARSE_DENSITY * x.len() as f64 {
            Features::Sparse(Csr::from_dense(x))
        } else {
            Features::Dense(x.to_owned())
        }
    }

    pub(crate) fn dim(&self) -> (usize, usize) {
        match self {
            Features::Dense(x) => x.dim(),
            Features::Sparse(c) => (c.indptr.len() - 1, c.ncols),
        }
    }

    pub(crate) fn is_sparse(&self) -> bool {
        matches!(self, Features::Sparse(_))
    }

    pub(crate) fn to_dense(&self) -> Array2<T> {
        match self {
            Features::Dense(x) => x.clone(),
            Features::Sparse(c) => {
                let mut out = Array2::zeros(self.dim());
                for i in 0..c.indptr.len() - 1 {
                    for k in c.indptr[i]..c.indptr[i + 1] {
                        out[[i, c.indices[k]]] = c.values[k];
                    }
                }
                out
            }
        }
    }

    /// `X W`.
    pub(crate) fn dot(&self, w: ArrayView2<'_, T>) -> Array2<T> {
        match self {
            Features::Dense(x) => x.dot(&w),
            Features::Sparse(c) => c.dot(w),
        }
    }

    /// `X^T G`.
    pub(crate) fn t_dot(&self, g: ArrayView2<'_, T>) -> Array2<T> {
        match self {
            Features::Dense(x) => x.t().dot(&g),
            Features::Sparse(c) => c.t_dot(g),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Csr<T> {
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

fn axpy<T: Scalar>(out: &mut [T], a: T, x: &[T]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += a * v;
    }
}

impl<T: Scalar> Csr<T> {
    fn from_dense(x: ArrayView2<'_, T>) -> Self {
        let mut indptr = Vec::with_capacity(x.nrows() + 1);
        let (mut indices, mut values) = (Vec::new(), Vec::new());
        indptr.push(0);
        for row in x.rows() {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            ncols: x.ncols(),
            indptr,
            indices,
            values,
        }
    }

    fn dot(&self, w: ArrayView2<'_, T>) -> Array2<T> {
        let w = w.as_standard_layout();
        let h = w.ncols();
        let ws = w.as_slice().expect("standard layout");
        let mut out = Array2::zeros((self.indptr.len() - 1, h));
        let os = out.as_slice_mut().expect("fresh array");
        for (i, orow) in os
            .chunks_exact_mut(h.max(1))
            .enumerate()
            .take(self.indptr.len() - 1)
        {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                axpy(orow, self.values[k], &ws[j * h..(j + 1) * h]);
            }
        }
        out
    }

    fn t_dot(&self, g: ArrayView2<'_, T>) -> Array2<T> {
        let g = g.as_standard_layout();
        let h = g.ncols();
        let gs = g.as_slice().expect("standard layout");
        let mut out = Array2::zeros((self.ncols, h));
        let os = out.as_slice_mut().expect("fresh array");
        for i in 0..self.indptr.len() - 1 {
            let grow = &gs[i * h..(i + 1) * h];
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                axpy(&mut os[j * h..(j + 1) * h], self.values[k], grow);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sparse_products_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = Array2::<f64>::from_shape_fn((30, 12), |_| {
            if rng.gen::<f64>() < 0.15 {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        let w = Array2::from_shape_fn((12, 5), |_| rng.gen_range(-1.0..1.0));
        let g = Array2::from_shape_fn((30, 5), |_| rng.gen_range(-1.0..1.0));
        let f = Features::new(x.view());
        assert!(f.is_sparse());
        assert_eq!(f.to_dense(), x);
        assert!((f.dot(w.view()) - x.dot(&w))
            .iter()
            .all(|d| d.abs() < 1e-14));
        let wt = w.t().to_owned();
        assert!((f.dot(wt.t()) - x.dot(&w)).iter().all(|d| d.abs() < 1e-14));
        assert!((f.t_dot(g.view()) - x.t().dot(&g))
            .iter()
            .all(|d| d.abs() < 1e-14));
    }

    #[test]
    fn dense_inputs_stay_dense() {
        let x = Array2::<f64>::from_elem((4, 3), 1.0);
        let f = Features::new(x.view());
        assert!(!f.is_sparse());
        assert_eq!(f.dim(), (4, 3));
    }
}
