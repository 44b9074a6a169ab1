//! The three-part pseudoinverse filter basis: zero-impulse `K1 = u0 u0^T`,
//! low-rank pseudoinverse `K2 = lambda_1 U_r Lambda_r^{-1} U_r^T` and
//! high-pass `K3 = lambda_1 (I - u0 u0^T - U_r U_r^T)`, all applied in
//! factored form at `O(n r c)` cost.

use std::fmt::Write as _;

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::eigen::SpectralBasis;
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Largest `n` for [`FilterBank::dense_conv_matrix`].
pub const DENSE_CONV_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterPart {
    ZeroImpulse,
    Pseudoinverse,
    HighPass,
}

impl FilterPart {
    pub const ALL: [FilterPart; 3] = [
        FilterPart::ZeroImpulse,
        FilterPart::Pseudoinverse,
        FilterPart::HighPass,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Filter response `phi(lambda)`: `alpha` at zero, `lambda_1 beta / lambda`
/// up to `lambda_r`, `lambda_1 gamma` beyond.
pub fn filter_value<T: Scalar>(
    alpha: T,
    beta: T,
    gamma: T,
    basis: &SpectralBasis<T>,
    lambda: T,
) -> T {
    let lambda_1 = basis.eigengap();
    let lambda_r = basis.lambda()[basis.rank() - 1];
    if lambda == T::zero() {
        alpha
    } else if lambda <= lambda_r {
        lambda_1 * beta / lambda
    } else {
        lambda_1 * gamma
    }
}

/// `u0^T X` (`1 x c`) and `U_r^T X` (`r x c`): all the three filters need
/// from `X` besides `X` itself.
#[derive(Debug, Clone)]
pub struct Projection<T> {
    pub p0: Array2<T>,
    pub pr: Array2<T>,
}

/// Factored convolution matrices built on a [`SpectralBasis`].
#[derive(Debug, Clone)]
pub struct FilterBank<T> {
    basis: SpectralBasis<T>,
    scaling: Array1<T>,
}

impl<T: Scalar> FilterBank<T> {
    pub fn new(basis: SpectralBasis<T>) -> Self {
        let lambda_1 = basis.eigengap();
        let scaling = basis.lambda().mapv(|l| lambda_1 / l);
        Self { basis, scaling }
    }

    pub fn basis(&self) -> &SpectralBasis<T> {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn eigengap(&self) -> T {
        self.basis.eigengap()
    }

    /// `lambda_1 / lambda_i`, first entry exactly one.
    pub fn scaling(&self) -> &Array1<T> {
        &self.scaling
    }

    /// `u0^T X` and `U_r^T X`.
    pub fn project(&self, x: ArrayView2<'_, T>) -> Result<Projection<T>> {
        check_dim("filter input rows", self.n(), x.nrows())?;
        Ok(Projection {
            p0: self.basis.u0().view().insert_axis(Axis(0)).dot(&x),
            pr: self.basis.vectors().t().dot(&x),
        })
    }

    /// Same as [`project`](Self::project) for an `x` that vanishes outside
    /// `rows`, touching only those rows.
    pub fn project_rows(&self, x: ArrayView2<'_, T>, rows: &[usize]) -> Result<Projection<T>> {
        check_dim("filter input rows", self.n(), x.nrows())?;
        let xs = x.select(Axis(0), rows);
        let u0 = self.basis.u0().select(Axis(0), rows);
        let u = self.basis.vectors().select(Axis(0), rows);
        Ok(Projection {
            p0: u0.insert_axis(Axis(0)).dot(&xs),
            pr: u.t().dot(&xs),
        })
    }

    fn outer_u0(&self, p0: &Array2<T>) -> Array2<T> {
        self.basis.u0().view().insert_axis(Axis(1)).dot(p0)
    }

    /// `K^(k) X` for one part.
    pub fn conv_apply(&self, part: FilterPart, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        let proj = self.project(x)?;
        Ok(self.assemble(part, x, &proj))
    }

    /// `[K1 X, K2 X, K3 X]`, sharing the projections.
    pub fn conv_all(&self, x: ArrayView2<'_, T>) -> Result<[Array2<T>; 3]> {
        let proj = self.project(x)?;
        Ok(FilterPart::ALL.map(|part| self.assemble(part, x, &proj)))
    }

    fn assemble(&self, part: FilterPart, x: ArrayView2<'_, T>, proj: &Projection<T>) -> Array2<T> {
        let u = self.basis.vectors();
        match part {
            FilterPart::ZeroImpulse => self.outer_u0(&proj.p0),
            FilterPart::Pseudoinverse => {
                let scaled = &proj.pr * &self.scaling.view().insert_axis(Axis(1));
                u.dot(&scaled)
            }
            FilterPart::HighPass => {
                let mut y = x.to_owned();
                y -= &self.outer_u0(&proj.p0);
                y -= &u.dot(&proj.pr);
                y *= self.eigengap();
                y
            }
        }
    }

    /// `sum_k K^(k) X W_k` evaluated as
    /// `u0 (p0 W1 - l1 p0 W3) + U_r (S pr W2 - l1 pr W3) + l1 X W3`
    /// with `(p0, pr)` the projection of `X`, `S = diag(lambda_1 / lambda_i)`
    /// and `l1 = lambda_1`.
    pub fn feature_map(
        &self,
        x: ArrayView2<'_, T>,
        w1: ArrayView2<'_, T>,
        w2: ArrayView2<'_, T>,
        w3: ArrayView2<'_, T>,
    ) -> Result<Array2<T>> {
        check_dim("feature map weight rows", x.ncols(), w3.nrows())?;
        let proj = self.project(x)?;
        self.combine(x.dot(&w3), &proj, w1, w2, w3)
    }

    /// [`feature_map`](Self::feature_map) from precomputed `X W3` and
    /// projection of `X`.
    pub fn combine(
        &self,
        xw3: Array2<T>,
        proj: &Projection<T>,
        w1: ArrayView2<'_, T>,
        w2: ArrayView2<'_, T>,
        w3: ArrayView2<'_, T>,
    ) -> Result<Array2<T>> {
        check_dim("feature map rows", self.n(), xw3.nrows())?;
        let (zero_part, low_part) = self.mixing(proj, w1, w2, w3, xw3.ncols())?;
        let mut y = xw3;
        let u0 = self.basis.u0().view().insert_axis(Axis(1));
        general_mat_mul(T::one(), &u0, &zero_part, self.eigengap(), &mut y);
        general_mat_mul(T::one(), self.basis.vectors(), &low_part, T::one(), &mut y);
        Ok(y)
    }

    /// Rows `rows` of [`combine`](Self::combine), given those rows of `X W3`.
    pub fn combine_rows(
        &self,
        xw3_rows: Array2<T>,
        proj: &Projection<T>,
        w1: ArrayView2<'_, T>,
        w2: ArrayView2<'_, T>,
        w3: ArrayView2<'_, T>,
        rows: &[usize],
    ) -> Result<Array2<T>> {
        check_dim("feature map rows", rows.len(), xw3_rows.nrows())?;
        let (zero_part, low_part) = self.mixing(proj, w1, w2, w3, xw3_rows.ncols())?;
        let u0 = self.basis.u0().select(Axis(0), rows);
        let u = self.basis.vectors().select(Axis(0), rows);
        let mut y = xw3_rows;
        y *= self.eigengap();
        y += &u0.insert_axis(Axis(1)).dot(&zero_part);
        y += &u.dot(&low_part);
        Ok(y)
    }

    /// Coefficients on `u0` and `U_r`: `p0 W1 - l1 p0 W3` and
    /// `S pr W2 - l1 pr W3`.
    fn mixing(
        &self,
        proj: &Projection<T>,
        w1: ArrayView2<'_, T>,
        w2: ArrayView2<'_, T>,
        w3: ArrayView2<'_, T>,
        out: usize,
    ) -> Result<(Array2<T>, Array2<T>)> {
        let c = proj.p0.ncols();
        for w in [&w1, &w2, &w3] {
            check_dim("feature map weight rows", c, w.nrows())?;
            check_dim("feature map weight columns", out, w.ncols())?;
        }
        let l1 = self.eigengap();
        let mut zero_part = proj.p0.dot(&w1);
        zero_part.scaled_add(-l1, &proj.p0.dot(&w3));
        let mut low_part = (&proj.pr * &self.scaling.view().insert_axis(Axis(1))).dot(&w2);
        low_part.scaled_add(-l1, &proj.pr.dot(&w3));
        Ok((zero_part, low_part))
    }

    /// `[X^T K^(k) G]` for the three parts, from `X^T G` and both projections.
    pub fn adjoint_weights(
        &self,
        xt_g: Array2<T>,
        px: &Projection<T>,
        pg: &Projection<T>,
    ) -> [Array2<T>; 3] {
        let l1 = self.eigengap();
        let zero = px.p0.t().dot(&pg.p0);
        let low = px.pr.t().dot(&pg.pr);
        let scaled = (&px.pr * &self.scaling.view().insert_axis(Axis(1)))
            .t()
            .dot(&pg.pr);
        let mut high = xt_g;
        high -= &zero;
        high -= &low;
        high *= l1;
        [zero, scaled, high]
    }

    /// Explicit `K^(k)`; for tests and small problems only.
    pub fn dense_conv_matrix(&self, part: FilterPart) -> Result<Array2<T>> {
        let n = self.n();
        if n > DENSE_CONV_LIMIT {
            return Err(Error::ScaleGuard {
                n,
                limit: DENSE_CONV_LIMIT,
            });
        }
        self.conv_apply(part, Array2::eye(n).view())
    }

    /// Two-column CSV `lambda,phi` sampling [`filter_value`] on `points`
    /// equispaced values in `[0, 2]`.
    pub fn response_csv(&self, alpha: T, beta: T, gamma: T, points: usize) -> String {
        let mut out = String::from("lambda,phi\n");
        let steps = points.max(2) - 1;
        for i in 0..=steps {
            let lambda = T::from_f64(2.0 * i as f64 / steps as f64).expect("finite");
            let phi = filter_value(alpha, beta, gamma, &self.basis, lambda);
            let _ = writeln!(out, "{lambda},{phi}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{spectral_basis, EigSolveConfig};
    use crate::graph::{NormalizedAdjacency, SparseGraph};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bank(n: usize, r: usize, seed: u64) -> FilterBank<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
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
        let g = SparseGraph::from_edges(n, &edges).unwrap();
        let op = NormalizedAdjacency::new(&g).unwrap();
        FilterBank::new(spectral_basis(&op, r, &EigSolveConfig::sparse().with_tol(1e-12)).unwrap())
    }

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn filter_values() {
        let bank = random_bank(30, 4, 1);
        let b = bank.basis();
        let l1 = b.eigengap();
        let lr = b.lambda()[3];
        assert_eq!(filter_value(1.0, 1.0, 1.0, b, l1), 1.0);
        assert_eq!(filter_value(0.7, 1.0, 1.0, b, 0.0), 0.7);
        assert!((filter_value(0.0, 1.0, 0.0, b, lr / 2.0) - 2.0 * l1 / lr).abs() < 1e-15);
        assert_eq!(filter_value(0.0, 0.0, 3.0, b, 1.99), 3.0 * l1);
        assert_eq!(bank.scaling()[0], 1.0);
        assert!(bank.scaling().iter().all(|&s| s > 0.0 && s <= 1.0));
    }

    #[test]
    fn trivial_actions() {
        let bank = random_bank(30, 4, 2);
        let u0 = bank.basis().u0().clone().insert_axis(Axis(1));
        let [k1, k2, k3] = bank.conv_all(u0.view()).unwrap();
        assert!(max_abs(&(&k1 - &u0)) < 1e-12);
        assert!(max_abs(&k2) < 1e-10 && max_abs(&k3) < 1e-10);

        let u1 = bank
            .basis()
            .vectors()
            .column(0)
            .to_owned()
            .insert_axis(Axis(1));
        let [k1, k2, k3] = bank.conv_all(u1.view()).unwrap();
        assert!(max_abs(&k1) < 1e-10 && max_abs(&k3) < 1e-10);
        assert!(max_abs(&(&k2 - &u1)) < 1e-12);
    }

    #[test]
    fn feature_map_examples() {
        let bank = random_bank(40, 5, 3);
        let eye = Array2::<f64>::eye(1);
        let zero = Array2::<f64>::zeros((1, 1));
        let u0 = bank.basis().u0().clone().insert_axis(Axis(1));
        let y = bank
            .feature_map(u0.view(), eye.view(), eye.view(), eye.view())
            .unwrap();
        assert!(max_abs(&(&y - &u0)) < 1e-10);

        // High-pass vector: orthogonal to u0 and U_r.
        let k3 = bank
            .conv_apply(FilterPart::HighPass, Array2::from_elem((40, 1), 1.0).view())
            .unwrap();
        let x = &k3 / bank.eigengap();
        let y = bank
            .feature_map(x.view(), zero.view(), zero.view(), eye.view())
            .unwrap();
        assert!(max_abs(&(&y - &(&x * bank.eigengap()))) < 1e-12);
    }

    #[test]
    fn dense_matrices_resolve_identity() {
        let bank = random_bank(25, 3, 4);
        let k1 = bank.dense_conv_matrix(FilterPart::ZeroImpulse).unwrap();
        let k3 = bank.dense_conv_matrix(FilterPart::HighPass).unwrap();
        assert!((k1.diag().sum() - 1.0).abs() < 1e-12);
        let u = bank.basis().vectors();
        let sum = &k3 / bank.eigengap() + &k1 + u.dot(&u.t());
        assert!(max_abs(&(sum - Array2::<f64>::eye(25))) < 1e-12);
    }

    #[test]
    fn response_csv_shape() {
        let bank = random_bank(20, 2, 5);
        let csv = bank.response_csv(1.0, 1.0, 0.5, 11);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 12);
        assert_eq!(lines[0], "lambda,phi");
        assert_eq!(lines[1], "0,1");
        assert!(lines[11].starts_with("2,"));
    }

    #[test]
    fn dimension_mismatch() {
        let bank = random_bank(20, 2, 6);
        let x = Array2::<f64>::zeros((19, 2));
        assert!(bank.conv_apply(FilterPart::ZeroImpulse, x.view()).is_err());
        let x = Array2::<f64>::zeros((20, 2));
        let w = Array2::<f64>::zeros((3, 2));
        assert!(bank
            .feature_map(x.view(), w.view(), w.view(), w.view())
            .is_err());
    }

    #[test]
    fn adjoint_weights_match_explicit_products() {
        let bank = random_bank(35, 4, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = Array2::from_shape_fn((35, 3), |_| rng.gen_range(-1.0..1.0));
        let g = Array2::from_shape_fn((35, 2), |_| rng.gen_range(-1.0..1.0));
        let grads = bank.adjoint_weights(
            x.t().dot(&g),
            &bank.project(x.view()).unwrap(),
            &bank.project(g.view()).unwrap(),
        );
        let kg = bank.conv_all(g.view()).unwrap();
        for k in 0..3 {
            assert!(max_abs(&(&grads[k] - &x.t().dot(&kg[k]))) < 1e-12);
        }
    }

    #[test]
    fn row_projection_of_row_sparse_input() {
        let bank = random_bank(30, 3, 8);
        let rows = [2, 11, 29];
        let mut x = Array2::<f64>::zeros((30, 2));
        for (k, &i) in rows.iter().enumerate() {
            x[[i, 0]] = k as f64 + 1.0;
            x[[i, 1]] = -0.5;
        }
        let full = bank.project(x.view()).unwrap();
        let part = bank.project_rows(x.view(), &rows).unwrap();
        assert!(max_abs(&(&full.p0 - &part.p0)) < 1e-14);
        assert!(max_abs(&(&full.pr - &part.pr)) < 1e-14);
    }
}
