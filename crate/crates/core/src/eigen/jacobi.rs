//! Cyclic Jacobi eigensolver, the dense reference for oracle comparisons.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Largest dimension accepted by [`dense_eig_oracle`].
pub const ORACLE_LIMIT: usize = 500;

/// Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations, eigenvalues ascending with eigenvectors as columns.
///
/// Sweeps continue until the off-diagonal Frobenius norm drops below
/// `1e-12 * |M|_F`, followed by one polishing sweep.
pub fn dense_eig_oracle<T: Scalar>(m: &Array2<T>) -> Result<(Array1<T>, Array2<T>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "dense eigen oracle",
            expected: n,
            found: m.ncols(),
        });
    }
    if n > ORACLE_LIMIT {
        return Err(Error::ScaleGuard {
            n,
            limit: ORACLE_LIMIT,
        });
    }
    let mut a = m.clone();
    let mut v = Array2::eye(n);
    let fro = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    let target = cast::<T>(1e-12).max(T::unit_roundoff()) * fro;

    let off_norm = |a: &Array2<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[[i, j]] * a[[i, j]];
                }
            }
        }
        s.sqrt()
    };

    let mut polish = false;
    for _ in 0..100 {
        if off_norm(&a) <= target {
            if polish {
                break;
            }
            polish = true;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[[i, i]]
            .partial_cmp(&a[[j, j]])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    Ok((values, vectors))
}

fn rotate<T: Scalar>(a: &mut Array2<T>, v: &mut Array2<T>, p: usize, q: usize) {
    let apq = a[[p, q]];
    if apq == T::zero() {
        return;
    }
    let n = a.nrows();
    let one = T::one();
    let theta = (a[[q, q]] - a[[p, p]]) / (apq + apq);
    let sign = if theta < T::zero() { -one } else { one };
    let t = sign / (theta.abs() + (theta * theta + one).sqrt());
    let c = (t * t + one).sqrt().recip();
    let s = t * c;
    for k in 0..n {
        let (akp, akq) = (a[[k, p]], a[[k, q]]);
        a[[k, p]] = c * akp - s * akq;
        a[[k, q]] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[[p, k]], a[[q, k]]);
        a[[p, k]] = c * apk - s * aqk;
        a[[q, k]] = s * apk + c * aqk;
    }
    a[[p, q]] = T::zero();
    a[[q, p]] = T::zero();
    for k in 0..n {
        let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
        v[[k, p]] = c * vkp - s * vkq;
        v[[k, q]] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_diagonal() {
        let (w, _) = dense_eig_oracle(&Array2::<f64>::eye(5)).unwrap();
        assert!(w.iter().all(|&x| x == 1.0));
        let (w, _) =
            dense_eig_oracle(&array![[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]]).unwrap();
        assert_eq!(w.to_vec(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn reconstruction_of_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = Array2::from_shape_fn((50, 50), |_| rng.gen_range(-1.0..1.0));
        let m = &b + &b.t();
        let (w, v) = dense_eig_oracle(&m).unwrap();
        let rec = v.dot(&Array2::from_diag(&w)).dot(&v.t());
        let fro = |x: &Array2<f64>| x.iter().map(|y| y * y).sum::<f64>().sqrt();
        assert!(fro(&(&rec - &m)) <= 1e-10 * fro(&m));
    }

    #[test]
    fn scale_guard() {
        let big = Array2::<f64>::zeros((ORACLE_LIMIT + 1, ORACLE_LIMIT + 1));
        assert!(matches!(
            dense_eig_oracle(&big),
            Err(Error::ScaleGuard { .. })
        ));
    }
}
