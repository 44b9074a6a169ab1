use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};

use super::features::Features;
use super::{ModelParams, Split};
use crate::error::{check_dim, Result};
use crate::filters::{FilterBank, Projection};
use crate::scalar::{from_usize, Scalar};

/// First-layer filter products `K_k X0`, cached in factored form: `X0`
/// with its projections onto `u0` and `U_r`. Each product is then a rank
/// `r + 1` correction of `X0`, so the first layer costs two `n x d x h`
/// products instead of one `n x 3d x h`.
#[derive(Debug, Clone)]
pub struct Precomputed<T> {
    x0: Features<T>,
    proj: Projection<T>,
}

impl<T: Scalar> Precomputed<T> {
    pub fn new(bank: &FilterBank<T>, x0: ArrayView2<'_, T>) -> Result<Self> {
        Ok(Self {
            proj: bank.project(x0)?,
            x0: Features::new(x0),
        })
    }

    pub fn n(&self) -> usize {
        self.x0.dim().0
    }

    pub fn feature_dim(&self) -> usize {
        self.x0.dim().1
    }

    /// Whether `X0` is held in compressed sparse rows.
    pub fn is_sparse(&self) -> bool {
        self.x0.is_sparse()
    }

    pub fn projection(&self) -> &Projection<T> {
        &self.proj
    }

    /// Explicit `[K1 X0, K2 X0, K3 X0]`, side by side.
    pub fn p_cat(&self, bank: &FilterBank<T>) -> Result<Array2<T>> {
        let parts = bank.conv_all(self.x0.to_dense().view())?;
        let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
        Ok(concatenate(Axis(1), &views).expect("equal row counts"))
    }
}

/// Forward mode: eval, or train with an inverted-dropout mask on the hidden
/// activations (entries `0` or `1 / (1 - p)`).
#[derive(Debug, Clone, Copy)]
pub enum Mode<'a, T> {
    Eval,
    Train(&'a Array2<T>),
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    pub z1: Array2<T>,
    pub x1d: Array2<T>,
    pub x1_proj: Projection<T>,
    pub logits: Array2<T>,
}

/// Two-layer propagation: `X1 = ReLU(sum_k K_k X0 W^(1,k) + b1)`, dropout in
/// train mode, then `X2 = sum_k K_k X1 W^(2,k) + b2`.
pub fn forward<T: Scalar>(
    bank: &FilterBank<T>,
    pre: &Precomputed<T>,
    params: &ModelParams<T>,
    mode: Mode<'_, T>,
) -> Result<ForwardCache<T>> {
    forward_rows(bank, pre, params, mode, None)
}

/// [`forward`] with the output layer evaluated only on `rows` when given;
/// other logits rows are left at zero. The hidden layer is always complete.
pub fn forward_rows<T: Scalar>(
    bank: &FilterBank<T>,
    pre: &Precomputed<T>,
    params: &ModelParams<T>,
    mode: Mode<'_, T>,
    rows: Option<&[usize]>,
) -> Result<ForwardCache<T>> {
    let (d, h, m) = params.dims();
    check_dim("first-layer weight rows", pre.feature_dim(), d)?;
    check_dim("precomputed rows", bank.n(), pre.n())?;
    let [w10, w11, w12] = params.w1.each_ref().map(|w| w.view());
    let mut z1 = bank.combine(pre.x0.dot(w12), &pre.proj, w10, w11, w12)?;
    z1 += &params.b1.view().insert_axis(Axis(0));
    let mut x1d = z1.mapv(|v| v.max(T::zero()));
    if let Mode::Train(mask) = mode {
        check_dim("dropout mask rows", pre.n(), mask.nrows())?;
        check_dim("dropout mask columns", h, mask.ncols())?;
        x1d *= mask;
    }
    let x1_proj = bank.project(x1d.view())?;
    let [w20, w21, w22] = params.w2.each_ref().map(|w| w.view());
    let logits = match rows {
        None => {
            let mut logits = bank.combine(x1d.dot(&w22), &x1_proj, w20, w21, w22)?;
            logits += &params.b2.view().insert_axis(Axis(0));
            logits
        }
        Some(rows) => {
            let xw = x1d.select(Axis(0), rows).dot(&w22);
            let part = bank.combine_rows(xw, &x1_proj, w20, w21, w22, rows)?;
            let mut logits = Array2::zeros((pre.n(), m));
            for (k, &i) in rows.iter().enumerate() {
                let mut row = logits.row_mut(i);
                row.assign(&part.row(k));
                row += &params.b2;
            }
            logits
        }
    };
    Ok(ForwardCache {
        z1,
        x1d,
        x1_proj,
        logits,
    })
}

/// Row-wise softmax with max subtraction.
pub fn softmax<T: Scalar>(logits: ArrayView2<'_, T>) -> Array2<T> {
    let mut p = logits.to_owned();
    for mut row in p.rows_mut() {
        let max = row.fold(T::neg_infinity(), |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    p
}

/// Mean cross-entropy over the training rows.
pub fn loss<T: Scalar>(logits: ArrayView2<'_, T>, split: &Split) -> T {
    let total = split
        .train_idx
        .iter()
        .map(|&i| {
            let row = logits.row(i);
            let max = row.fold(T::neg_infinity(), |m, &v| m.max(v));
            let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
            lse - row[split.labels[i]]
        })
        .sum::<T>();
    total / from_usize(split.train_idx.len())
}

/// Exact gradient of [`loss`] after a forward pass with the same mask.
pub fn backward<T: Scalar>(
    bank: &FilterBank<T>,
    pre: &Precomputed<T>,
    params: &ModelParams<T>,
    split: &Split,
    cache: &ForwardCache<T>,
    mode: Mode<'_, T>,
) -> Result<ModelParams<T>> {
    let (_, _, m) = params.dims();
    let n = pre.n();
    let count: T = from_usize(split.train_idx.len());
    let mut dz2 = Array2::<T>::zeros((n, m));
    for &i in &split.train_idx {
        let mut row = dz2.row_mut(i);
        row.assign(&softmax(cache.logits.slice(s![i..=i, ..])).row(0));
        row[split.labels[i]] -= T::one();
        row.mapv_inplace(|v| v / count);
    }

    let mut grads = params.zeros_like();
    grads.b2 = dz2.sum_axis(Axis(0));
    // dZ2 vanishes off the training rows. K_k is symmetric, so
    // dW2_k = X1d^T K_k dZ2 and dX1d = sum_k K_k dZ2 W2_k^T.
    let rows = &split.train_idx;
    let dz2_proj = bank.project_rows(dz2.view(), rows)?;
    let xt_g = cache
        .x1d
        .select(Axis(0), rows)
        .t()
        .dot(&dz2.select(Axis(0), rows));
    grads.w2 = bank.adjoint_weights(xt_g, &cache.x1_proj, &dz2_proj);
    let [w20, w21, w22] = params.w2.each_ref().map(|w| w.t());
    let mut dx1 = bank.combine(dz2.dot(&w22), &dz2_proj, w20, w21, w22)?;

    if let Mode::Train(mask) = mode {
        dx1 *= mask;
    }
    ndarray::Zip::from(&mut dx1)
        .and(&cache.z1)
        .for_each(|g, &z| {
            if z <= T::zero() {
                *g = T::zero();
            }
        });
    grads.b1 = dx1.sum_axis(Axis(0));
    let dx1_proj = bank.project(dx1.view())?;
    grads.w1 = bank.adjoint_weights(pre.x0.t_dot(dx1.view()), &pre.proj, &dx1_proj);
    Ok(grads)
}

/// Argmax per row; ties go to the lowest class index.
pub fn predict<T: Scalar>(logits: ArrayView2<'_, T>) -> Array1<usize> {
    logits
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}
