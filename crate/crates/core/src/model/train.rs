use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    adam_step, backward, forward, forward_rows, init_params_with, loss, predict, AdamConfig,
    AdamState, Mode, ModelParams, Precomputed,
};
use crate::error::{Error, Result};
use crate::filters::FilterBank;
use crate::scalar::{cast, Scalar};

/// Training nodes and the labels of all nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// Ascending, distinct.
    pub train_idx: Vec<usize>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Split {
    pub fn new(mut train_idx: Vec<usize>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        train_idx.sort_unstable();
        if train_idx.is_empty() {
            return Err(Error::InvalidArgument("training set is empty".into()));
        }
        if train_idx.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidArgument("training indices repeat".into()));
        }
        if let Some(&i) = train_idx.iter().find(|&&i| i >= labels.len()) {
            return Err(Error::InvalidArgument(format!(
                "training index {i} out of range for {} nodes",
                labels.len()
            )));
        }
        if let Some(&c) = labels.iter().find(|&&c| c >= classes) {
            return Err(Error::InvalidArgument(format!(
                "label {c} >= class count {classes}"
            )));
        }
        Ok(Self {
            train_idx,
            labels,
            classes,
        })
    }

    /// Draws `per_class` training nodes uniformly without replacement from
    /// each class, classes in ascending order.
    pub fn sample(
        labels: &[usize],
        classes: usize,
        per_class: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if per_class == 0 {
            return Err(Error::InvalidArgument(
                "per_class must be at least 1".into(),
            ));
        }
        let mut train_idx = Vec::with_capacity(per_class * classes);
        for class in 0..classes {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
            if members.len() < per_class {
                return Err(Error::ClassTooSmall {
                    class,
                    available: members.len(),
                    requested: per_class,
                });
            }
            train_idx.extend(
                sample(rng, members.len(), per_class)
                    .into_iter()
                    .map(|k| members[k]),
            );
        }
        Self::new(train_idx, labels.to_vec(), classes)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Nodes outside the training set, ascending.
    pub fn test_idx(&self) -> Vec<usize> {
        let mut in_train = vec![false; self.n()];
        for &i in &self.train_idx {
            in_train[i] = true;
        }
        (0..self.n()).filter(|&i| !in_train[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub dropout: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    /// Share the pseudoinverse weights with the high-pass part
    /// (`W^(l,3) = W^(l,2)`), emulating a single full pseudoinverse filter.
    pub tie_high_pass: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 32,
            epochs: 500,
            dropout: 0.5,
            lr: 0.01,
            weight_decay: 5e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            tie_high_pass: false,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!(
                "dropout {} not in [0, 1)",
                self.dropout
            )));
        }
        if self.epochs == 0 || self.hidden == 0 {
            return Err(Error::InvalidArgument(
                "epochs and hidden width must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub params: ModelParams<T>,
    /// Training loss per epoch, measured before that epoch's update.
    pub losses: Vec<f64>,
}

/// Trains from a generator seeded with `cfg.seed`.
pub fn train<T: Scalar>(
    bank: &FilterBank<T>,
    x0: ArrayView2<'_, T>,
    split: &Split,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    let pre = Precomputed::new(bank, x0)?;
    train_with_rng(
        bank,
        &pre,
        split,
        cfg,
        &mut ChaCha8Rng::seed_from_u64(cfg.seed),
    )
}

/// Full-batch training. The generator is consumed by parameter
/// initialization first, then by one dropout mask per epoch (row-major).
pub fn train_with_rng<T: Scalar>(
    bank: &FilterBank<T>,
    pre: &Precomputed<T>,
    split: &Split,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let n = pre.n();
    let mut params = init_params_with(pre.feature_dim(), cfg.hidden, split.classes, rng);
    if cfg.tie_high_pass {
        tie(&mut params);
    }
    let adam = cfg.adam();
    let mut state = AdamState::new(&params);
    let keep: T = cast(1.0 / (1.0 - cfg.dropout));
    let mut mask = Array2::<T>::zeros((n, cfg.hidden));
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mode = if cfg.dropout > 0.0 {
            mask.mapv_inplace(|_| {
                if rng.gen::<f64>() < cfg.dropout {
                    T::zero()
                } else {
                    keep
                }
            });
            Mode::Train(&mask)
        } else {
            Mode::Eval
        };
        let cache = forward_rows(bank, pre, &params, mode, Some(&split.train_idx))?;
        let value = loss(cache.logits.view(), split)
            .to_f64()
            .unwrap_or(f64::NAN);
        if !value.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        losses.push(value);
        let mut grads = backward(bank, pre, &params, split, &cache, mode)?;
        if cfg.tie_high_pass {
            let (g1, g2) = (grads.w1[2].clone(), grads.w2[2].clone());
            grads.w1[1] += &g1;
            grads.w2[1] += &g2;
        }
        adam_step(&mut params, &grads, &mut state, &adam);
        if cfg.tie_high_pass {
            tie(&mut params);
        }
    }
    Ok(TrainOutcome { params, losses })
}

fn tie<T: Scalar>(params: &mut ModelParams<T>) {
    params.w1[2] = params.w1[1].clone();
    params.w2[2] = params.w2[1].clone();
}

/// Accuracy on the nodes outside the training set.
pub fn evaluate<T: Scalar>(
    bank: &FilterBank<T>,
    pre: &Precomputed<T>,
    params: &ModelParams<T>,
    split: &Split,
) -> Result<f64> {
    let logits = forward(bank, pre, params, Mode::Eval)?.logits;
    accuracy(logits.view(), split)
}

/// Fraction of correct argmax predictions outside the training set.
pub fn accuracy<T: Scalar>(logits: ArrayView2<'_, T>, split: &Split) -> Result<f64> {
    let test = split.test_idx();
    if test.is_empty() {
        return Err(Error::InvalidArgument(
            "no nodes left for evaluation".into(),
        ));
    }
    let pred = predict(logits);
    let correct = test.iter().filter(|&&i| pred[i] == split.labels[i]).count();
    Ok(correct as f64 / test.len() as f64)
}
