use super::ModelParams;
use crate::scalar::{cast, Scalar};

/// First and second moment estimates, plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub m: ModelParams<T>,
    pub v: ModelParams<T>,
    /// Steps taken so far; the next step uses `t + 1` for bias correction.
    pub t: u32,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &ModelParams<T>) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }
}

/// Hyperparameters of one Adam update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Coupled L2 decay added to weight-matrix gradients, never to biases.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 5e-4,
        }
    }
}

/// One bias-corrected Adam step in place.
pub fn adam_step<T: Scalar>(
    params: &mut ModelParams<T>,
    grads: &ModelParams<T>,
    state: &mut AdamState<T>,
    cfg: &AdamConfig,
) {
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2): (T, T) = (cast(cfg.beta1), cast(cfg.beta2));
    let lr: T = cast(cfg.lr);
    let eps: T = cast(cfg.eps);
    let wd: T = cast(cfg.weight_decay);
    let c1 = T::one() - b1.powi(t);
    let c2 = T::one() - b2.powi(t);

    let tensors = params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut())
        .zip(state.v.tensors_mut());
    for ((((p, is_weight), (g, _)), (m, _)), (v, _)) in tensors {
        for i in 0..p.len() {
            let mut gi = g[i];
            if is_weight {
                gi += wd * p[i];
            }
            m[i] = b1 * m[i] + (T::one() - b1) * gi;
            v[i] = b2 * v[i] + (T::one() - b2) * gi * gi;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_params;

    #[test]
    fn zero_gradient_without_decay_is_a_no_op() {
        let mut p = init_params::<f64>(3, 2, 2, 1);
        let before = p.clone();
        let mut state = AdamState::new(&p);
        let cfg = AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::default()
        };
        adam_step(&mut p, &before.zeros_like(), &mut state, &cfg);
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = ModelParams::<f64>::zeros(2, 2, 2);
        let mut g = p.zeros_like();
        g.w1[0].fill(1e3);
        g.w2[2].fill(-1e-3);
        g.b1.fill(0.5);
        let mut state = AdamState::new(&p);
        adam_step(&mut p, &g, &mut state, &AdamConfig::default());
        assert!(p.w1[0].iter().all(|&v| (v + 0.01).abs() < 1e-9));
        assert!(p.w2[2].iter().all(|&v| (v - 0.01).abs() < 1e-4));
        assert!(p.b1.iter().all(|&v| (v + 0.01).abs() < 1e-9));
        assert!(p.w1[1].iter().all(|&v| v == 0.0));
    }
}
