use super::{backward, forward, loss, Mode, ModelParams, Precomputed, Split};
use crate::error::Result;
use crate::filters::FilterBank;

/// Compares [`backward`] with central differences of [`loss`] (dropout off).
///
/// Returns, per tensor in [`ModelParams::tensors`] order, the largest
/// absolute discrepancy divided by the largest analytic gradient entry.
pub fn gradient_check(
    bank: &FilterBank<f64>,
    pre: &Precomputed<f64>,
    params: &ModelParams<f64>,
    split: &Split,
    step: f64,
) -> Result<Vec<f64>> {
    let cache = forward(bank, pre, params, Mode::Eval)?;
    let analytic = backward(bank, pre, params, split, &cache, Mode::Eval)?;
    let eval = |p: &ModelParams<f64>| -> Result<f64> {
        Ok(loss(
            forward(bank, pre, p, Mode::Eval)?.logits.view(),
            split,
        ))
    };

    let mut probe = params.clone();
    let mut errors = Vec::new();
    for (t, (grad, _)) in analytic.tensors().into_iter().enumerate() {
        let mut worst = 0.0f64;
        let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-12);
        for (i, &g) in grad.iter().enumerate() {
            let original = probe.tensors()[t].0[i];
            probe.tensors_mut()[t].0[i] = original + step;
            let up = eval(&probe)?;
            probe.tensors_mut()[t].0[i] = original - step;
            let down = eval(&probe)?;
            probe.tensors_mut()[t].0[i] = original;
            let numeric = (up - down) / (2.0 * step);
            worst = worst.max((numeric - g).abs());
        }
        errors.push(worst / scale);
    }
    Ok(errors)
}
