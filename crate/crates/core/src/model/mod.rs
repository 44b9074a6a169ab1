//! Two-layer pseudoinverse GCN with a hand-written backward pass and Adam.
//!
//! The first layer consumes the cached products `K_k X0`; the second layer
//! uses the factored feature map of [`FilterBank`](crate::filters::FilterBank).

mod adam;
mod features;
mod gradcheck;
mod network;
mod params;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use features::SPARSE_DENSITY;
pub use gradcheck::gradient_check;
pub use network::{
    backward, forward, forward_rows, loss, predict, softmax, ForwardCache, Mode, Precomputed,
};
pub use params::{init_params, init_params_with, weight_magnitude_analysis, ModelParams};
pub use train::{accuracy, evaluate, train, train_with_rng, Split, TrainConfig, TrainOutcome};

#[cfg(test)]
mod tests;
