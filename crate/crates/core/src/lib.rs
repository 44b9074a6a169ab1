//! Pseudoinverse graph convolutional networks.
//!
//! Numerical types are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod data;
pub mod eigen;
pub mod error;
pub mod filters;
pub mod graph;
pub mod hypergraph;
pub mod model;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SparseGraph64 = graph::SparseGraph<f64>;
pub type SparseGraph32 = graph::SparseGraph<f32>;
pub type GaussianCloud64 = graph::GaussianCloud<f64>;
pub type GaussianCloud32 = graph::GaussianCloud<f32>;
pub type Hypergraph64 = hypergraph::Hypergraph<f64>;
pub type Hypergraph32 = hypergraph::Hypergraph<f32>;
pub type SpectralBasis64 = eigen::SpectralBasis<f64>;
pub type SpectralBasis32 = eigen::SpectralBasis<f32>;
pub type FilterBank64 = filters::FilterBank<f64>;
pub type FilterBank32 = filters::FilterBank<f32>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type ModelParams32 = model::ModelParams<f32>;
pub type Dataset64 = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
