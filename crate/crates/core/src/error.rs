use thiserror::Error;

/// Errors raised anywhere in the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("node {node} has zero degree")]
    IsolatedNode { node: usize },

    #[error("graph is disconnected ({components} connected components)")]
    Disconnected { components: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("eigensolver did not converge after {restarts} restarts (worst relative residual {worst_residual:.3e})")]
    NoConvergence {
        restarts: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("rank {rank} too large: at most {max} allowed")]
    RankTooLarge { rank: usize, max: usize },

    #[error("normalized incidence is rank deficient: {needed} nonzero singular values needed, {available} available")]
    RankDeficient { needed: usize, available: usize },

    #[error("graph is numerically disconnected: smallest nonzero eigenvalue {lambda1:.3e} is below tolerance")]
    NumericallyDisconnected { lambda1: f64 },

    #[error("hypergraph has no hyperedges with at least two members")]
    EmptyHypergraph,

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("row {row} has a missing label")]
    MissingLabel { row: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("class {class} has {available} samples, {requested} requested for training")]
    ClassTooSmall {
        class: usize,
        available: usize,
        requested: usize,
    },

    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("dense construction with n = {n} exceeds the limit of {limit}")]
    ScaleGuard { n: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
