//! Dataset loaders, label remapping and training split generation.

mod loaders;

pub use loaders::{
    load_categorical, load_edge_list, load_point_cloud, parse_point_cloud, write_point_cloud,
    CsvOptions,
};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{GaussianCloud, SparseGraph};
use crate::hypergraph::Hypergraph;
use crate::model::Split;
use crate::scalar::Scalar;

/// Where the graph structure of a dataset comes from.
#[derive(Debug, Clone)]
pub enum Source<T> {
    PointCloud(GaussianCloud<T>),
    Hypergraph(Hypergraph<T>),
    SparseGraph(SparseGraph<T>),
}

/// Graph structure, node features `X0` and contiguous class labels.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    pub source: Source<T>,
    pub features: Array2<T>,
    pub labels: Vec<usize>,
    /// Original label of each class index, in ascending order.
    pub class_names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        source: Source<T>,
        features: Array2<T>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n = match &source {
            Source::PointCloud(c) => c.points().nrows(),
            Source::Hypergraph(h) => h.node_count(),
            Source::SparseGraph(g) => crate::graph::Adjacency::node_count(g),
        };
        crate::error::check_dim("dataset feature rows", n, features.nrows())?;
        crate::error::check_dim("dataset labels", n, labels.len())?;
        if let Some(&c) = labels.iter().find(|&&c| c >= class_names.len()) {
            return Err(Error::InvalidArgument(format!(
                "label {c} >= class count {}",
                class_names.len()
            )));
        }
        Ok(Self {
            source,
            features,
            labels,
            class_names,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }

    /// Byte encoding of features, labels and class names, for comparing
    /// loads.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let (n, d) = self.features.dim();
        out.extend((n as u64).to_le_bytes());
        out.extend((d as u64).to_le_bytes());
        for v in self.features.iter() {
            out.extend(v.to_f64().unwrap_or(f64::NAN).to_le_bytes());
        }
        for &l in &self.labels {
            out.extend((l as u64).to_le_bytes());
        }
        for name in &self.class_names {
            out.extend(name.as_bytes());
            out.push(0);
        }
        out
    }
}

/// Training split parameters shared by all runs of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub per_class: usize,
    pub seed: u64,
    pub runs: usize,
}

impl SplitSpec {
    /// Generator for run `j`. Splits are drawn from it first, so callers can
    /// keep using it for initialization and dropout.
    pub fn run_rng(&self, j: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(j as u64))
    }
}

/// One split per run; run `j` samples with seed `seed + j`.
pub fn make_splits<T: Scalar>(dataset: &Dataset<T>, spec: &SplitSpec) -> Result<Vec<Split>> {
    (0..spec.runs)
        .map(|j| {
            Split::sample(
                &dataset.labels,
                dataset.classes(),
                spec.per_class,
                &mut spec.run_rng(j),
            )
        })
        .collect()
}

/// Maps raw labels to `0..m` in ascending order (numeric when every label
/// parses as an integer, lexicographic otherwise).
pub fn remap_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut names: Vec<String> = raw.to_vec();
    names.sort_unstable();
    names.dedup();
    if names.iter().all(|s| s.parse::<i64>().is_ok()) {
        names.sort_by_key(|s| s.parse::<i64>().expect("checked"));
    }
    let index: std::collections::HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let labels = raw.iter().map(|s| index[s.as_str()]).collect();
    (labels, names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remapping_is_order_preserving() {
        let raw: Vec<String> = ["7", "2", "10", "2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let (labels, names) = remap_labels(&raw);
        assert_eq!(labels, vec![1, 0, 2, 0]);
        assert_eq!(names, vec!["2", "7", "10"]);
        let raw: Vec<String> = ["p", "e", "p"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            remap_labels(&raw),
            (vec![1, 0, 1], vec!["e".to_string(), "p".to_string()])
        );
    }
}
