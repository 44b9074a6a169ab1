use std::collections::{HashSet, VecDeque};

use ndarray::{Array1, Array2, ArrayView2};

use super::Adjacency;
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Weighted undirected graph stored as a symmetric CSR adjacency.
///
/// Construction enforces positive weights, no loops, no duplicate edges and a
/// single connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<T>,
}

impl<T: Scalar> SparseGraph<T> {
    /// Builds the graph from an undirected edge list `(i, j, w)`; each
    /// unordered pair may appear once and is mirrored internally.
    pub fn from_edges(n: usize, edges: &[(usize, usize, T)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (k, &(i, j, w)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({i}, {j}) references a node outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} is a loop on node {i}"
                )));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({i}, {j}) has non-positive or non-finite weight {w}"
                )));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
            per_row[i].push((j, w));
            per_row[j].push((i, w));
        }

        let pairs: Vec<(usize, usize)> = edges.iter().map(|&(i, j, _)| (i, j)).collect();
        let components = connected_components(n, &pairs);
        if components != 1 {
            return Err(Error::Disconnected { components });
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(2 * edges.len());
        let mut weights = Vec::with_capacity(2 * edges.len());
        row_ptr.push(0);
        for mut row in per_row {
            row.sort_by_key(|&(c, _)| c);
            for (c, w) in row {
                cols.push(c);
                weights.push(w);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            weights,
        })
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.cols.len() / 2
    }

    /// Neighbors of `i` with their weights, in ascending index order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Breadth-first connectivity test on the stored adjacency.
    pub fn is_connected(&self) -> bool {
        let mut visited = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for (j, _) in self.neighbors(i) {
                if !visited[j] {
                    visited[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n
    }

    /// Dense copy of the adjacency, for tests and oracles.
    pub fn to_dense(&self) -> Array2<T> {
        let mut a = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, w) in self.neighbors(i) {
                a[[i, j]] = w;
            }
        }
        a
    }
}

impl<T: Scalar> Adjacency<T> for SparseGraph<T> {
    fn node_count(&self) -> usize {
        self.n
    }

    fn adjacency_apply(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        check_dim("sparse adjacency apply", self.n, x.nrows()).expect("row count");
        let mut out = Array2::zeros(x.raw_dim());
        for (i, mut out_row) in out.rows_mut().into_iter().enumerate() {
            for (j, w) in self.neighbors(i) {
                out_row.scaled_add(w, &x.row(j));
            }
        }
        out
    }

    fn row_sums(&self) -> Array1<T> {
        Array1::from_iter((0..self.n).map(|i| self.neighbors(i).map(|(_, w)| w).sum()))
    }
}

/// Number of connected components of an undirected edge list over `n` nodes.
pub fn connected_components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut visited = vec![false; n];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        components += 1;
        visited[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    components
}

/// True iff the edge list over `n` nodes forms a single connected component.
pub fn connectivity_check(n: usize, edges: &[(usize, usize)]) -> bool {
    n > 0 && connected_components(n, edges) == 1
}
