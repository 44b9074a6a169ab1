//! Hypergraphs, their construction from categorical tables, and their exact
//! spectral decomposition through the `|E| x |E|` Gram matrix of the
//! normalized incidence.

mod categorical;
mod spectral;

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::Adjacency;
use crate::scalar::{cast, from_usize, Scalar};

pub use categorical::{
    from_categorical_table, CategoricalHypergraph, CategoricalSchema, ColumnRole, ColumnSpec,
    DEFAULT_BINS,
};
pub use spectral::{
    clique_expansion_dense, gram_matrix, hypergraph_spectral_basis, normalized_incidence,
    RankPolicy, CLIQUE_DENSE_LIMIT, GRAM_TOLERANCE,
};

/// Weighted hypergraph stored as sorted member lists per hyperedge.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph<T> {
    n: usize,
    edges: Vec<Vec<usize>>,
    weights: Vec<T>,
    /// Incident hyperedges per node, ascending.
    node_edges: Vec<Vec<usize>>,
}

impl<T: Scalar> Hypergraph<T> {
    /// Validates and stores a hypergraph. Member lists are sorted; duplicate
    /// members, hyperedges with fewer than two members, non-positive weights
    /// and uncovered nodes are rejected.
    pub fn new(n: usize, edges: Vec<Vec<usize>>, weights: Vec<T>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyHypergraph);
        }
        if edges.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                context: "hyperedge weights",
                expected: edges.len(),
                found: weights.len(),
            });
        }
        let mut node_edges = vec![Vec::new(); n];
        let mut sorted = Vec::with_capacity(edges.len());
        for (e, (mut members, &w)) in edges.into_iter().zip(&weights).enumerate() {
            members.sort_unstable();
            if members.windows(2).any(|p| p[0] == p[1]) {
                return Err(Error::InvalidHypergraph(format!(
                    "hyperedge {e} lists a node twice"
                )));
            }
            if members.len() < 2 {
                return Err(Error::InvalidHypergraph(format!(
                    "hyperedge {e} has {} member(s), at least 2 required",
                    members.len()
                )));
            }
            if let Some(&bad) = members.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidHypergraph(format!(
                    "hyperedge {e} references node {bad} >= {n}"
                )));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::InvalidHypergraph(format!(
                    "hyperedge {e} has weight {w}"
                )));
            }
            for &i in &members {
                node_edges[i].push(e);
            }
            sorted.push(members);
        }
        if let Some(node) = node_edges.iter().position(Vec::is_empty) {
            return Err(Error::IsolatedNode { node });
        }
        Ok(Self {
            n,
            edges: sorted,
            weights,
            node_edges,
        })
    }

    /// Unit weights for every hyperedge.
    pub fn unweighted(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let weights = vec![T::one(); edges.len()];
        Self::new(n, edges, weights)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Hyperedges containing node `i`.
    pub fn incident_edges(&self, i: usize) -> &[usize] {
        &self.node_edges[i]
    }

    /// `D_ii = sum_e H_ie w_e`.
    pub fn node_degrees(&self) -> Array1<T> {
        Array1::from_iter(
            self.node_edges
                .iter()
                .map(|es| es.iter().map(|&e| self.weights[e]).sum::<T>()),
        )
    }

    /// `B_ee`, the member count of each hyperedge.
    pub fn edge_degrees(&self) -> Array1<T> {
        Array1::from_iter(self.edges.iter().map(|m| from_usize(m.len())))
    }

    /// Dense 0/1 incidence matrix `H` (`n x |E|`).
    pub fn incidence_dense(&self) -> Array2<T> {
        let mut h = Array2::zeros((self.n, self.edges.len()));
        for (e, members) in self.edges.iter().enumerate() {
            for &i in members {
                h[[i, e]] = T::one();
            }
        }
        h
    }

    /// Text format: a `n |E|` header, then `w_e k i1 ... ik` per hyperedge.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.edges.len())?;
        for (members, &weight) in self.edges.iter().zip(&self.weights) {
            write!(
                w,
                "{:?} {}",
                weight.to_f64().unwrap_or(f64::NAN),
                members.len()
            )?;
            for i in members {
                write!(w, " {i}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let parse_err = |line: usize, message: String| Error::Parse { line, message };

        let (line, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty hypergraph file".into()))?;
        let header = header?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| parse_err(line, format!("bad header: {e}")))?;
        let [n, m] = nums[..] else {
            return Err(parse_err(line, "header must be `n |E|`".into()));
        };

        let mut edges = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for (line, text) in lines {
            let text = text?;
            let mut fields = text.split_whitespace();
            let w: f64 = fields
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|e| parse_err(line, format!("bad weight: {e}")))?;
            let k: usize = fields
                .next()
                .ok_or_else(|| parse_err(line, "missing member count".into()))?
                .parse()
                .map_err(|e| parse_err(line, format!("bad member count: {e}")))?;
            let members: Vec<usize> = fields
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| parse_err(line, format!("bad node index: {e}")))?;
            if members.len() != k {
                return Err(parse_err(
                    line,
                    format!("expected {k} members, found {}", members.len()),
                ));
            }
            edges.push(members);
            weights.push(cast::<T>(w));
        }
        if edges.len() != m {
            return Err(Error::InvalidHypergraph(format!(
                "header announces {m} hyperedges, file has {}",
                edges.len()
            )));
        }
        Self::new(n, edges, weights)
    }
}

/// The clique expansion `H W B^{-1} H^T`, loops included, applied without
/// forming it.
impl<T: Scalar> Adjacency<T> for Hypergraph<T> {
    fn node_count(&self) -> usize {
        self.n
    }

    fn adjacency_apply(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let c = x.ncols();
        let mut edge_sums = Array2::<T>::zeros((self.edges.len(), c));
        for (e, members) in self.edges.iter().enumerate() {
            let mut row = edge_sums.row_mut(e);
            for &i in members {
                row += &x.row(i);
            }
            let scale = self.weights[e] / from_usize(members.len());
            row.mapv_inplace(|v| v * scale);
        }
        let mut y = Array2::zeros((self.n, c));
        for (i, es) in self.node_edges.iter().enumerate() {
            let mut row = y.row_mut(i);
            for &e in es {
                row += &edge_sums.row(e);
            }
        }
        y
    }

    fn row_sums(&self) -> Array1<T> {
        self.node_degrees()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(matches!(
            Hypergraph::<f64>::unweighted(3, vec![]),
            Err(Error::EmptyHypergraph)
        ));
        assert!(Hypergraph::<f64>::unweighted(3, vec![vec![0]]).is_err());
        assert!(Hypergraph::<f64>::unweighted(3, vec![vec![0, 0, 1]]).is_err());
        assert!(Hypergraph::<f64>::unweighted(3, vec![vec![0, 3]]).is_err());
        assert!(Hypergraph::<f64>::new(2, vec![vec![0, 1]], vec![0.0]).is_err());
        assert!(matches!(
            Hypergraph::<f64>::unweighted(3, vec![vec![0, 1]]),
            Err(Error::IsolatedNode { node: 2 })
        ));
    }

    #[test]
    fn degrees_and_incidence() {
        let hg =
            Hypergraph::<f64>::new(4, vec![vec![2, 0, 1], vec![1, 3]], vec![1.0, 2.0]).unwrap();
        assert_eq!(hg.edges()[0], vec![0, 1, 2]);
        assert_eq!(hg.node_degrees().to_vec(), vec![1.0, 3.0, 1.0, 2.0]);
        assert_eq!(hg.edge_degrees().to_vec(), vec![3.0, 2.0]);
        let h = hg.incidence_dense();
        assert_eq!(h.sum(), 5.0);
        assert_eq!(h[[1, 1]], 1.0);
    }

    #[test]
    fn text_round_trip() {
        let hg = Hypergraph::<f64>::new(
            5,
            vec![vec![0, 1, 2], vec![2, 3, 4], vec![0, 4]],
            vec![1.0, 0.1, 2.5],
        )
        .unwrap();
        let mut buf = Vec::new();
        hg.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("5 3\n1.0 3 0 1 2\n"));
        assert_eq!(Hypergraph::<f64>::read_text(buf.as_slice()).unwrap(), hg);
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        let bad = "3 1\n1.0 2 0 x\n";
        match Hypergraph::<f64>::read_text(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(Hypergraph::<f64>::read_text("3 2\n1.0 3 0 1 2\n".as_bytes()).is_err());
    }

    #[test]
    fn clique_expansion_apply_matches_definition() {
        let hg =
            Hypergraph::<f64>::new(4, vec![vec![0, 1, 2], vec![2, 3]], vec![1.0, 3.0]).unwrap();
        let x = Array2::eye(4);
        let a = hg.adjacency_apply(x.view());
        let h = hg.incidence_dense();
        let wb = Array2::from_diag(&Array1::from(vec![1.0 / 3.0, 1.5]));
        let expected = h.dot(&wb).dot(&h.t());
        assert!((&a - &expected).iter().all(|v| v.abs() < 1e-15));
        let sums = a.sum_axis(ndarray::Axis(1));
        assert!((&sums - &hg.node_degrees()).iter().all(|v| v.abs() < 1e-14));
    }
}
