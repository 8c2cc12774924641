//! Undirected communication graphs and the redundancy toolkit built on them.
//!
//! A [`Graph`] is an immutable simple undirected graph on agents `0..n`,
//! stored as a dense symmetric bit matrix. Neighbor sets are derived views:
//! `N_i` is the row of `i`, and the closed neighborhood `B_i = {i} ∪ N_i`.
//!
//! The central quantity is the shared-neighbor count `|B_i ∩ N_j|`, which
//! drives the r-2-hop transform and the (r, r')-redundancy predicate.

mod edge_list;
mod redundancy;
mod robustness;

pub use edge_list::{parse_edge_list, read_edge_list, write_edge_list};
pub use redundancy::{
    construct_redundant, is_rr_redundant, shared_neighbor_matrix, two_hop_graph, RedundancyVerdict, RedundancyWitness,
    SharedNeighborMatrix,
};
pub use robustness::{find_robustness_violation, is_r_robust_bruteforce, ROBUSTNESS_MAX_NODES};

use std::collections::VecDeque;
use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Simple undirected graph over agents `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            words,
            rows: vec![0; words * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_edge(i, j);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn star(n: usize, center: usize) -> Self {
        let edges: Vec<_> = (0..n).filter(|&i| i != center).map(|i| (center, i)).collect();
        Graph::from_edges(n, &edges).expect("star edges are valid")
    }

    /// Builds a graph from an undirected edge list. Self-loops, duplicate
    /// edges (in either orientation) and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::arg(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::arg(format!("self-loop at node {i}")));
            }
            if g.has_edge(i, j) {
                return Err(Error::arg(format!("duplicate edge ({i}, {j})")));
            }
            g.set_edge(i, j);
        }
        Ok(g)
    }

    fn set_edge(&mut self, i: usize, j: usize) {
        self.rows[i * self.words + j / 64] |= 1 << (j % 64);
        self.rows[j * self.words + i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Neighbors of `i` in increasing order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.has_edge(i, j))
    }

    /// Undirected edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::arg(format!("node {i} out of range for n = {}", self.n)));
        }
        Ok(())
    }

    /// `|B_i ∩ N_j|` where `B_i = {i} ∪ N_i`, by direct set intersection.
    pub fn shared_neighbor_count(&self, i: usize, j: usize) -> Result<usize> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(Error::arg("shared_neighbor_count requires i != j"));
        }
        let common: usize = self
            .row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum();
        Ok(common + usize::from(self.has_edge(i, j)))
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency(&self) -> Array2<u32> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| u32::from(self.has_edge(i, j)))
    }

    /// Graph Laplacian `D - A`.
    pub fn laplacian(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| {
            if i == j {
                self.degree(i) as f64
            } else if self.has_edge(i, j) {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Nodes reachable from `start` by breadth-first search.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        if start >= self.n {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// First node not reachable from node 0, if any.
    pub fn first_unreachable(&self) -> Option<usize> {
        self.reachable_from(0).iter().position(|&s| !s)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.first_unreachable().is_none()
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}

/// A time-indexed topology `G(t)`. Indexing past the end cycles through the
/// sequence, so a single graph describes a static network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSchedule {
    graphs: Vec<Graph>,
}

impl GraphSchedule {
    pub fn new(graphs: Vec<Graph>) -> Result<Self> {
        let Some(first) = graphs.first() else {
            return Err(Error::arg("graph schedule must contain at least one graph"));
        };
        let n = first.node_count();
        if graphs.iter().any(|g| g.node_count() != n) {
            return Err(Error::arg("all graphs in a schedule must share the same node count"));
        }
        Ok(GraphSchedule { graphs })
    }

    pub fn fixed(graph: Graph) -> Self {
        GraphSchedule { graphs: vec![graph] }
    }

    pub fn at(&self, t: u64) -> &Graph {
        &self.graphs[(t % self.graphs.len() as u64) as usize]
    }

    pub fn node_count(&self) -> usize {
        self.graphs[0].node_count()
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_counts_on_small_graphs() {
        let k4 = Graph::complete(4);
        assert_eq!(k4.shared_neighbor_count(0, 1).unwrap(), 3);

        let path = Graph::path(3);
        assert_eq!(path.shared_neighbor_count(0, 2).unwrap(), 1);

        let empty = Graph::empty(5);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(empty.shared_neighbor_count(i, j).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn shared_count_rejects_bad_ids() {
        let g = Graph::complete(3);
        assert!(matches!(g.shared_neighbor_count(0, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(g.shared_neighbor_count(1, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn from_edges_rejects_loops_and_duplicates() {
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let zero = Graph::empty(3).laplacian();
        assert!(zero.iter().all(|&v| v == 0.0));

        let k2 = Graph::complete(2).laplacian();
        assert_eq!(k2, ndarray::arr2(&[[1.0, -1.0], [-1.0, 1.0]]));

        let tri = Graph::complete(3).laplacian();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(tri[[i, j]], if i == j { 2.0 } else { -1.0 });
            }
            assert_eq!(tri.row(i).sum(), 0.0);
        }
    }

    #[test]
    fn connectivity() {
        assert!(Graph::path(5).is_connected());
        assert!(!Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap().is_connected());
        assert!(Graph::empty(1).is_connected());
        assert_eq!(
            Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap().first_unreachable(),
            Some(2)
        );
    }

    #[test]
    fn wide_graphs_use_multiple_words() {
        let g = Graph::complete(70);
        assert_eq!(g.degree(69), 69);
        assert_eq!(g.shared_neighbor_count(0, 69).unwrap(), 69);
        assert_eq!(g.edge_count(), 70 * 69 / 2);
    }

    #[test]
    fn schedule_cycles() {
        let s = GraphSchedule::new(vec![Graph::path(3), Graph::complete(3)]).unwrap();
        assert_eq!(s.at(0), &Graph::path(3));
        assert_eq!(s.at(3), &Graph::complete(3));
        assert!(GraphSchedule::new(vec![Graph::path(3), Graph::path(4)]).is_err());
    }
}
