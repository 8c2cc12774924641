//! r-2-hop graphs and (r, r')-redundancy.
//!
//! Whole-matrix shared-neighbor counts come from the integer product
//! `A² + A`; entry `(i, j)` off the diagonal equals `|B_i ∩ N_j|`. The
//! verifier is `O(n³)` for the product plus a BFS on the r-2-hop graph.

use ndarray::Array2;
use serde::Serialize;

use super::Graph;
use crate::error::{Error, Result};

/// Pairwise shared-neighbor counts, `counts[[i, j]] = |B_i ∩ N_j|` for `i != j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedNeighborMatrix {
    counts: Array2<u32>,
}

impl SharedNeighborMatrix {
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.counts[[i, j]]
    }

    pub fn node_count(&self) -> usize {
        self.counts.nrows()
    }

    pub fn as_array(&self) -> &Array2<u32> {
        &self.counts
    }
}

pub fn shared_neighbor_matrix(g: &Graph) -> SharedNeighborMatrix {
    let a = g.adjacency();
    let counts = a.dot(&a) + &a;
    SharedNeighborMatrix { counts }
}

pub fn two_hop_graph(g: &Graph, r: usize) -> Result<Graph> {
    if r == 0 {
        return Err(Error::arg("r-2-hop graph requires r >= 1"));
    }
    let m = shared_neighbor_matrix(g);
    Ok(threshold_graph(&m, r))
}

fn threshold_graph(m: &SharedNeighborMatrix, r: usize) -> Graph {
    let n = m.node_count();
    let mut out = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if m.get(i, j) as usize >= r {
                out.set_edge(i, j);
            }
        }
    }
    out
}

/// Why a graph fails (r, r')-redundancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RedundancyWitness {
    /// The r-2-hop graph does not reach `unreachable` from node 0.
    Disconnected { unreachable: usize },
    /// The pair shares more than r' but fewer than r neighbors.
    GapViolation { i: usize, j: usize, shared: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RedundancyVerdict {
    pub r: usize,
    pub r_prime: usize,
    pub redundant: bool,
    pub witness: Option<RedundancyWitness>,
}

/// Checks (r, r')-redundancy. Gap violations are reported before
/// connectivity failures; pairs are scanned in lexicographic order.
pub fn is_rr_redundant(g: &Graph, r: usize, r_prime: usize) -> Result<RedundancyVerdict> {
    if r <= r_prime {
        return Err(Error::arg(format!(
            "(r, r') redundancy needs r > r'; got r = {r}, r' = {r_prime}"
        )));
    }
    let m = shared_neighbor_matrix(g);
    let n = g.node_count();

    let mut witness = None;
    'scan: for i in 0..n {
        for j in (i + 1)..n {
            let shared = m.get(i, j) as usize;
            if shared < r && shared > r_prime {
                witness = Some(RedundancyWitness::GapViolation { i, j, shared });
                break 'scan;
            }
        }
    }
    if witness.is_none() {
        witness = threshold_graph(&m, r)
            .first_unreachable()
            .map(|unreachable| RedundancyWitness::Disconnected { unreachable });
    }

    Ok(RedundancyVerdict {
        r,
        r_prime,
        redundant: witness.is_none(),
        witness,
    })
}

/// Clique on `0..r` with every remaining node attached to the whole clique.
pub fn construct_redundant(n: usize, r: usize) -> Result<Graph> {
    if r == 0 {
        return Err(Error::arg("construction requires r >= 1"));
    }
    if n <= r {
        return Err(Error::arg(format!("construction requires n > r; got n = {n}, r = {r}")));
    }
    let mut g = Graph::empty(n);
    for i in 0..r {
        for j in (i + 1)..r {
            g.set_edge(i, j);
        }
    }
    for leaf in r..n {
        for c in 0..r {
            g.set_edge(leaf, c);
        }
    }
    Ok(g)
}
