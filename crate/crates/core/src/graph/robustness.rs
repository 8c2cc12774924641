//! Exhaustive r-robustness checking.
//!
//! Every unordered pair of disjoint nonempty subsets is visited once: the
//! smaller of the two minimum elements is forced into `S1`. Exponential in
//! `n`, so inputs are capped at [`ROBUSTNESS_MAX_NODES`].

use super::Graph;
use crate::error::{Error, Result};

pub const ROBUSTNESS_MAX_NODES: usize = 16;

fn neighbor_masks(g: &Graph) -> Vec<u32> {
    (0..g.node_count())
        .map(|i| g.neighbors(i).fold(0u32, |m, j| m | 1 << j))
        .collect()
}

/// Some node of `set` has at least `r` neighbors outside `set`.
fn has_reachable_node(masks: &[u32], set: u32, r: u32) -> bool {
    let mut rest = set;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (masks[i] & !set).count_ones() >= r {
            return true;
        }
    }
    false
}

/// Returns a pair `(S1, S2)` of disjoint nonempty subsets in which no node has
/// `r` neighbors outside its own subset, or `None` if the graph is r-robust.
pub fn find_robustness_violation(g: &Graph, r: usize) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
    let n = g.node_count();
    if r == 0 {
        return Err(Error::arg("robustness requires r >= 1"));
    }
    if n > ROBUSTNESS_MAX_NODES {
        return Err(Error::Capability(format!(
            "exhaustive robustness check is limited to n <= {ROBUSTNESS_MAX_NODES} (got {n})"
        )));
    }
    let masks = neighbor_masks(g);
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let r = r as u32;
    let members = |m: u32| (0..n).filter(|&i| m >> i & 1 == 1).collect::<Vec<_>>();

    for s1 in 1..=full {
        if has_reachable_node(&masks, s1, r) {
            continue;
        }
        let low = s1.trailing_zeros();
        let above_low = full & !((1u32 << (low + 1)) - 1);
        let comp = above_low & !s1;
        let mut s2 = comp;
        while s2 != 0 {
            if !has_reachable_node(&masks, s2, r) {
                return Ok(Some((members(s1), members(s2))));
            }
            s2 = (s2 - 1) & comp;
        }
    }
    Ok(None)
}

pub fn is_r_robust_bruteforce(g: &Graph, r: usize) -> Result<bool> {
    Ok(find_robustness_violation(g, r)?.is_none())
}
