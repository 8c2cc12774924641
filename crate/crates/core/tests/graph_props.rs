use frqd_core::graph::{
    construct_redundant, find_robustness_violation, is_r_robust_bruteforce, is_rr_redundant, parse_edge_list,
    shared_neighbor_matrix, two_hop_graph, write_edge_list, Graph, RedundancyWitness,
};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

fn naive_shared(g: &Graph, i: usize, j: usize) -> usize {
    usize::from(g.has_edge(i, j))
        + (0..g.node_count())
            .filter(|&k| g.has_edge(i, k) && g.has_edge(j, k))
            .count()
}

proptest! {
    #[test]
    fn shared_count_is_symmetric_and_matches_matrix(g in graph_strategy(25)) {
        let m = shared_neighbor_matrix(&g);
        for i in 0..g.node_count() {
            for j in 0..g.node_count() {
                if i == j { continue; }
                let s = g.shared_neighbor_count(i, j).unwrap();
                prop_assert_eq!(s, g.shared_neighbor_count(j, i).unwrap());
                prop_assert_eq!(s, naive_shared(&g, i, j));
                prop_assert_eq!(s as u32, m.get(i, j));
            }
        }
    }

    #[test]
    fn two_hop_graph_is_simple_and_undirected(g in graph_strategy(20), r in 1usize..8) {
        let h = two_hop_graph(&g, r).unwrap();
        for i in 0..g.node_count() {
            prop_assert!(!h.has_edge(i, i));
            for j in 0..g.node_count() {
                prop_assert_eq!(h.has_edge(i, j), h.has_edge(j, i));
                if i != j {
                    prop_assert_eq!(h.has_edge(i, j), naive_shared(&g, i, j) >= r);
                }
            }
        }
    }

    #[test]
    fn witnesses_are_genuine(g in graph_strategy(16), r in 1usize..6, gap in 1usize..4) {
        let rp = r.saturating_sub(gap);
        prop_assume!(rp < r);
        let v = is_rr_redundant(&g, r, rp).unwrap();
        match v.witness {
            None => prop_assert!(v.redundant),
            Some(RedundancyWitness::GapViolation { i, j, shared }) => {
                prop_assert!(!v.redundant);
                prop_assert_eq!(shared, naive_shared(&g, i, j));
                prop_assert!(shared > rp && shared < r);
            }
            Some(RedundancyWitness::Disconnected { unreachable }) => {
                prop_assert!(!v.redundant);
                let h = two_hop_graph(&g, r).unwrap();
                prop_assert!(!h.reachable_from(0)[unreachable]);
            }
        }
    }

    #[test]
    fn edge_list_roundtrip(g in graph_strategy(20)) {
        prop_assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn robustness_violation_is_a_real_pair(g in graph_strategy(9), r in 1usize..4) {
        if let Some((s1, s2)) = find_robustness_violation(&g, r).unwrap() {
            prop_assert!(!s1.is_empty() && !s2.is_empty());
            prop_assert!(s1.iter().all(|a| !s2.contains(a)));
            for set in [&s1, &s2] {
                for &v in set.iter() {
                    let outside = g.neighbors(v).filter(|w| !set.contains(w)).count();
                    prop_assert!(outside < r);
                }
            }
        }
    }
}

#[test]
fn constructions_are_redundant_and_robust() {
    for r in 1..=7 {
        for n in r + 1..=r + 8 {
            let g = construct_redundant(n, r).unwrap();
            assert_eq!(g.edge_count(), r * (r - 1) / 2 + (n - r) * r);
            for rp in 0..r {
                assert!(is_rr_redundant(&g, r, rp).unwrap().redundant, "n={n} r={r} r'={rp}");
            }
            if n <= 12 {
                assert!(is_r_robust_bruteforce(&g, r.div_ceil(2)).unwrap());
            }
        }
    }
}

#[test]
fn small_examples() {
    let k4 = Graph::complete(4);
    assert!(is_rr_redundant(&k4, 3, 0).unwrap().redundant);
    let p = Graph::path(5);
    let v = is_rr_redundant(&p, 2, 0).unwrap();
    assert!(!v.redundant);
    assert!(matches!(
        v.witness,
        Some(RedundancyWitness::GapViolation { shared: 1, .. })
    ));
    assert!(is_rr_redundant(&k4, 1, 1).is_err());
    assert!(construct_redundant(3, 3).is_err());
    assert_eq!(construct_redundant(4, 3).unwrap(), k4);
}

#[test]
fn robustness_guard() {
    assert!(is_r_robust_bruteforce(&Graph::complete(17), 2).is_err());
    assert!(is_r_robust_bruteforce(&Graph::complete(16), 0).is_err());
}
