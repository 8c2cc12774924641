use frqd_core::comms::ValueTuple;
use frqd_core::comms::{make_attack_plan, AttackPlan, AttackStrategy};
use frqd_core::graph::{construct_redundant, two_hop_graph, GraphSchedule};
use frqd_core::learning::{
    first_filter, frqd_step, laplacian_reference_step, qd_update, reference_step, second_filter, QTable,
    ScheduleParams, StepContext,
};
use frqd_core::mdp::{build_task_assignment_mdp, BehaviorPolicy, RestartRule, Sampler};
use frqd_core::oracle::{bellman_residual, value_iteration};
use frqd_core::rng::stream_rng;
use proptest::prelude::*;

const STRATEGIES: [AttackStrategy; 5] = [
    AttackStrategy::ExtremeValue,
    AttackStrategy::FalsifiedRelay,
    AttackStrategy::ExtremeThenFalsified,
    AttackStrategy::Drop,
    AttackStrategy::DuplicateIndexSpoof,
];

/// Runs a few hundred attacked steps on the (10, 7) construction and checks
/// every agent's consensus set against the true values and the two-hop graph.
fn attacked_run(strategy: AttackStrategy, seed: u64, steps: u64) {
    let model = build_task_assignment_mdp(10, &mut stream_rng(seed)).unwrap();
    let g = construct_redundant(10, 7).unwrap();
    let h = two_hop_graph(&g, 7).unwrap();
    let l = h.laplacian();
    let schedule = GraphSchedule::fixed(g.clone());
    let plan = make_attack_plan(strategy, 1, &schedule, steps, &mut stream_rng(seed + 1)).unwrap();
    let params = ScheduleParams::reference(10);
    let mut init = stream_rng(seed + 2);
    let mut tables: Vec<QTable> = (0..10).map(|_| QTable::random(7, 90, &mut init)).collect();
    let mut shadow = tables.clone();
    let mut sampler = Sampler::new(
        &model,
        BehaviorPolicy::Uniform,
        RestartRule::ExploringStarts,
        stream_rng(seed + 3),
    )
    .unwrap();

    for _ in 0..steps {
        let s = sampler.step(&model);
        let ctx = StepContext {
            graph: &g,
            plan: &plan,
            sample: &s,
            params: &params,
            gamma: model.discount(),
            f_budget: 1,
        };
        let out = frqd_step(&mut tables, &ctx).unwrap();
        reference_step(&mut shadow, &l, &s, &params, model.discount()).unwrap();
        for (i, fs) in out.filters.iter().enumerate() {
            for k in (0..10).filter(|&k| k != i) {
                let wrong = fs
                    .pooled
                    .iter()
                    .filter(|v| v.idx == k && v.q != out.true_values[k])
                    .count();
                assert!(
                    wrong <= 3,
                    "{strategy}: agent {i} index {k} has {wrong} corrupted entries"
                );
                let validated = fs.validated.iter().any(|v| v.idx == k && v.q == out.true_values[k]);
                assert_eq!(validated, h.has_edge(i, k));
            }
            for v in &fs.validated {
                assert_eq!(v.q, out.true_values[v.idx], "{strategy}: forged value validated");
            }
        }
        for (a, b) in tables.iter().zip(&shadow) {
            assert!(a.sup_distance(b.values()) <= 1e-12);
        }
    }
}

#[test]
fn every_strategy_is_filtered_out() {
    for (k, s) in STRATEGIES.into_iter().enumerate() {
        attacked_run(s, 40 + 10 * k as u64, 400);
    }
}

#[test]
fn oracle_residual_is_small_on_task_instances() {
    for seed in 0..3 {
        let model = build_task_assignment_mdp(10, &mut stream_rng(seed)).unwrap();
        let sol = value_iteration(&model, 1e-10);
        assert!(bellman_residual(&model, &sol.q_star) <= 1e-9);
        for x in 0..7 {
            let min = (0..90).map(|u| sol.q(x, u)).fold(f64::INFINITY, f64::min);
            assert_eq!(sol.v_star[x], min);
        }
        assert!((0..90).all(|u| sol.q(6, u) == 0.0));
    }
}

#[test]
fn unattacked_plan_is_a_no_op() {
    let plan = AttackPlan::none();
    let g = construct_redundant(5, 2).unwrap();
    assert!(plan
        .selected_edges(&g, 3, frqd_core::comms::Round::First)
        .unwrap()
        .is_empty());
}

proptest! {
    #[test]
    fn first_filter_output_has_unique_foreign_indices(
        vals in proptest::collection::vec((0.0f64..100.0, 0usize..8), 0..20),
        me in 0usize..8,
    ) {
        let received: Vec<ValueTuple> = vals.iter().map(|&(q, i)| ValueTuple::new(q, i)).collect();
        let kept = first_filter(&received, me);
        for v in &kept {
            prop_assert!(v.idx != me);
            prop_assert_eq!(received.iter().filter(|w| w.idx == v.idx).count(), 1);
        }
    }

    #[test]
    fn second_filter_respects_threshold(
        vals in proptest::collection::vec((0u8..3, 0usize..5), 0..40),
        f in 0usize..3,
    ) {
        let pooled: Vec<ValueTuple> = vals.iter().map(|&(q, i)| ValueTuple::new(f64::from(q), i)).collect();
        let out = second_filter(&pooled, f, 99);
        for v in &out {
            let count = pooled.iter().filter(|w| w.idx == v.idx && w.q == v.q).count();
            prop_assert!(count > 3 * f);
        }
        for w in &pooled {
            let count = pooled.iter().filter(|u| u.idx == w.idx && u.q == w.q).count();
            if count > 3 * f {
                prop_assert!(out.contains(w));
            }
        }
    }

    #[test]
    fn laplacian_form_matches_scalar_update(
        q in proptest::collection::vec(0.0f64..50.0, 6),
        nu in proptest::collection::vec(0.0f64..50.0, 6),
        alpha in 0.001f64..0.5,
        beta in 0.001f64..0.1,
    ) {
        let g = construct_redundant(6, 3).unwrap();
        let l = g.laplacian();
        let lap = laplacian_reference_step(&q, &l, alpha, beta, &nu).unwrap();
        for i in 0..6 {
            // ν = c + γ min Q; split it as cost ν and zero bootstrap
            let scalar = qd_update(q[i], g.neighbors(i).map(|j| q[j]), nu[i], 0.0, 0.9, alpha, beta);
            prop_assert!((scalar - lap[i]).abs() <= 1e-12);
        }
    }
}
