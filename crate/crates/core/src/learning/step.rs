//! One synchronous learning step for every agent.
//!
//! All variants share the update
//!
//! ```text
//! Q ← Q − β Σ_{q ∈ P} (Q − q) + α (c + γ min_v Q(x', v) − Q)
//! ```
//!
//! applied only at the sampled pair; they differ in how the consensus set
//! `P` is formed. Weights use the pair's visit count before this step, and
//! the `min_v` term reads the table as it was before the update.

use ndarray::Array2;

use super::filters::{accept_relays, first_filter, second_filter, trim_extremes, FilterState};
use super::{QTable, ScheduleParams};
use crate::comms::{deliver_round, value_outbox, AttackPlan, MessageEnvelope, Payload, Round, ValueTuple};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mdp::Sample;

/// Everything a step needs besides the agents' tables.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub graph: &'a Graph,
    pub plan: &'a AttackPlan,
    pub sample: &'a Sample,
    pub params: &'a ScheduleParams,
    pub gamma: f64,
    /// Number of compromised edges per round the filters must tolerate.
    pub f_budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub visit_index: u64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone)]
pub struct FrqdOutcome {
    pub filters: Vec<FilterState>,
    /// Every agent's value at the sampled pair before the update.
    pub true_values: Vec<f64>,
    pub weights: Weights,
    /// Tampered deliveries in rounds one and two.
    pub tampered: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    /// Values each agent used in the consensus term.
    pub retained: Vec<Vec<f64>>,
    /// Agents that had too few neighbor values and skipped consensus.
    pub skipped: Vec<usize>,
    pub weights: Weights,
}

pub fn qd_update(
    q: f64,
    peers: impl IntoIterator<Item = f64>,
    cost: f64,
    min_next: f64,
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> f64 {
    let consensus: f64 = peers.into_iter().map(|p| q - p).sum();
    q - beta * consensus + alpha * (cost + gamma * min_next - q)
}

fn check_shapes(tables: &[QTable], ctx: &StepContext<'_>) -> Result<()> {
    let n = ctx.graph.node_count();
    if tables.len() != n {
        return Err(Error::arg(format!(
            "{} agent tables for a graph on {n} nodes",
            tables.len()
        )));
    }
    if ctx.sample.costs.len() != n {
        return Err(Error::arg(format!(
            "{} local costs for {n} agents",
            ctx.sample.costs.len()
        )));
    }
    let Some(first) = tables.first() else {
        return Err(Error::arg("no agents"));
    };
    let (x, u) = (ctx.sample.x, ctx.sample.u);
    if x >= first.num_states() || ctx.sample.x_next >= first.num_states() || u >= first.num_actions() {
        return Err(Error::arg("sampled pair outside the tables"));
    }
    let k = first.visits(x, u);
    if tables.iter().any(|t| t.visits(x, u) != k) {
        return Err(Error::arg("agents disagree on the visit count of the sampled pair"));
    }
    Ok(())
}

fn weights(tables: &[QTable], sample: &Sample, params: &ScheduleParams) -> Weights {
    let k = tables[0].visits(sample.x, sample.u);
    Weights {
        visit_index: k,
        alpha: params.alpha_weight(k),
        beta: params.beta_weight(k),
    }
}

fn apply_updates(tables: &mut [QTable], sample: &Sample, gamma: f64, w: Weights, peers: &[Vec<f64>]) {
    let (x, u) = (sample.x, sample.u);
    for (i, table) in tables.iter_mut().enumerate() {
        let q = table.get(x, u);
        let min_next = table.state_value(sample.x_next);
        let next = qd_update(
            q,
            peers[i].iter().copied(),
            sample.costs[i],
            min_next,
            gamma,
            w.alpha,
            w.beta,
        );
        table.set(x, u, next);
        table.bump_visits(x, u);
    }
}

fn received_values(inbox: &[MessageEnvelope]) -> Vec<ValueTuple> {
    inbox
        .iter()
        .filter_map(|m| match &m.payload {
            Payload::Value(v) => Some(*v),
            Payload::Relay(_) => None,
        })
        .collect()
}

/// Two-round filtered step: exchange, first filter, relay, pool, second
/// filter, update.
pub fn frqd_step(tables: &mut [QTable], ctx: &StepContext<'_>) -> Result<FrqdOutcome> {
    check_shapes(tables, ctx)?;
    let (g, s) = (ctx.graph, ctx.sample);
    let n = g.node_count();
    let true_values: Vec<f64> = tables.iter().map(|t| t.get(s.x, s.u)).collect();

    let round1 = deliver_round(g, value_outbox(g, &true_values), ctx.plan, s.t, Round::First)?;
    let accepted: Vec<Vec<ValueTuple>> = (0..n)
        .map(|i| first_filter(&received_values(round1.of(i)), i))
        .collect();

    let mut relay_out = Vec::with_capacity(2 * g.edge_count());
    for (i, set) in accepted.iter().enumerate() {
        for j in g.neighbors(i) {
            relay_out.push(MessageEnvelope::new(i, j, Round::Second, Payload::Relay(set.clone())));
        }
    }
    let round2 = deliver_round(g, relay_out, ctx.plan, s.t, Round::Second)?;
    let tampered = [round1.tampered_count(), round2.tampered_count()];

    let mut filters = Vec::with_capacity(n);
    for (i, own) in accepted.into_iter().enumerate() {
        let relays = round2.of(i).iter().filter_map(|m| match &m.payload {
            Payload::Relay(set) => Some(&set[..]),
            Payload::Value(_) => None,
        });
        let pooled = accept_relays(relays, &own);
        let validated = second_filter(&pooled, ctx.f_budget, i);
        filters.push(FilterState {
            accepted: own,
            pooled,
            validated,
        });
    }

    let w = weights(tables, s, ctx.params);
    let peers: Vec<Vec<f64>> = filters.iter().map(|f| f.validated_values().collect()).collect();
    apply_updates(tables, s, ctx.gamma, w, &peers);

    Ok(FrqdOutcome {
        filters,
        true_values,
        weights: w,
        tampered,
    })
}

/// Unfiltered single-round step: every received value enters the consensus term.
pub fn qd_step(tables: &mut [QTable], ctx: &StepContext<'_>) -> Result<Weights> {
    check_shapes(tables, ctx)?;
    let (g, s) = (ctx.graph, ctx.sample);
    let values: Vec<f64> = tables.iter().map(|t| t.get(s.x, s.u)).collect();
    let inbox = deliver_round(g, value_outbox(g, &values), ctx.plan, s.t, Round::First)?;
    let peers: Vec<Vec<f64>> = (0..g.node_count())
        .map(|i| received_values(inbox.of(i)).into_iter().map(|v| v.q).collect())
        .collect();
    let w = weights(tables, s, ctx.params);
    apply_updates(tables, s, ctx.gamma, w, &peers);
    Ok(w)
}

/// Single-round step that drops the `F` largest and `F` smallest received
/// values before the consensus term.
pub fn trim_f_baseline_step(tables: &mut [QTable], ctx: &StepContext<'_>) -> Result<BaselineOutcome> {
    check_shapes(tables, ctx)?;
    let (g, s) = (ctx.graph, ctx.sample);
    let values: Vec<f64> = tables.iter().map(|t| t.get(s.x, s.u)).collect();
    let inbox = deliver_round(g, value_outbox(g, &values), ctx.plan, s.t, Round::First)?;

    let mut skipped = Vec::new();
    let retained: Vec<Vec<f64>> = (0..g.node_count())
        .map(|i| {
            let received: Vec<f64> = received_values(inbox.of(i)).into_iter().map(|v| v.q).collect();
            trim_extremes(&received, ctx.f_budget).unwrap_or_else(|| {
                tracing::debug!(agent = i, t = s.t, "too few neighbor values; consensus skipped");
                skipped.push(i);
                Vec::new()
            })
        })
        .collect();

    let w = weights(tables, s, ctx.params);
    apply_updates(tables, s, ctx.gamma, w, &retained);
    Ok(BaselineOutcome {
        retained,
        skipped,
        weights: w,
    })
}

/// `((1 − α) I − β L) Q + α ν` for one column of agent values.
pub fn laplacian_reference_step(
    q: &[f64],
    laplacian: &Array2<f64>,
    alpha: f64,
    beta: f64,
    nu: &[f64],
) -> Result<Vec<f64>> {
    let n = q.len();
    if laplacian.dim() != (n, n) || nu.len() != n {
        return Err(Error::arg(format!(
            "dimension mismatch: Q has {n} entries, L is {:?}, ν has {}",
            laplacian.dim(),
            nu.len()
        )));
    }
    Ok((0..n)
        .map(|i| {
            let lq: f64 = laplacian.row(i).iter().zip(q).map(|(l, v)| l * v).sum();
            (1.0 - alpha) * q[i] - beta * lq + alpha * nu[i]
        })
        .collect())
}

/// Applies [`laplacian_reference_step`] to the sampled pair of every table.
pub fn reference_step(
    tables: &mut [QTable],
    laplacian: &Array2<f64>,
    sample: &Sample,
    params: &ScheduleParams,
    gamma: f64,
) -> Result<Weights> {
    if tables.is_empty() || sample.costs.len() != tables.len() {
        return Err(Error::arg("reference step needs one cost per agent"));
    }
    let (x, u) = (sample.x, sample.u);
    let w = weights(tables, sample, params);
    let q: Vec<f64> = tables.iter().map(|t| t.get(x, u)).collect();
    let nu: Vec<f64> = tables
        .iter()
        .zip(&sample.costs)
        .map(|(t, c)| c + gamma * t.state_value(sample.x_next))
        .collect();
    let next = laplacian_reference_step(&q, laplacian, w.alpha, w.beta, &nu)?;
    for (t, v) in tables.iter_mut().zip(next) {
        t.set(x, u, v);
        t.bump_visits(x, u);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comms::{AttackStrategy, EdgeSelection, StepSelection};
    use crate::graph::{construct_redundant, two_hop_graph};

    fn sample(n: usize) -> Sample {
        Sample {
            t: 0,
            x: 0,
            u: 0,
            costs: (0..n).map(|i| i as f64).collect(),
            x_next: 1,
        }
    }

    fn tables(n: usize) -> Vec<QTable> {
        (0..n)
            .map(|i| QTable::from_values(2, 1, vec![10.0 + i as f64 * 0.5, 3.0 + i as f64]))
            .collect()
    }

    fn one_step_plan(strategy: AttackStrategy, r1: Vec<(usize, usize)>, r2: Vec<(usize, usize)>) -> AttackPlan {
        AttackPlan {
            strategy,
            f_budget: 1,
            selection: EdgeSelection::Explicit {
                steps: vec![StepSelection { round1: r1, round2: r2 }],
            },
        }
    }

    #[test]
    fn qd_update_examples() {
        assert_eq!(qd_update(7.0, [], 3.0, 1.0, 0.9, 0.0, 0.4), 7.0);
        assert_eq!(qd_update(10.0, [10.0, 10.0], 1.0, 2.0, 0.9, 0.0, 0.5), 10.0);
        let v = qd_update(10.0, [8.0], 2.0, 10.0, 0.9, 0.1, 0.1);
        assert!((v - 9.9).abs() < 1e-12);
    }

    #[test]
    fn reference_step_examples() {
        let l = construct_redundant(4, 2).unwrap().laplacian();
        let q = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(
            laplacian_reference_step(&q, &l, 0.0, 0.0, &[9.0; 4]).unwrap(),
            q.to_vec()
        );

        let zero = Array2::zeros((4, 4));
        let nu = [5.0, 6.0, 7.0, 8.0];
        let out = laplacian_reference_step(&q, &zero, 0.25, 0.3, &nu).unwrap();
        for i in 0..4 {
            assert!((out[i] - (0.75 * q[i] + 0.25 * nu[i])).abs() < 1e-15);
        }
        assert!(laplacian_reference_step(&q, &zero, 0.1, 0.1, &nu[..3]).is_err());
    }

    #[test]
    fn honest_star_validates_two_hop_neighbors() {
        let g = Graph::star(5, 0);
        let mut t = tables(5);
        let s = sample(5);
        let params = ScheduleParams::reference(5);
        let plan = AttackPlan::none();
        let ctx = StepContext {
            graph: &g,
            plan: &plan,
            sample: &s,
            params: &params,
            gamma: 0.9,
            f_budget: 0,
        };
        let before: Vec<f64> = t.iter().map(|x| x.get(0, 0)).collect();
        let out = frqd_step(&mut t, &ctx).unwrap();
        let h = two_hop_graph(&g, 1).unwrap();
        for i in 0..5 {
            let got: Vec<ValueTuple> = out.filters[i].validated.clone();
            let want: Vec<ValueTuple> = h.neighbors(i).map(|j| ValueTuple::new(before[j], j)).collect();
            assert_eq!(got, want);
        }
        assert!(t.iter().all(|x| x.visits(0, 0) == 1));
        assert!(t.iter().all(|x| x.get(1, 0) == x.values()[1]));
    }

    #[test]
    fn attacked_step_never_validates_forged_values() {
        let g = construct_redundant(10, 7).unwrap();
        let mut t = tables(10);
        let s = sample(10);
        let params = ScheduleParams::reference(10);
        let plan = one_step_plan(AttackStrategy::ExtremeThenFalsified, vec![(3, 8)], vec![(1, 9)]);
        let ctx = StepContext {
            graph: &g,
            plan: &plan,
            sample: &s,
            params: &params,
            gamma: 0.9,
            f_budget: 1,
        };
        let out = frqd_step(&mut t, &ctx).unwrap();
        assert_eq!(out.tampered, [2, 2]);
        let h = two_hop_graph(&g, 7).unwrap();
        for (i, f) in out.filters.iter().enumerate() {
            assert!(f.validated.iter().all(|v| v.q != 10_000.0));
            let idx: Vec<usize> = f.validated.iter().map(|v| v.idx).collect();
            assert_eq!(idx, h.neighbors(i).collect::<Vec<_>>());
            for v in &f.validated {
                assert_eq!(v.q, out.true_values[v.idx]);
            }
        }
    }

    #[test]
    fn only_sampled_entry_changes() {
        let g = construct_redundant(6, 3).unwrap();
        let mut t = tables(6);
        let before = t.clone();
        let s = sample(6);
        let params = ScheduleParams::reference(6);
        let plan = AttackPlan::none();
        let ctx = StepContext {
            graph: &g,
            plan: &plan,
            sample: &s,
            params: &params,
            gamma: 0.9,
            f_budget: 0,
        };
        frqd_step(&mut t, &ctx).unwrap();
        for (a, b) in t.iter().zip(&before) {
            assert_eq!(a.get(1, 0), b.get(1, 0));
        }
    }

    #[test]
    fn baseline_trims_and_skips() {
        let g = Graph::path(3);
        let mut t = tables(3);
        let s = sample(3);
        let params = ScheduleParams::reference(3);
        let plan = AttackPlan::none();
        let ctx = StepContext {
            graph: &g,
            plan: &plan,
            sample: &s,
            params: &params,
            gamma: 0.9,
            f_budget: 1,
        };
        let out = trim_f_baseline_step(&mut t, &ctx).unwrap();
        // ends have one neighbor, the middle two: all below 2F + 1
        assert_eq!(out.skipped, vec![0, 1, 2]);

        let g = Graph::complete(4);
        let mut t = tables(4);
        let s = sample(4);
        let plan = one_step_plan(AttackStrategy::ExtremeThenFalsified, vec![(0, 1)], vec![]);
        let ctx = StepContext {
            graph: &g,
            plan: &plan,
            sample: &s,
            params: &params,
            gamma: 0.9,
            f_budget: 1,
        };
        let out = trim_f_baseline_step(&mut t, &ctx).unwrap();
        assert!(out.skipped.is_empty());
        assert_eq!(out.retained[0], vec![11.5]);
    }

    #[test]
    fn mismatched_agents_are_rejected() {
        let g = Graph::complete(3);
        let mut t = tables(2);
        let s = sample(3);
        let params = ScheduleParams::reference(3);
        let plan = AttackPlan::none();
        let ctx = StepContext {
            graph: &g,
            plan: &plan,
            sample: &s,
            params: &params,
            gamma: 0.9,
            f_budget: 0,
        };
        assert!(frqd_step(&mut t, &ctx).is_err());
    }
}
