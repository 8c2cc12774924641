//! Synchronous round-based message delivery under an F-total edge adversary.
//!
//! The adversary is not an agent. It sits on the links: in each round it may
//! pick at most `F` undirected edges and rewrite or drop the messages crossing
//! them, independently per direction. Agents never see the `tampered` flag;
//! it exists only so the simulator can audit its own bookkeeping.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSchedule};
use crate::rng::StreamRng;

/// Value planted by the value-replacing strategies.
pub const EXTREME_VALUE: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueTuple {
    pub q: f64,
    pub idx: usize,
}

impl ValueTuple {
    pub fn new(q: f64, idx: usize) -> Self {
        ValueTuple { q, idx }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Round {
    /// Direct exchange of own values.
    First,
    /// Relay of the values accepted in the first round.
    Second,
}

impl Round {
    pub fn number(self) -> u8 {
        match self {
            Round::First => 1,
            Round::Second => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Value(ValueTuple),
    Relay(Vec<ValueTuple>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessageEnvelope {
    pub sender: usize,
    pub receiver: usize,
    pub round: Round,
    pub payload: Payload,
    pub tampered: bool,
}

impl MessageEnvelope {
    pub fn new(sender: usize, receiver: usize, round: Round, payload: Payload) -> Self {
        MessageEnvelope {
            sender,
            receiver,
            round,
            payload,
            tampered: false,
        }
    }
}

/// What the adversary does to a message on a selected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackStrategy {
    #[serde(rename = "none")]
    None,
    /// First round: `(10000, 0)`. Second round: every relayed value becomes 10000.
    #[serde(rename = "extreme-value")]
    ExtremeValue,
    /// First round: value becomes 10000, index kept. Second round: the set
    /// `{(10000, i)}` over all agents.
    #[serde(rename = "falsified-relay")]
    FalsifiedRelay,
    /// Extreme value in the first round, falsified relay set in the second.
    #[serde(rename = "extreme-value+falsified-relay")]
    ExtremeThenFalsified,
    #[serde(rename = "drop")]
    Drop,
    /// The genuine message is delivered together with a forged copy that
    /// reuses an index the receiver also gets legitimately.
    #[serde(rename = "duplicate-index-spoof")]
    DuplicateIndexSpoof,
}

impl AttackStrategy {
    pub const ALL: [AttackStrategy; 6] = [
        AttackStrategy::None,
        AttackStrategy::ExtremeValue,
        AttackStrategy::FalsifiedRelay,
        AttackStrategy::ExtremeThenFalsified,
        AttackStrategy::Drop,
        AttackStrategy::DuplicateIndexSpoof,
    ];

    pub fn id(self) -> &'static str {
        match self {
            AttackStrategy::None => "none",
            AttackStrategy::ExtremeValue => "extreme-value",
            AttackStrategy::FalsifiedRelay => "falsified-relay",
            AttackStrategy::ExtremeThenFalsified => "extreme-value+falsified-relay",
            AttackStrategy::Drop => "drop",
            AttackStrategy::DuplicateIndexSpoof => "duplicate-index-spoof",
        }
    }

    /// Rewrites one message. An empty result means the message is dropped.
    fn corrupt(self, msg: &MessageEnvelope, n: usize) -> Vec<Payload> {
        use AttackStrategy::*;
        match (self, msg.round, &msg.payload) {
            (None, _, p) => vec![p.clone()],
            (Drop, _, _) => vec![],
            (ExtremeValue | ExtremeThenFalsified, Round::First, _) => {
                vec![Payload::Value(ValueTuple::new(EXTREME_VALUE, 0))]
            }
            (ExtremeValue, Round::Second, Payload::Relay(set)) => vec![Payload::Relay(
                set.iter().map(|v| ValueTuple::new(EXTREME_VALUE, v.idx)).collect(),
            )],
            (FalsifiedRelay, Round::First, Payload::Value(v)) => {
                vec![Payload::Value(ValueTuple::new(EXTREME_VALUE, v.idx))]
            }
            (FalsifiedRelay | ExtremeThenFalsified, Round::Second, _) => vec![Payload::Relay(
                (0..n).map(|i| ValueTuple::new(EXTREME_VALUE, i)).collect(),
            )],
            (DuplicateIndexSpoof, Round::First, Payload::Value(v)) => vec![
                Payload::Value(*v),
                Payload::Value(ValueTuple::new(EXTREME_VALUE, v.idx)),
            ],
            (DuplicateIndexSpoof, Round::Second, Payload::Relay(set)) => {
                let idx = set.first().map_or(msg.sender, |v| v.idx);
                let mut forged = set.clone();
                forged.push(ValueTuple::new(EXTREME_VALUE, idx));
                vec![Payload::Relay(forged)]
            }
            // payload kind does not match the round; leave it to the receiver
            (_, _, p) => vec![p.clone()],
        }
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AttackStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackStrategy::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::arg(format!("unknown attack strategy `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepSelection {
    pub round1: Vec<(usize, usize)>,
    pub round2: Vec<(usize, usize)>,
}

impl StepSelection {
    fn get(&self, round: Round) -> &[(usize, usize)] {
        match round {
            Round::First => &self.round1,
            Round::Second => &self.round2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeSelection {
    /// Uniform choice of `min(F, |E(t)|)` edges per `(t, round)`, drawn from a
    /// counter-based stream so any step can be queried on its own.
    Random { seed: u64 },
    /// One entry per step; steps past the end are unattacked.
    Explicit { steps: Vec<StepSelection> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackPlan {
    pub strategy: AttackStrategy,
    pub f_budget: usize,
    pub selection: EdgeSelection,
}

fn normalize(e: (usize, usize)) -> (usize, usize) {
    (e.0.min(e.1), e.0.max(e.1))
}

impl AttackPlan {
    pub fn none() -> Self {
        AttackPlan {
            strategy: AttackStrategy::None,
            f_budget: 0,
            selection: EdgeSelection::Explicit { steps: vec![] },
        }
    }

    /// Edges under attack at `(t, round)` on `graph`, as `(i, j)` with `i < j`.
    pub fn selected_edges(&self, graph: &Graph, t: u64, round: Round) -> Result<Vec<(usize, usize)>> {
        if self.strategy == AttackStrategy::None || self.f_budget == 0 {
            return Ok(vec![]);
        }
        match &self.selection {
            EdgeSelection::Random { seed } => {
                let edges = graph.edges();
                let k = self.f_budget.min(edges.len());
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(2 * t + u64::from(round.number() - 1));
                let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, edges.len(), k).into_vec();
                picked.sort_unstable();
                Ok(picked.into_iter().map(|i| edges[i]).collect())
            }
            EdgeSelection::Explicit { steps } => {
                let chosen = steps.get(t as usize).map_or(&[][..], |s| s.get(round));
                if chosen.len() > self.f_budget {
                    return Err(Error::Protocol(format!(
                        "attack plan selects {} edges at t = {t}, round {}; budget is {}",
                        chosen.len(),
                        round.number(),
                        self.f_budget
                    )));
                }
                let mut out = Vec::with_capacity(chosen.len());
                for &e in chosen {
                    let e = normalize(e);
                    if e.1 >= graph.node_count() || !graph.has_edge(e.0, e.1) {
                        return Err(Error::Protocol(format!(
                            "attack plan selects non-edge {e:?} at t = {t}"
                        )));
                    }
                    if !out.contains(&e) {
                        out.push(e);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Expands a random plan into explicit per-step edge lists.
    pub fn materialize(&self, schedule: &GraphSchedule, horizon: u64) -> Result<AttackPlan> {
        let steps = (0..horizon)
            .map(|t| {
                let g = schedule.at(t);
                Ok(StepSelection {
                    round1: self.selected_edges(g, t, Round::First)?,
                    round2: self.selected_edges(g, t, Round::Second)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AttackPlan {
            strategy: self.strategy,
            f_budget: self.f_budget,
            selection: EdgeSelection::Explicit { steps },
        })
    }

    /// Checks an explicit plan against the topology it will run on.
    pub fn validate(&self, schedule: &GraphSchedule) -> Result<()> {
        if let EdgeSelection::Explicit { steps } = &self.selection {
            for (t, _) in steps.iter().enumerate() {
                let g = schedule.at(t as u64);
                self.selected_edges(g, t as u64, Round::First)?;
                self.selected_edges(g, t as u64, Round::Second)?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn make_attack_plan(
    strategy: AttackStrategy,
    f_budget: usize,
    schedule: &GraphSchedule,
    horizon: u64,
    rng: &mut StreamRng,
) -> Result<AttackPlan> {
    if horizon == 0 {
        return Err(Error::arg("attack plan horizon must be at least 1"));
    }
    if schedule.graphs().iter().all(|g| g.edge_count() == 0) && f_budget > 0 && strategy != AttackStrategy::None {
        tracing::warn!("attack plan on an edgeless topology selects nothing");
    }
    Ok(AttackPlan {
        strategy,
        f_budget,
        selection: EdgeSelection::Random { seed: rng.gen() },
    })
}

/// Messages received by each agent in one round, senders in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Inboxes {
    per_agent: Vec<Vec<MessageEnvelope>>,
}

impl Inboxes {
    pub fn of(&self, agent: usize) -> &[MessageEnvelope] {
        &self.per_agent[agent]
    }

    pub fn tampered_count(&self) -> usize {
        self.per_agent.iter().flatten().filter(|m| m.tampered).count()
    }

    pub fn into_inner(self) -> Vec<Vec<MessageEnvelope>> {
        self.per_agent
    }
}

/// Delivers one synchronous round. The outbox must contain exactly one
/// message per directed edge of `graph`, all tagged with `round`.
pub fn deliver_round(
    graph: &Graph,
    outbox: Vec<MessageEnvelope>,
    plan: &AttackPlan,
    t: u64,
    round: Round,
) -> Result<Inboxes> {
    let n = graph.node_count();
    let mut seen = vec![false; n * n];
    for m in &outbox {
        if m.round != round {
            return Err(Error::Protocol(format!(
                "round-{} message in round {}",
                m.round.number(),
                round.number()
            )));
        }
        if m.sender >= n || m.receiver >= n || !graph.has_edge(m.sender, m.receiver) {
            return Err(Error::Protocol(format!(
                "message {} -> {} does not follow an edge",
                m.sender, m.receiver
            )));
        }
        let slot = &mut seen[m.sender * n + m.receiver];
        if *slot {
            return Err(Error::Protocol(format!(
                "duplicate message {} -> {}",
                m.sender, m.receiver
            )));
        }
        *slot = true;
    }
    if outbox.len() != 2 * graph.edge_count() {
        let missing = graph
            .edges()
            .into_iter()
            .flat_map(|(i, j)| [(i, j), (j, i)])
            .find(|&(i, j)| !seen[i * n + j])
            .unwrap_or((0, 0));
        return Err(Error::Protocol(format!(
            "outbox is missing message {} -> {}",
            missing.0, missing.1
        )));
    }

    let attacked = plan.selected_edges(graph, t, round)?;
    let mut per_agent: Vec<Vec<MessageEnvelope>> = vec![Vec::new(); n];
    for msg in outbox {
        let edge = normalize((msg.sender, msg.receiver));
        if attacked.contains(&edge) {
            for payload in plan.strategy.corrupt(&msg, n) {
                per_agent[msg.receiver].push(MessageEnvelope {
                    payload,
                    tampered: true,
                    ..msg.clone()
                });
            }
        } else {
            per_agent[msg.receiver].push(msg);
        }
    }
    for inbox in &mut per_agent {
        inbox.sort_by_key(|m| m.sender);
    }
    Ok(Inboxes { per_agent })
}

/// Round-one outbox in which every agent sends `values[agent]` to all neighbors.
pub fn value_outbox(graph: &Graph, values: &[f64]) -> Vec<MessageEnvelope> {
    let mut out = Vec::with_capacity(2 * graph.edge_count());
    for i in 0..graph.node_count() {
        for j in graph.neighbors(i) {
            out.push(MessageEnvelope::new(
                i,
                j,
                Round::First,
                Payload::Value(ValueTuple::new(values[i], i)),
            ));
        }
    }
    out
}
