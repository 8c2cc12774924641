//! Networked multi-agent MDPs with per-agent local costs.
//!
//! States are stored 0-based; the human-facing label of state `s` is `s + 1`,
//! so the task-assignment instance has labels `1..=7` with 7 terminal.
//! Actions are ordered agent pairs `(i, j)` with `i != j`.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;

const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Assignment of a task to the ordered pair `(first, second)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionPair(pub usize, pub usize);

impl fmt::Display for ActionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// Finite MDP `(X, U, P, {c^i}, γ)` shared by `n_agents` learners.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    n_agents: usize,
    num_states: usize,
    actions: Vec<ActionPair>,
    /// `[x][u][x']`, flattened.
    transitions: Vec<f64>,
    /// `[agent][x][u]`, flattened.
    costs: Vec<f64>,
    discount: f64,
    terminal: Vec<bool>,
}

impl MdpModel {
    /// Validates and assembles a model. `transitions[x][u]` is a distribution
    /// over next states, `costs[i][x][u]` agent `i`'s local cost.
    pub fn new(
        actions: Vec<ActionPair>,
        transitions: Vec<Vec<Vec<f64>>>,
        costs: Vec<Vec<Vec<f64>>>,
        discount: f64,
        terminal: Vec<bool>,
    ) -> Result<Self> {
        let num_states = transitions.len();
        let num_actions = actions.len();
        let n_agents = costs.len();
        if num_states == 0 || num_actions == 0 || n_agents == 0 {
            return Err(Error::arg("MDP needs at least one state, action and agent"));
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::arg(format!("discount must lie in (0, 1), got {discount}")));
        }
        if terminal.len() != num_states {
            return Err(Error::arg("terminal flags must cover every state"));
        }
        let mut flat_p = Vec::with_capacity(num_states * num_actions * num_states);
        for (x, rows) in transitions.iter().enumerate() {
            if rows.len() != num_actions {
                return Err(Error::arg(format!(
                    "state {} has {} transition rows, expected {num_actions}",
                    x + 1,
                    rows.len()
                )));
            }
            for (u, row) in rows.iter().enumerate() {
                if row.len() != num_states || row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(Error::arg(format!(
                        "malformed transition row at state {}, action {u}",
                        x + 1
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::arg(format!(
                        "transition row at state {}, action {u} sums to {sum}",
                        x + 1
                    )));
                }
                flat_p.extend_from_slice(row);
            }
        }
        let mut flat_c = Vec::with_capacity(n_agents * num_states * num_actions);
        for (i, table) in costs.iter().enumerate() {
            if table.len() != num_states || table.iter().any(|r| r.len() != num_actions) {
                return Err(Error::arg(format!("cost table of agent {i} has the wrong shape")));
            }
            for (x, row) in table.iter().enumerate() {
                if terminal[x] && row.iter().any(|&c| c != 0.0) {
                    return Err(Error::arg(format!(
                        "agent {i} has nonzero cost at terminal state {}",
                        x + 1
                    )));
                }
                if row.iter().any(|c| !c.is_finite()) {
                    return Err(Error::arg(format!("agent {i} has a non-finite cost")));
                }
                flat_c.extend_from_slice(row);
            }
        }
        Ok(MdpModel {
            n_agents,
            num_states,
            actions,
            transitions: flat_p,
            costs: flat_c,
            discount,
            terminal,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[ActionPair] {
        &self.actions
    }

    pub fn action_index(&self, pair: ActionPair) -> Option<usize> {
        self.actions.iter().position(|&a| a == pair)
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn is_terminal(&self, x: usize) -> bool {
        self.terminal[x]
    }

    pub fn non_terminal_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_states).filter(|&x| !self.terminal[x])
    }

    /// Next-state distribution for `(x, u)`.
    pub fn transition_row(&self, x: usize, u: usize) -> &[f64] {
        let start = (x * self.num_actions() + u) * self.num_states;
        &self.transitions[start..start + self.num_states]
    }

    pub fn local_cost(&self, agent: usize, x: usize, u: usize) -> f64 {
        self.costs[(agent * self.num_states + x) * self.num_actions() + u]
    }

    /// Global cost `c(x, u) = (1/n) Σ_i c^i(x, u)`.
    pub fn global_cost(&self, x: usize, u: usize) -> f64 {
        let total: f64 = (0..self.n_agents).map(|i| self.local_cost(i, x, u)).sum();
        total / self.n_agents as f64
    }

    pub fn to_document(&self) -> MdpDocument {
        let na = self.num_actions();
        MdpDocument {
            states: (1..=self.num_states).collect(),
            terminal_states: (0..self.num_states)
                .filter(|&x| self.terminal[x])
                .map(|x| x + 1)
                .collect(),
            actions: self.actions.clone(),
            discount: self.discount,
            transitions: (0..self.num_states)
                .map(|x| (0..na).map(|u| self.transition_row(x, u).to_vec()).collect())
                .collect(),
            costs: (0..self.n_agents)
                .map(|i| {
                    (0..self.num_states)
                        .map(|x| (0..na).map(|u| self.local_cost(i, x, u)).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_document(doc: MdpDocument) -> Result<Self> {
        let m = doc.transitions.len();
        if doc.states.len() != m || doc.states.iter().enumerate().any(|(s, &label)| label != s + 1) {
            return Err(Error::arg("state labels must be 1..=M in order"));
        }
        let mut terminal = vec![false; m];
        for &label in &doc.terminal_states {
            if label == 0 || label > m {
                return Err(Error::arg(format!("terminal state label {label} out of range")));
            }
            terminal[label - 1] = true;
        }
        MdpModel::new(doc.actions, doc.transitions, doc.costs, doc.discount, terminal)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        MdpModel::from_document(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MdpModel::from_json(&text)
    }
}

/// Replayable JSON form of an [`MdpModel`]. State labels are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpDocument {
    pub states: Vec<usize>,
    pub terminal_states: Vec<usize>,
    pub actions: Vec<ActionPair>,
    pub discount: f64,
    /// `transitions[x][u][x']`
    pub transitions: Vec<Vec<Vec<f64>>>,
    /// `costs[agent][x][u]`
    pub costs: Vec<Vec<Vec<f64>>>,
}

pub const TASK_STATES: usize = 7;
pub const TASK_DISCOUNT: f64 = 0.9;
pub const TASK_MAX_COST: f64 = 50.0;

/// The robot task-assignment instance: six sequential tasks plus a terminal
/// completion state, actions are ordered robot pairs. Pair `(i, j)` finishes
/// task `x` with probability `|i-j| / (|i-j| + x)`; only agent `i` pays, a
/// cost drawn once from `U[0, 50]` per `(x, (i, j))`.
pub fn build_task_assignment_mdp(n: usize, costs_rng: &mut StreamRng) -> Result<MdpModel> {
    if n < 2 {
        return Err(Error::arg(format!("task assignment needs at least 2 agents, got {n}")));
    }
    let actions: Vec<ActionPair> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| ActionPair(i, j)))
        .collect();
    let terminal_idx = TASK_STATES - 1;

    let transitions: Vec<Vec<Vec<f64>>> = (0..TASK_STATES)
        .map(|x| {
            actions
                .iter()
                .map(|&ActionPair(i, j)| {
                    let mut row = vec![0.0; TASK_STATES];
                    if x == terminal_idx {
                        row[x] = 1.0;
                    } else {
                        let gap = i.abs_diff(j) as f64;
                        let label = (x + 1) as f64;
                        row[x + 1] = gap / (gap + label);
                        row[x] = label / (gap + label);
                    }
                    row
                })
                .collect()
        })
        .collect();

    let mut costs = vec![vec![vec![0.0; actions.len()]; TASK_STATES]; n];
    for x in 0..terminal_idx {
        for (u, &ActionPair(i, _)) in actions.iter().enumerate() {
            costs[i][x][u] = costs_rng.gen_range(0.0..=TASK_MAX_COST);
        }
    }

    let mut terminal = vec![false; TASK_STATES];
    terminal[terminal_idx] = true;
    MdpModel::new(actions, transitions, costs, TASK_DISCOUNT, terminal)
}

/// How the learners' shared trajectory picks actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BehaviorPolicy {
    #[default]
    Uniform,
    /// Fixed action index per state.
    Fixed { actions: Vec<usize> },
}

/// Where a new episode begins once the terminal state has been visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RestartRule {
    /// Uniform over non-terminal states.
    #[default]
    ExploringStarts,
    /// Always the first state.
    InitialState,
}

/// Optional zero-mean perturbation of the per-step costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostNoise {
    #[default]
    None,
    Uniform {
        half_width: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrajectoryState {
    pub current_state: usize,
    pub step_index: u64,
    pub episode_index: u64,
}

/// One environment transition as observed by every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: u64,
    pub x: usize,
    pub u: usize,
    pub costs: Vec<f64>,
    pub x_next: usize,
}

/// Seeded trajectory generator.
///
/// A terminal state is absorbing: once reached, one step is taken there
/// (zero cost, self-transition) and the next episode then starts according
/// to the [`RestartRule`].
#[derive(Debug, Clone)]
pub struct Sampler {
    state: TrajectoryState,
    policy: BehaviorPolicy,
    restart: RestartRule,
    noise: CostNoise,
    rng: StreamRng,
}

impl Sampler {
    pub fn new(model: &MdpModel, policy: BehaviorPolicy, restart: RestartRule, mut rng: StreamRng) -> Result<Self> {
        if let BehaviorPolicy::Fixed { actions } = &policy {
            if actions.len() != model.num_states() || actions.iter().any(|&u| u >= model.num_actions()) {
                return Err(Error::arg("fixed policy must name a valid action for every state"));
            }
        }
        let current_state = Self::episode_start(model, restart, &mut rng);
        Ok(Sampler {
            state: TrajectoryState {
                current_state,
                step_index: 0,
                episode_index: 0,
            },
            policy,
            restart,
            noise: CostNoise::None,
            rng,
        })
    }

    pub fn with_noise(mut self, noise: CostNoise) -> Self {
        self.noise = noise;
        self
    }

    fn episode_start(model: &MdpModel, restart: RestartRule, rng: &mut StreamRng) -> usize {
        match restart {
            RestartRule::InitialState => 0,
            RestartRule::ExploringStarts => {
                let starts: Vec<usize> = model.non_terminal_states().collect();
                if starts.is_empty() {
                    0
                } else {
                    starts[rng.gen_range(0..starts.len())]
                }
            }
        }
    }

    pub fn state(&self) -> TrajectoryState {
        self.state
    }

    pub fn step(&mut self, model: &MdpModel) -> Sample {
        let x = self.state.current_state;
        let u = match &self.policy {
            BehaviorPolicy::Uniform => self.rng.gen_range(0..model.num_actions()),
            BehaviorPolicy::Fixed { actions } => actions[x],
        };

        let draw: f64 = self.rng.gen();
        let row = model.transition_row(x, u);
        let mut x_next = row.len() - 1;
        let mut acc = 0.0;
        for (s, &p) in row.iter().enumerate() {
            acc += p;
            if draw < acc {
                x_next = s;
                break;
            }
        }
        // guard against rounding when the tail carries zero mass
        while row[x_next] == 0.0 && x_next > 0 {
            x_next -= 1;
        }

        let mut costs: Vec<f64> = (0..model.n_agents()).map(|i| model.local_cost(i, x, u)).collect();
        if let CostNoise::Uniform { half_width } = self.noise {
            if !model.is_terminal(x) && half_width > 0.0 {
                for c in &mut costs {
                    *c += self.rng.gen_range(-half_width..=half_width);
                }
            }
        }

        let sample = Sample {
            t: self.state.step_index,
            x,
            u,
            costs,
            x_next,
        };

        self.state.step_index += 1;
        if model.is_terminal(x) {
            self.state.episode_index += 1;
            self.state.current_state = Self::episode_start(model, self.restart, &mut self.rng);
        } else {
            self.state.current_state = x_next;
        }
        sample
    }
}

/// Log of sampled state-action pairs with their time stamps.
#[derive(Debug, Clone, Default)]
pub struct VisitLog {
    entries: Vec<(u64, usize, usize)>,
}

impl VisitLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, t: u64, x: usize, u: usize) {
        self.entries.push((t, x, u));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The time of the `(k+1)`-th visit to `(x, u)`.
    pub fn sampling_instant(&self, x: usize, u: usize, k: usize) -> Option<u64> {
        self.entries
            .iter()
            .filter(|&&(_, ex, eu)| ex == x && eu == u)
            .nth(k)
            .map(|&(t, _, _)| t)
    }

    pub fn counts(&self, num_states: usize, num_actions: usize) -> VisitTable {
        visit_counts(self.entries.iter().map(|&(_, x, u)| (x, u)), num_states, num_actions)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitTable {
    num_actions: usize,
    counts: Vec<u64>,
}

impl VisitTable {
    pub fn get(&self, x: usize, u: usize) -> u64 {
        self.counts[x * self.num_actions + u]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }
}

pub fn visit_counts(
    pairs: impl IntoIterator<Item = (usize, usize)>,
    num_states: usize,
    num_actions: usize,
) -> VisitTable {
    let mut counts = vec![0; num_states * num_actions];
    for (x, u) in pairs {
        counts[x * num_actions + u] += 1;
    }
    VisitTable { num_actions, counts }
}
