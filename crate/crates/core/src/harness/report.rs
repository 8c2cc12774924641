use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ResolvedSeeds};
use crate::error::{Error, Result};
use crate::mdp::ActionPair;

/// Which MDP instance a run used; runs are comparable only when these match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdpIdentity {
    pub kind: String,
    pub n_agents: usize,
    pub num_states: usize,
    pub num_actions: usize,
    /// Seed of the cost draw, or `None` for a model loaded from file.
    pub costs_seed: Option<u64>,
    /// Source file for a loaded model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub sup_norm: f64,
    pub v_star: Vec<f64>,
    /// Optimal action sets per state, state `x` at index `x - 1`.
    pub pi_star: Vec<Vec<ActionPair>>,
    /// `q_star[x][u]`.
    pub q_star: Vec<Vec<f64>>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Completed steps.
    pub steps: u64,
    /// `max_i ‖Q^i − Q*‖∞`.
    pub max_error: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitCheckpoint {
    pub visits: u64,
    /// Steps completed when every non-terminal pair first reached `visits`.
    pub steps: Option<u64>,
    pub max_error: Option<f64>,
    pub relative_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedPoint {
    pub steps: u64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedSeries {
    pub state: usize,
    pub action: ActionPair,
    pub q_star: f64,
    pub points: Vec<TrackedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateAgreement {
    pub state: usize,
    pub optimal: Vec<ActionPair>,
    /// Agents whose greedy set shares no action with the optimal set.
    pub disagreeing_agents: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ViolationCounters {
    pub lemma2_bound: u64,
    pub filter_soundness: u64,
    pub filter_symmetry: u64,
    pub equivalence: u64,
}

impl ViolationCounters {
    pub fn total(&self) -> u64 {
        self.lemma2_bound + self.filter_soundness + self.filter_symmetry + self.equivalence
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Agent-steps in which the trimmed filter had too few values.
    pub consensus_skips: u64,
    /// Agent-steps with `β |P| > 1 − α`, where the update can overshoot.
    pub amplification_steps: u64,
    /// Largest number of corrupted entries seen for one index.
    pub max_corrupted_per_index: usize,
    /// Largest per-entry gap between the filtered run and the Laplacian reference.
    pub max_equivalence_gap: f64,
    /// Tampered deliveries over the whole run.
    pub tampered_messages: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub algorithm: Algorithm,
    /// Set for algorithms that only approximate an externally defined method.
    pub approximation: bool,
    pub mdp: MdpIdentity,
    pub seeds: ResolvedSeeds,
    pub horizon: u64,
    pub steps: u64,
    pub attack_strategy: String,
    pub f_budget: usize,
    pub oracle: OracleSummary,
    pub error_curve: Vec<CurvePoint>,
    pub visit_checkpoints: Vec<VisitCheckpoint>,
    pub tracked: Vec<TrackedSeries>,
    pub final_max_error: f64,
    pub final_relative_error: f64,
    pub min_visits_nonterminal: u64,
    /// Greedy action sets, `policies[agent][x - 1]`.
    pub policies: Vec<Vec<Vec<ActionPair>>>,
    pub policy_agreement: Vec<StateAgreement>,
    /// Final tables, `final_q[agent][x - 1][u]`.
    pub final_q: Vec<Vec<Vec<f64>>>,
    pub violations: ViolationCounters,
    pub diagnostics: Diagnostics,
    /// Not serialized so that artifacts stay byte-reproducible.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl RunReport {
    /// States where at least one agent's greedy set misses every optimal action.
    pub fn disagreeing_states(&self) -> Vec<usize> {
        self.policy_agreement
            .iter()
            .filter(|s| !s.disagreeing_agents.is_empty())
            .map(|s| s.state)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Details of the first invariant violation in a fail-fast run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub invariant: String,
    pub t: u64,
    pub agent: Option<usize>,
    pub detail: String,
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} at t = {}", self.invariant, self.t)?;
        if let Some(a) = self.agent {
            write!(f, " (agent {a})")?;
        }
        write!(f, ": {}", self.detail)
    }
}
