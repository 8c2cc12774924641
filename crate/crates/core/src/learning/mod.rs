//! Agent-side learning: consensus + innovations Q-learning and the
//! redundancy filters that decide which neighbor values enter the consensus
//! term.

mod filters;
mod schedule;
mod step;

pub use filters::{accept_relays, first_filter, second_filter, trim_extremes, FilterState};
pub use schedule::ScheduleParams;
pub use step::{
    frqd_step, laplacian_reference_step, qd_step, qd_update, reference_step, trim_f_baseline_step, BaselineOutcome,
    FrqdOutcome, StepContext, Weights,
};

use rand::Rng;

use crate::rng::StreamRng;

/// Range of the random initial Q-values.
pub const INIT_RANGE: (f64, f64) = (0.0, 50.0);

/// One agent's state-action values and per-pair visit counters.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
    visits: Vec<u64>,
}

impl QTable {
    pub fn filled(num_states: usize, num_actions: usize, value: f64) -> Self {
        QTable {
            num_states,
            num_actions,
            values: vec![value; num_states * num_actions],
            visits: vec![0; num_states * num_actions],
        }
    }

    /// Values drawn uniformly from [`INIT_RANGE`], row-major over `(x, u)`.
    pub fn random(num_states: usize, num_actions: usize, rng: &mut StreamRng) -> Self {
        let mut t = QTable::filled(num_states, num_actions, 0.0);
        for v in &mut t.values {
            *v = rng.gen_range(INIT_RANGE.0..=INIT_RANGE.1);
        }
        t
    }

    pub fn from_values(num_states: usize, num_actions: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), num_states * num_actions, "table shape mismatch");
        QTable {
            num_states,
            num_actions,
            visits: vec![0; values.len()],
            values,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    fn slot(&self, x: usize, u: usize) -> usize {
        x * self.num_actions + u
    }

    #[inline]
    pub fn get(&self, x: usize, u: usize) -> f64 {
        self.values[self.slot(x, u)]
    }

    pub(crate) fn set(&mut self, x: usize, u: usize, v: f64) {
        let s = self.slot(x, u);
        self.values[s] = v;
    }

    pub fn visits(&self, x: usize, u: usize) -> u64 {
        self.visits[self.slot(x, u)]
    }

    pub(crate) fn bump_visits(&mut self, x: usize, u: usize) {
        let s = self.slot(x, u);
        self.visits[s] += 1;
    }

    /// `V_x = min_u Q(x, u)`.
    pub fn state_value(&self, x: usize) -> f64 {
        self.values[x * self.num_actions..(x + 1) * self.num_actions]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn visit_counts(&self) -> &[u64] {
        &self.visits
    }

    pub fn sup_distance(&self, reference: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(reference)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
