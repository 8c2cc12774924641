//! Exact optimal values by value iteration on the global-cost MDP.

use serde::{Deserialize, Serialize};

use crate::mdp::MdpModel;

/// Actions within this distance of the minimum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSolution {
    pub num_states: usize,
    pub num_actions: usize,
    /// Row-major `[x][u]`.
    pub q_star: Vec<f64>,
    pub v_star: Vec<f64>,
    pub pi_star: Vec<Vec<usize>>,
    pub iterations: usize,
}

impl OptimalSolution {
    pub fn q(&self, x: usize, u: usize) -> f64 {
        self.q_star[x * self.num_actions + u]
    }

    pub fn sup_norm(&self) -> f64 {
        self.q_star.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn state_minima(q: &[f64], num_states: usize, num_actions: usize) -> Vec<f64> {
    (0..num_states)
        .map(|x| {
            q[x * num_actions..(x + 1) * num_actions]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn bellman_apply(model: &MdpModel, q: &[f64]) -> Vec<f64> {
    let (ns, na) = (model.num_states(), model.num_actions());
    let v = state_minima(q, ns, na);
    let gamma = model.discount();
    let mut out = Vec::with_capacity(ns * na);
    for x in 0..ns {
        for u in 0..na {
            let expected_next: f64 = model.transition_row(x, u).iter().zip(&v).map(|(p, vx)| p * vx).sum();
            out.push(model.global_cost(x, u) + gamma * expected_next);
        }
    }
    out
}

/// Synchronous value iteration from `Q = 0`. Stops once a sweep moves less
/// than `tol (1-γ)/γ` in sup-norm, which bounds the distance to `Q*` by `tol`.
pub fn value_iteration(model: &MdpModel, tol: f64) -> OptimalSolution {
    assert!(tol > 0.0, "tolerance must be positive");
    let (ns, na) = (model.num_states(), model.num_actions());
    let gamma = model.discount();
    let threshold = tol * (1.0 - gamma) / gamma;

    let mut q = vec![0.0; ns * na];
    let mut iterations = 0;
    loop {
        let next = bellman_apply(model, &q);
        iterations += 1;
        let delta = next.iter().zip(&q).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        q = next;
        if delta < threshold {
            break;
        }
    }

    let v_star = state_minima(&q, ns, na);
    let pi_star = greedy_policy(&q, ns, na);
    OptimalSolution {
        num_states: ns,
        num_actions: na,
        q_star: q,
        v_star,
        pi_star,
        iterations,
    }
}

/// `max_{x,u} |q(x,u) - (c(x,u) + γ Σ p min_v q(x',v))|`.
pub fn bellman_residual(model: &MdpModel, q: &[f64]) -> f64 {
    bellman_apply(model, q)
        .iter()
        .zip(q)
        .fold(0.0, |m, (tq, v)| m.max((tq - v).abs()))
}

/// Per state, every action within [`TIE_TOLERANCE`] of the minimum.
pub fn greedy_policy(q: &[f64], num_states: usize, num_actions: usize) -> Vec<Vec<usize>> {
    let minima = state_minima(q, num_states, num_actions);
    (0..num_states)
        .map(|x| {
            let row = &q[x * num_actions..(x + 1) * num_actions];
            (0..num_actions)
                .filter(|&u| row[u] - minima[x] <= TIE_TOLERANCE)
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{build_task_assignment_mdp, ActionPair};
    use crate::rng::stream_rng;

    fn single_state(cost: f64, gamma: f64) -> MdpModel {
        MdpModel::new(
            vec![ActionPair(0, 1)],
            vec![vec![vec![1.0]]],
            vec![vec![vec![cost]], vec![vec![cost]]],
            gamma,
            vec![false],
        )
        .unwrap()
    }

    #[test]
    fn geometric_series() {
        let sol = value_iteration(&single_state(2.0, 0.9), 1e-10);
        assert!((sol.q(0, 0) - 20.0).abs() < 1e-10);
        assert_eq!(sol.pi_star, vec![vec![0]]);
    }

    #[test]
    fn task_instance_properties() {
        let m = build_task_assignment_mdp(10, &mut stream_rng(5)).unwrap();
        let sol = value_iteration(&m, 1e-10);
        for u in 0..m.num_actions() {
            assert_eq!(sol.q(6, u), 0.0);
        }
        for x in 0..m.num_states() {
            let min = (0..m.num_actions()).map(|u| sol.q(x, u)).fold(f64::INFINITY, f64::min);
            assert_eq!(sol.v_star[x], min);
            assert!(!sol.pi_star[x].is_empty());
        }
        assert!(bellman_residual(&m, &sol.q_star) <= 1e-9);

        let zero = vec![0.0; m.num_states() * m.num_actions()];
        let max_cost = (0..m.num_states())
            .flat_map(|x| (0..m.num_actions()).map(move |u| (x, u)))
            .map(|(x, u)| m.global_cost(x, u))
            .fold(0.0, f64::max);
        assert!((bellman_residual(&m, &zero) - max_cost).abs() < 1e-12);
        assert!(max_cost <= 5.0);
    }

    #[test]
    fn constant_shift_residual() {
        let m = build_task_assignment_mdp(4, &mut stream_rng(8)).unwrap();
        let sol = value_iteration(&m, 1e-12);
        let shifted: Vec<f64> = sol.q_star.iter().map(|v| v + 3.0).collect();
        assert!((bellman_residual(&m, &shifted) - 3.0 * (1.0 - 0.9)).abs() < 1e-9);
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_policy(&[1.0, 0.5, 2.0], 1, 3), vec![vec![1]]);
        assert_eq!(greedy_policy(&[4.0, 4.0, 4.0], 1, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn monotone_from_zero() {
        let m = build_task_assignment_mdp(5, &mut stream_rng(1)).unwrap();
        let mut q = vec![0.0; m.num_states() * m.num_actions()];
        for _ in 0..50 {
            let next = bellman_apply(&m, &q);
            assert!(next.iter().zip(&q).all(|(a, b)| *a >= *b - 1e-15));
            q = next;
        }
    }
}
