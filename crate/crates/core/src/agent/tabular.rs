//! Tabular oracles: exact value iteration, policy evaluation, and the
//! one-step Q-learning update.

#![allow(clippy::needless_range_loop)]

use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::linalg::{solve, SquareMat};

/// Dense finite MDP. Terminal states are modeled as absorbing states with
/// zero reward.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `transition[s][a][s']` flattened row-major.
    pub transition: Vec<f64>,
    /// `reward[s][a]` flattened row-major.
    pub reward: Vec<f64>,
    pub gamma: f64,
}

impl TabularMdp {
    #[inline]
    pub fn p(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.transition[(s * self.n_actions + a) * self.n_states + s2]
    }

    #[inline]
    pub fn r(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.transition.len() != self.n_states * self.n_actions * self.n_states
            || self.reward.len() != self.n_states * self.n_actions
        {
            return Err(AgentError::BadConfig("MDP tensor shapes are wrong".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(AgentError::BadConfig(format!(
                "gamma must be in [0,1], got {}",
                self.gamma
            )));
        }
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let total: f64 = (0..self.n_states).map(|s2| self.p(s, a, s2)).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(AgentError::BadConfig(format!(
                        "P({s},{a},·) sums to {total}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Optimal values and a greedy policy via Bellman-optimality iteration.
///
/// Sweeps continue until the value error is below `tol` (the sup-norm change
/// threshold is scaled by `(1-γ)/γ` so the returned values, not just the
/// increments, meet the tolerance).
pub fn value_iteration(
    mdp: &TabularMdp,
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, Vec<usize>), AgentError> {
    mdp.validate()?;
    let mut v = vec![0.0; mdp.n_states];
    let threshold = if mdp.gamma > 0.0 && mdp.gamma < 1.0 {
        (tol * (1.0 - mdp.gamma) / mdp.gamma).min(tol)
    } else {
        tol
    }
    .max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..max_iters {
        let mut next = vec![0.0; mdp.n_states];
        let mut delta: f64 = 0.0;
        for s in 0..mdp.n_states {
            let mut best = f64::NEG_INFINITY;
            for a in 0..mdp.n_actions {
                let mut q = mdp.r(s, a);
                for s2 in 0..mdp.n_states {
                    let p = mdp.p(s, a, s2);
                    if p > 0.0 {
                        q += mdp.gamma * p * v[s2];
                    }
                }
                best = best.max(q);
            }
            next[s] = best;
            delta = delta.max((next[s] - v[s]).abs());
        }
        v = next;
        if delta < threshold {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AgentError::NonConvergence {
            what: "value iteration",
        });
    }

    let policy = greedy_policy(mdp, &v);
    Ok((v, policy))
}

/// Greedy policy with respect to a value function.
pub fn greedy_policy(mdp: &TabularMdp, v: &[f64]) -> Vec<usize> {
    (0..mdp.n_states)
        .map(|s| {
            let mut best_a = 0;
            let mut best_q = f64::NEG_INFINITY;
            for a in 0..mdp.n_actions {
                let mut q = mdp.r(s, a);
                for s2 in 0..mdp.n_states {
                    let p = mdp.p(s, a, s2);
                    if p > 0.0 {
                        q += mdp.gamma * p * v[s2];
                    }
                }
                if q > best_q {
                    best_q = q;
                    best_a = a;
                }
            }
            best_a
        })
        .collect()
}

/// Exact value of a fixed policy: solve `(I - γ·P_π) V = R_π`.
/// Returns None when the system is singular (γ = 1 with recurrent
/// structure).
pub fn exact_policy_value(mdp: &TabularMdp, policy: &[usize]) -> Option<Vec<f64>> {
    let n = mdp.n_states;
    let mut a = SquareMat::zeros(n);
    let mut b = vec![0.0; n];
    for s in 0..n {
        let act = policy[s];
        b[s] = mdp.r(s, act);
        for s2 in 0..n {
            let coeff = if s == s2 { 1.0 } else { 0.0 } - mdp.gamma * mdp.p(s, act, s2);
            a.set(s, s2, coeff);
        }
    }
    solve(&a, &b)
}

/// Q-values backed by a dense table.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub n_states: usize,
    pub n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            values: vec![0.0; n_states * n_actions],
        }
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    #[inline]
    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.n_actions + a] = v;
    }

    pub fn max_over_actions(&self, s: usize) -> f64 {
        (0..self.n_actions)
            .map(|a| self.get(s, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One Bellman Q-learning update:
/// `Q(s,a) ← (1-α)·Q(s,a) + α·(r + γ·max_a' Q(s',a'))`.
pub fn tabular_q_update(
    q: &mut QTable,
    s: usize,
    a: usize,
    reward: f64,
    s2: usize,
    alpha: f64,
    gamma: f64,
) {
    debug_assert!(alpha > 0.0 && alpha <= 1.0);
    let target = reward + gamma * q.max_over_actions(s2);
    let updated = (1.0 - alpha) * q.get(s, a) + alpha * target;
    q.set(s, a, updated);
}
