//! Greedy-policy evaluation over health trajectories, replacement-point
//! prediction, and the exact dynamic-programming oracle for the dataset
//! environment.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::cmapss::HealthTrajectory;
use crate::env::{discretize, Action, DatasetEnv, DatasetEnvConfig};
use crate::neural::DenseNet;
use crate::rng::{stream_rng, Stream};

/// How a rollout over one trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ReplacementOutcome {
    Replaced { cycle: usize, health: f64 },
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutResult {
    pub outcome: ReplacementOutcome,
    /// Discounted return accumulated over the episode.
    pub discounted_return: f64,
}

/// Action source for evaluation rollouts.
#[allow(clippy::large_enum_variant)]
pub enum Rollout<'a> {
    /// Greedy on the network, no exploration, no noise.
    Greedy(&'a DenseNet),
    /// Uniformly random actions (the `random` baseline variant).
    Random(ChaCha8Rng),
}

impl Rollout<'_> {
    fn act(&mut self, obs: &[f64], n_actions: usize) -> Result<usize, AgentError> {
        match self {
            Rollout::Greedy(net) => Ok(net.argmax_action(obs)?),
            Rollout::Random(rng) => Ok(rng.gen_range(0..n_actions)),
        }
    }
}

/// Roll a policy along one trajectory from `start`; returns the first cycle
/// where Replace is chosen (with the health there) or the failure marker.
pub fn rollout_trajectory(
    policy: &mut Rollout<'_>,
    trajectory: &HealthTrajectory,
    env_config: &DatasetEnvConfig,
    gamma: f64,
    start: usize,
) -> Result<RolloutResult, AgentError> {
    let mut env = DatasetEnv::new(env_config.clone(), vec![trajectory.clone()], 0)?;
    let mut obs = env.reset_at(0, start)?.window_health;
    let mut discount = 1.0;
    let mut total = 0.0;
    loop {
        let action_index = policy.act(&obs, 2)?;
        let cycle = env.current_position();
        let health = env.current_health();
        let out = env.step_action(&Action::from_index(action_index))?;
        total += discount * out.reward;
        discount *= gamma;
        if out.done {
            let outcome = if out.info.failed {
                ReplacementOutcome::Failed
            } else {
                ReplacementOutcome::Replaced { cycle, health }
            };
            return Ok(RolloutResult {
                outcome,
                discounted_return: total,
            });
        }
        obs = out.observation;
    }
}

/// Greedy replacement point of a trained network on one trajectory,
/// starting from its first cycle.
pub fn predict_replacement_point(
    net: &DenseNet,
    trajectory: &HealthTrajectory,
    env_config: &DatasetEnvConfig,
) -> Result<ReplacementOutcome, AgentError> {
    let mut policy = Rollout::Greedy(net);
    Ok(rollout_trajectory(&mut policy, trajectory, env_config, 1.0, 0)?.outcome)
}

/// Aggregate policy evaluation over an engine set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: usize,
    pub mean_return: f64,
    /// Median health at replacement over episodes that replaced.
    pub median_replace_health: f64,
    pub std_replace_health: f64,
    pub failures: usize,
    /// Per-engine `(unit_id, outcome)` rows.
    pub rows: Vec<(u32, ReplacementOutcome)>,
}

/// Policy evaluated by `evaluate_policy`.
pub enum EvalPolicy<'a> {
    Greedy(&'a DenseNet),
    /// Seed for the random baseline.
    Random(u64),
}

/// Run `episodes` rollouts cycling through the engine set and aggregate
/// return and replacement-health statistics.
pub fn evaluate_policy(
    policy: &EvalPolicy<'_>,
    trajectories: &[HealthTrajectory],
    env_config: &DatasetEnvConfig,
    gamma: f64,
    episodes: usize,
) -> Result<EvalSummary, AgentError> {
    if episodes == 0 || trajectories.is_empty() {
        return Err(AgentError::BadConfig(
            "evaluation needs at least one episode and one trajectory".into(),
        ));
    }
    let mut rollout = match policy {
        EvalPolicy::Greedy(net) => Rollout::Greedy(net),
        EvalPolicy::Random(seed) => Rollout::Random(stream_rng(*seed, Stream::Agent)),
    };
    let mut rows = Vec::with_capacity(episodes);
    let mut returns = Vec::with_capacity(episodes);
    let mut healths = Vec::new();
    let mut failures = 0;
    for i in 0..episodes {
        let traj = &trajectories[i % trajectories.len()];
        let result = rollout_trajectory(&mut rollout, traj, env_config, gamma, 0)?;
        returns.push(result.discounted_return);
        match result.outcome {
            ReplacementOutcome::Replaced { health, .. } => healths.push(health),
            ReplacementOutcome::Failed => failures += 1,
        }
        rows.push((traj.unit_id, result.outcome));
    }
    let mean_return = returns.iter().sum::<f64>() / returns.len() as f64;
    let (median, std) = median_and_std(&mut healths);
    Ok(EvalSummary {
        episodes,
        mean_return,
        median_replace_health: median,
        std_replace_health: std,
        failures,
        rows,
    })
}

fn median_and_std(values: &mut [f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite healths"));
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (median, var.sqrt())
}

/// Exact optimal discounted return of the dataset environment from `start`,
/// by backward induction over Replace-vs-Hold at each cycle. The
/// first-visit exploration bonus is resolved along the deterministic Hold
/// path from `start`.
pub fn dataset_dp_optimal_return(
    trajectory: &HealthTrajectory,
    env_config: &DatasetEnvConfig,
    gamma: f64,
    start: usize,
) -> Result<f64, AgentError> {
    let health = &trajectory.health;
    let len = health.len();
    if start + 1 >= len {
        return Err(AgentError::BadConfig(format!(
            "start {start} has no decision left on a length-{len} trajectory"
        )));
    }
    let rw = &env_config.reward;

    // New-bin indicator along the Hold path from `start`.
    let mut seen = vec![false; env_config.bins];
    let mut first_visit = vec![false; len];
    for (i, &h) in health.iter().enumerate().skip(start) {
        let bin = discretize(h, env_config.bins)?;
        first_visit[i] = !seen[bin];
        seen[bin] = true;
    }

    // V[i]: optimal value when standing at cycle i (i < len-1).
    let mut v_next = 0.0; // value at len-1 is terminal; never acted on
    for i in (start..len - 1).rev() {
        let replace = rw.replace
            + if health[i] <= rw.frugal_threshold {
                rw.frugal
            } else {
                0.0
            };
        let hold = if i + 1 == len - 1 {
            rw.penalty
        } else {
            rw.hold_runtime
                + if first_visit[i + 1] { rw.explore } else { 0.0 }
                + gamma * v_next
        };
        v_next = replace.max(hold);
    }
    Ok(v_next)
}
