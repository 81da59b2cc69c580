//! The prioritized Double-DQN training loop with parameter noise.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::{evaluate_policy, EvalPolicy};
use super::targets::{td_target_ddqn, td_target_dqn};
use super::AgentError;
use crate::cmapss::HealthTrajectory;
use crate::env::{DatasetEnvConfig, Environment};
use crate::neural::{argmax, backward, AdamState, DenseNet, NetConfig, NoiseState};
use crate::replay::{PerConfig, PrioritizedReplay, Transition};
use crate::rng::{derive_seed, stream_rng, RngCheckpoint, Stream};

/// Algorithm ablations. `random` ignores the network entirely;
/// `dqn_vanilla` uses plain DQN targets over uniform replay; `ddqn_per`
/// adds decoupled targets and prioritized replay; `pddqn_pn` adds
/// parameter-space exploration noise on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Random,
    DqnVanilla,
    DdqnPer,
    PddqnPn,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Random => "random",
            Variant::DqnVanilla => "dqn_vanilla",
            Variant::DdqnPer => "ddqn_per",
            Variant::PddqnPn => "pddqn_pn",
        }
    }

    pub const ALL: [Variant; 4] = [
        Variant::Random,
        Variant::DqnVanilla,
        Variant::DdqnPer,
        Variant::PddqnPn,
    ];
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Variant::Random),
            "dqn_vanilla" => Ok(Variant::DqnVanilla),
            "ddqn_per" => Ok(Variant::DdqnPer),
            "pddqn_pn" => Ok(Variant::PddqnPn),
            other => Err(format!(
                "unknown variant {other:?} (expected random|dqn_vanilla|ddqn_per|pddqn_pn)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub variant: Variant,
    pub gamma: f64,
    pub batch_size: usize,
    /// Target-network replacement frequency, in gradient steps.
    pub target_sync: u64,
    /// Random-policy steps that fill the buffer before learning starts.
    pub warmup_steps: u64,
    pub total_steps: u64,
    /// Fraction of total steps over which epsilon anneals.
    pub exploration_fraction: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Greedy-evaluation snapshot period in steps; 0 disables snapshots.
    pub eval_interval: u64,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            variant: Variant::PddqnPn,
            gamma: 0.99,
            batch_size: 32,
            target_sync: 500,
            warmup_steps: 5000,
            total_steps: 20_000,
            exploration_fraction: 0.8,
            epsilon_start: 1.0,
            epsilon_end: 0.02,
            eval_interval: 500,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(AgentError::BadConfig(format!(
                "gamma must be in [0,1], got {}",
                self.gamma
            )));
        }
        if self.warmup_steps > self.total_steps {
            return Err(AgentError::BadConfig(format!(
                "warmup ({}) exceeds total steps ({})",
                self.warmup_steps, self.total_steps
            )));
        }
        if !(self.exploration_fraction > 0.0 && self.exploration_fraction <= 1.0) {
            return Err(AgentError::BadConfig(format!(
                "exploration fraction must be in (0,1], got {}",
                self.exploration_fraction
            )));
        }
        if self.batch_size == 0 {
            return Err(AgentError::BadConfig("batch size must be positive".into()));
        }
        if self.target_sync == 0 {
            return Err(AgentError::BadConfig(
                "target sync period must be positive".into(),
            ));
        }
        for (name, eps) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)]
        {
            if !(0.0..=1.0).contains(&eps) {
                return Err(AgentError::BadConfig(format!(
                    "{name} must be in [0,1], got {eps}"
                )));
            }
        }
        Ok(())
    }

    /// Exploration rate at a global step. The noisy variant keeps a small
    /// residual epsilon; annealing variants interpolate linearly over
    /// `exploration_fraction · total_steps`.
    pub fn epsilon_at(&self, step: u64) -> f64 {
        match self.variant {
            Variant::Random => 1.0,
            Variant::PddqnPn => self.epsilon_end,
            Variant::DqnVanilla | Variant::DdqnPer => {
                let anneal = (self.exploration_fraction * self.total_steps as f64).max(1.0);
                let frac = (step as f64 / anneal).min(1.0);
                self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
            }
        }
    }
}

/// Epsilon-greedy action selection over the (optionally perturbed) network.
pub fn select_action(
    net: &DenseNet,
    observation: &[f64],
    epsilon: f64,
    perturbed: Option<&DenseNet>,
    num_actions: usize,
    rng: &mut ChaCha8Rng,
) -> Result<usize, AgentError> {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    if rng.gen::<f64>() < epsilon {
        return Ok(rng.gen_range(0..num_actions));
    }
    let q = perturbed.unwrap_or(net).forward(observation)?;
    Ok(argmax(&q))
}

/// Per-step log row (`b` is the importance-sampling exponent in effect).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub step: u64,
    pub episode: u64,
    pub reward: f64,
    /// Return accumulated so far within the current episode; the episode's
    /// final row carries its full return.
    pub episodic_return: f64,
    pub epsilon: f64,
    pub sigma_noise: f64,
    pub beta: f64,
}

/// Periodic greedy-evaluation snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub step: u64,
    pub mean_return: f64,
    pub median_replace_health: f64,
    /// Mean return over the exact DP-optimal return; NaN when no oracle is
    /// available.
    pub oracle_ratio: f64,
}

/// Run metadata captured alongside the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub variant: Variant,
    pub seed: u64,
    pub gamma: f64,
    pub batch_size: usize,
    pub target_sync: u64,
    pub warmup_steps: u64,
    pub total_steps: u64,
    pub exploration_fraction: f64,
    pub hidden: Vec<usize>,
    pub obs_dim: usize,
    pub n_actions: usize,
    pub replay_alpha: f64,
    pub replay_beta_start: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub meta: TrainMeta,
    pub steps: Vec<StepRow>,
    pub evals: Vec<EvalRow>,
    /// `(final step, return)` per completed episode.
    pub episode_returns: Vec<(u64, f64)>,
    /// Not part of any CSV output; wall time is never byte-reproducible.
    pub wall_time_secs: f64,
}

impl TrainLog {
    /// Per-step log as CSV.
    pub fn steps_csv(&self) -> String {
        let mut out = String::from("step,episode,reward,episodic_return,epsilon,sigma_noise,b\n");
        for r in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.step, r.episode, r.reward, r.episodic_return, r.epsilon, r.sigma_noise, r.beta
            ));
        }
        out
    }

    /// Evaluation snapshots as CSV.
    pub fn evals_csv(&self) -> String {
        let mut out = String::from("step,mean_return,median_replace_health,oracle_ratio\n");
        for r in &self.evals {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.step, r.mean_return, r.median_replace_health, r.oracle_ratio
            ));
        }
        out
    }

    /// First snapshot step whose mean return reaches `ratio` of the DP
    /// oracle.
    pub fn steps_to_oracle_ratio(&self, ratio: f64) -> Option<u64> {
        self.evals
            .iter()
            .find(|e| e.oracle_ratio.is_finite() && e.oracle_ratio >= ratio)
            .map(|e| e.step)
    }
}

/// Greedy evaluation hook run every `eval_interval` steps.
pub enum Evaluator {
    None,
    /// Roll the greedy policy from cycle 0 of each trajectory.
    Dataset {
        trajectories: Vec<HealthTrajectory>,
        env_config: DatasetEnvConfig,
    },
}

impl Evaluator {
    fn oracle_mean(&self, gamma: f64) -> Result<Option<f64>, AgentError> {
        match self {
            Evaluator::None => Ok(None),
            Evaluator::Dataset {
                trajectories,
                env_config,
            } => {
                let mut total = 0.0;
                for traj in trajectories {
                    total +=
                        super::eval::dataset_dp_optimal_return(traj, env_config, gamma, 0)?;
                }
                Ok(Some(total / trajectories.len() as f64))
            }
        }
    }

    fn snapshot(
        &self,
        step: u64,
        net: &DenseNet,
        variant: Variant,
        seed: u64,
        gamma: f64,
        oracle_mean: Option<f64>,
    ) -> Result<Option<EvalRow>, AgentError> {
        match self {
            Evaluator::None => Ok(None),
            Evaluator::Dataset {
                trajectories,
                env_config,
            } => {
                let policy = match variant {
                    Variant::Random => EvalPolicy::Random(seed ^ step),
                    _ => EvalPolicy::Greedy(net),
                };
                let summary = evaluate_policy(
                    &policy,
                    trajectories,
                    env_config,
                    gamma,
                    trajectories.len(),
                )?;
                let oracle_ratio = oracle_mean
                    .map(|o| summary.mean_return / o)
                    .unwrap_or(f64::NAN);
                Ok(Some(EvalRow {
                    step,
                    mean_return: summary.mean_return,
                    median_replace_health: summary.median_replace_health,
                    oracle_ratio,
                }))
            }
        }
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to evaluate or exactly resume a trained agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub variant: Variant,
    pub obs_dim: usize,
    pub n_actions: usize,
    pub net: DenseNet,
    pub target: DenseNet,
    pub adam: AdamState,
    pub noise: NoiseState,
    pub steps_done: u64,
    pub agent_rng: RngCheckpoint,
    pub noise_rng: RngCheckpoint,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String, AgentError> {
        serde_json::to_string_pretty(self).map_err(|e| AgentError::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, AgentError> {
        let ckpt: Checkpoint =
            serde_json::from_str(text).map_err(|e| AgentError::Checkpoint(e.to_string()))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(AgentError::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub log: TrainLog,
    pub checkpoint: Checkpoint,
}

/// Run the full training loop on an environment.
///
/// Warmup fills the buffer under a random policy; afterwards every step
/// acts (epsilon-greedy over the possibly noise-perturbed network), stores
/// the transition at max priority, samples a prioritized mini-batch,
/// applies one Adam step on the weighted TD loss, writes back `|δ|`
/// priorities, and syncs the target network every `target_sync` gradient
/// steps. Fully deterministic for a fixed `(seed, config)` pair.
pub fn train<E: Environment>(
    env: &mut E,
    agent_cfg: &AgentConfig,
    per_cfg: &PerConfig,
    net_cfg: &NetConfig,
    evaluator: &Evaluator,
) -> Result<TrainOutput, AgentError> {
    agent_cfg.validate()?;
    let started = Instant::now();
    let variant = agent_cfg.variant;

    let agent_seed = derive_seed(agent_cfg.seed, Stream::Agent);
    let noise_seed = derive_seed(agent_cfg.seed, Stream::Noise);
    let mut agent_rng = stream_rng(agent_cfg.seed, Stream::Agent);
    let mut noise_rng = stream_rng(agent_cfg.seed, Stream::Noise);

    let obs_dim = env.obs_dim();
    let n_actions = env.num_actions();
    let mut dims = Vec::with_capacity(net_cfg.hidden.len() + 2);
    dims.push(obs_dim);
    dims.extend_from_slice(&net_cfg.hidden);
    dims.push(n_actions);
    let mut net = DenseNet::new(&dims, &mut agent_rng)?;
    let mut target = net.sync_target();
    let mut adam = AdamState::new(&net, net_cfg.adam);
    let mut noise = net_cfg.noise;

    // Vanilla means uniform replay with no importance correction; both fall
    // out of the same buffer at alpha = 0, b = 1.
    let effective_per = match variant {
        Variant::DqnVanilla => PerConfig {
            alpha: 0.0,
            beta_start: 1.0,
            ..per_cfg.clone()
        },
        _ => per_cfg.clone(),
    };
    let meta = TrainMeta {
        variant,
        seed: agent_cfg.seed,
        gamma: agent_cfg.gamma,
        batch_size: agent_cfg.batch_size,
        target_sync: agent_cfg.target_sync,
        warmup_steps: agent_cfg.warmup_steps,
        total_steps: agent_cfg.total_steps,
        exploration_fraction: agent_cfg.exploration_fraction,
        hidden: net_cfg.hidden.clone(),
        obs_dim,
        n_actions,
        replay_alpha: effective_per.alpha,
        replay_beta_start: effective_per.beta_start,
    };
    let mut replay = PrioritizedReplay::new(effective_per)?;

    let uses_noise = matches!(variant, Variant::PddqnPn);
    let mut perturbed = if uses_noise {
        Some(net.perturb(noise.sigma, &mut noise_rng))
    } else {
        None
    };

    let oracle_mean = evaluator.oracle_mean(agent_cfg.gamma)?;

    let mut log = TrainLog {
        meta,
        steps: Vec::with_capacity(agent_cfg.total_steps as usize),
        evals: Vec::new(),
        episode_returns: Vec::new(),
        wall_time_secs: 0.0,
    };

    let mut obs = env.reset();
    let mut episode: u64 = 0;
    let mut episodic_return = 0.0;
    let mut last_batch_states: Vec<Vec<f64>> = Vec::new();
    let mut gradient_steps: u64 = 0;

    for step in 0..agent_cfg.total_steps {
        let epsilon = agent_cfg.epsilon_at(step);
        let action = if step < agent_cfg.warmup_steps || matches!(variant, Variant::Random) {
            agent_rng.gen_range(0..n_actions)
        } else {
            select_action(&net, &obs, epsilon, perturbed.as_ref(), n_actions, &mut agent_rng)?
        };

        let out = env.step(action)?;
        episodic_return += out.reward;
        replay.push(Transition {
            state: obs.clone(),
            action,
            reward: out.reward,
            next_state: out.observation.clone(),
            done: out.done,
        })?;
        log.steps.push(StepRow {
            step,
            episode,
            reward: out.reward,
            episodic_return,
            epsilon,
            sigma_noise: if uses_noise { noise.sigma } else { 0.0 },
            beta: replay.anneal_beta(step),
        });

        if out.done {
            log.episode_returns.push((step, episodic_return));
            episode += 1;
            episodic_return = 0.0;
            obs = env.reset();
            if uses_noise {
                if !last_batch_states.is_empty() {
                    let reference = perturbed.as_ref().expect("noise variant has a perturbation");
                    let divergence = action_disagreement(&net, reference, &last_batch_states)?;
                    noise.adapt(divergence);
                }
                // One perturbation per episode keeps exploration coherent.
                perturbed = Some(net.perturb(noise.sigma, &mut noise_rng));
            }
        } else {
            obs = out.observation;
        }

        let learns = !matches!(variant, Variant::Random)
            && step >= agent_cfg.warmup_steps
            && replay.len() >= agent_cfg.batch_size;
        if learns {
            let batch = replay.sample(agent_cfg.batch_size, step, &mut agent_rng)?;
            let targets = match variant {
                Variant::DqnVanilla => {
                    td_target_dqn(&batch.transitions, &target, agent_cfg.gamma)?
                }
                _ => td_target_ddqn(&batch.transitions, &net, &target, agent_cfg.gamma)?,
            };
            let states: Vec<Vec<f64>> =
                batch.transitions.iter().map(|t| t.state.clone()).collect();
            let actions: Vec<usize> = batch.transitions.iter().map(|t| t.action).collect();
            let result = backward(&net, &states, &actions, &targets, &batch.weights, net_cfg.loss)?;
            adam.apply(&mut net, &result.gradients);
            replay.update_priorities(&batch.indices, &result.td_abs)?;
            gradient_steps += 1;
            if gradient_steps.is_multiple_of(agent_cfg.target_sync) {
                target = net.sync_target();
            }
            last_batch_states = states;
        }

        if agent_cfg.eval_interval > 0 && (step + 1) % agent_cfg.eval_interval == 0 {
            if let Some(row) = evaluator.snapshot(
                step + 1,
                &net,
                variant,
                agent_cfg.seed,
                agent_cfg.gamma,
                oracle_mean,
            )? {
                log.evals.push(row);
            }
        }
    }

    log.wall_time_secs = started.elapsed().as_secs_f64();
    let checkpoint = Checkpoint {
        version: CHECKPOINT_VERSION,
        variant,
        obs_dim,
        n_actions,
        net,
        target,
        adam,
        noise,
        steps_done: agent_cfg.total_steps,
        agent_rng: RngCheckpoint::capture(agent_seed, &agent_rng),
        noise_rng: RngCheckpoint::capture(noise_seed, &noise_rng),
    };
    Ok(TrainOutput { log, checkpoint })
}

/// Fraction of observations where the perturbed and unperturbed greedy
/// actions disagree.
fn action_disagreement(
    net: &DenseNet,
    perturbed: &DenseNet,
    states: &[Vec<f64>],
) -> Result<f64, AgentError> {
    let mut disagreements = 0usize;
    for s in states {
        if net.argmax_action(s)? != perturbed.argmax_action(s)? {
            disagreements += 1;
        }
    }
    Ok(disagreements as f64 / states.len() as f64)
}
