//! Dataset-driven environment over health trajectories.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    discretize, reward_of, Action, EnvError, Environment, RewardConfig, RewardContext, StepInfo,
    StepOutcome,
};
use crate::cmapss::HealthTrajectory;
use crate::rng::{stream_rng, Stream};

/// How episodes pick their engine and starting cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Cycle through engines in order, starting at cycle 0.
    Sequential,
    /// Uniformly random engine, starting at cycle 0.
    RandomEngine,
    /// Uniformly random engine and a uniform start offset in
    /// `[0, length-2]`.
    RandomStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetEnvConfig {
    /// Health discretization bins (for exploration bookkeeping and
    /// discretized observations).
    pub bins: usize,
    /// Observation window length K.
    pub window: usize,
    pub sampling: SamplingMode,
    pub reward: RewardConfig,
}

impl Default for DatasetEnvConfig {
    fn default() -> Self {
        Self {
            bins: 20,
            window: 1,
            sampling: SamplingMode::RandomStart,
            reward: RewardConfig::default(),
        }
    }
}

impl DatasetEnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.bins < 2 {
            return Err(EnvError::InvalidConfig("bins must be at least 2".into()));
        }
        if self.window < 1 {
            return Err(EnvError::InvalidConfig("window must be at least 1".into()));
        }
        self.reward.validate()
    }
}

/// Observation at one cycle: the last K health values (left-padded with the
/// first value of the window) both raw and discretized.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetObs {
    pub window_health: Vec<f64>,
    pub window_bins: Vec<usize>,
}

/// Replace/Hold environment walking fixed health trajectories.
#[derive(Debug, Clone)]
pub struct DatasetEnv {
    config: DatasetEnvConfig,
    trajectories: Vec<HealthTrajectory>,
    rng: ChaCha8Rng,
    engine: usize,
    pos: usize,
    start_pos: usize,
    next_sequential: usize,
    visited: Vec<bool>,
    terminal: bool,
}

impl DatasetEnv {
    pub fn new(
        config: DatasetEnvConfig,
        trajectories: Vec<HealthTrajectory>,
        seed: u64,
    ) -> Result<Self, EnvError> {
        config.validate()?;
        if trajectories.is_empty() {
            return Err(EnvError::InvalidConfig(
                "dataset environment needs at least one trajectory".into(),
            ));
        }
        if let Some(short) = trajectories.iter().find(|t| t.len() < 2) {
            return Err(EnvError::InvalidConfig(format!(
                "trajectory for unit {} has fewer than 2 cycles",
                short.unit_id
            )));
        }
        let visited = vec![false; config.bins];
        let mut env = Self {
            config,
            trajectories,
            rng: stream_rng(seed, Stream::Env),
            engine: 0,
            pos: 0,
            start_pos: 0,
            next_sequential: 0,
            visited,
            terminal: true,
        };
        env.reset_obs()?;
        Ok(env)
    }

    pub fn config(&self) -> &DatasetEnvConfig {
        &self.config
    }

    pub fn trajectories(&self) -> &[HealthTrajectory] {
        &self.trajectories
    }

    pub fn current_engine(&self) -> &HealthTrajectory {
        &self.trajectories[self.engine]
    }

    pub fn current_position(&self) -> usize {
        self.pos
    }

    pub fn current_health(&self) -> f64 {
        self.trajectories[self.engine].health[self.pos]
    }

    /// Start a new episode per the sampling mode.
    pub fn reset_obs(&mut self) -> Result<DatasetObs, EnvError> {
        match self.config.sampling {
            SamplingMode::Sequential => {
                self.engine = self.next_sequential % self.trajectories.len();
                self.next_sequential = (self.next_sequential + 1) % self.trajectories.len();
                self.pos = 0;
            }
            SamplingMode::RandomEngine => {
                self.engine = self.rng.gen_range(0..self.trajectories.len());
                self.pos = 0;
            }
            SamplingMode::RandomStart => {
                self.engine = self.rng.gen_range(0..self.trajectories.len());
                let len = self.trajectories[self.engine].len();
                self.pos = self.rng.gen_range(0..=len.saturating_sub(2));
            }
        }
        self.start_pos = self.pos;
        self.visited.iter_mut().for_each(|v| *v = false);
        let bin = discretize(self.current_health(), self.config.bins)?;
        self.visited[bin] = true;
        self.terminal = false;
        self.observe()
    }

    /// Pin the episode to a specific engine and offset (used by greedy
    /// rollouts and oracles).
    pub fn reset_at(&mut self, engine: usize, pos: usize) -> Result<DatasetObs, EnvError> {
        if engine >= self.trajectories.len() {
            return Err(EnvError::InvalidConfig(format!(
                "engine index {engine} out of range"
            )));
        }
        let len = self.trajectories[engine].len();
        if pos + 1 > len {
            return Err(EnvError::InvalidConfig(format!(
                "start position {pos} out of range for length {len}"
            )));
        }
        self.engine = engine;
        self.pos = pos;
        self.start_pos = pos;
        self.visited.iter_mut().for_each(|v| *v = false);
        let bin = discretize(self.current_health(), self.config.bins)?;
        self.visited[bin] = true;
        self.terminal = false;
        self.observe()
    }

    /// Observation window ending at the current cycle, left-padded with the
    /// first in-episode value.
    pub fn observe(&self) -> Result<DatasetObs, EnvError> {
        let health = &self.trajectories[self.engine].health;
        let k = self.config.window;
        let mut window_health = Vec::with_capacity(k);
        for i in 0..k {
            let offset = (k - 1) - i;
            let idx = self.pos.saturating_sub(offset).max(self.start_pos);
            window_health.push(health[idx]);
        }
        let window_bins = window_health
            .iter()
            .map(|&h| discretize(h, self.config.bins))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DatasetObs {
            window_health,
            window_bins,
        })
    }

    /// One transition with a typed action (Repair is rejected here).
    pub fn step_action(&mut self, action: &Action) -> Result<StepOutcome, EnvError> {
        if self.terminal {
            return Err(EnvError::Terminal);
        }
        if matches!(action, Action::Repair { .. }) {
            return Err(EnvError::UnsupportedAction(*action));
        }
        let cfg = &self.config;
        let traj = &self.trajectories[self.engine];
        let failure_cycle = traj.len() - 1;

        let (reward, done, failed) = match action {
            Action::Hold => {
                self.pos += 1;
                if self.pos >= failure_cycle {
                    self.pos = failure_cycle;
                    let ctx = RewardContext {
                        failed: true,
                        action_valid: true,
                        ..Default::default()
                    };
                    (reward_of(action, &ctx, &cfg.reward), true, true)
                } else {
                    let bin = discretize(traj.health[self.pos], cfg.bins)?;
                    let first_visit = !self.visited[bin];
                    self.visited[bin] = true;
                    let ctx = RewardContext {
                        failed: false,
                        action_valid: true,
                        first_visit,
                        frugal_timing: false,
                    };
                    (reward_of(action, &ctx, &cfg.reward), false, false)
                }
            }
            Action::Replace => {
                let health = traj.health[self.pos];
                let ctx = RewardContext {
                    failed: false,
                    action_valid: true,
                    first_visit: false,
                    frugal_timing: health <= cfg.reward.frugal_threshold,
                };
                (reward_of(action, &ctx, &cfg.reward), true, false)
            }
            Action::Repair { .. } => unreachable!("rejected above"),
        };

        self.terminal = done;
        let obs = self.observe()?;
        Ok(StepOutcome {
            observation: obs.window_health,
            reward,
            done,
            info: StepInfo {
                failed,
                action_valid: true,
                budget_after: 0.0,
            },
        })
    }
}

impl Environment for DatasetEnv {
    fn reset(&mut self) -> Vec<f64> {
        self.reset_obs()
            .expect("validated trajectories always observe")
            .window_health
    }

    fn step(&mut self, action_index: usize) -> Result<StepOutcome, EnvError> {
        if action_index >= self.num_actions() {
            return Err(EnvError::BadActionIndex {
                index: action_index,
                actions: self.num_actions(),
            });
        }
        self.step_action(&Action::from_index(action_index))
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn obs_dim(&self) -> usize {
        self.config.window
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_engine(unit_id: u32, len: usize) -> HealthTrajectory {
        HealthTrajectory {
            unit_id,
            health: (0..len)
                .map(|i| 1.0 - i as f64 / (len - 1) as f64)
                .collect(),
        }
    }

    fn env_with(mode: SamplingMode, seed: u64) -> DatasetEnv {
        let cfg = DatasetEnvConfig {
            sampling: mode,
            ..Default::default()
        };
        DatasetEnv::new(cfg, vec![linear_engine(1, 101), linear_engine(2, 51)], seed).unwrap()
    }

    #[test]
    fn fresh_engine_observes_top_bin() {
        let mut env = env_with(SamplingMode::Sequential, 0);
        let obs = env.reset_obs().unwrap();
        assert_eq!(obs.window_bins, vec![19]);
        assert_eq!(obs.window_health, vec![1.0]);
    }

    #[test]
    fn random_start_is_within_bounds_and_deterministic() {
        let mut a = env_with(SamplingMode::RandomStart, 9);
        let mut b = env_with(SamplingMode::RandomStart, 9);
        for _ in 0..50 {
            a.reset_obs().unwrap();
            b.reset_obs().unwrap();
            assert_eq!(a.engine, b.engine);
            assert_eq!(a.pos, b.pos);
            assert!(a.pos <= a.current_engine().len() - 2);
        }
    }

    #[test]
    fn hold_at_last_cycle_fails_with_penalty() {
        let mut env = env_with(SamplingMode::Sequential, 1);
        env.reset_at(0, 99).unwrap();
        let out = env.step_action(&Action::Hold).unwrap();
        assert!(out.done);
        assert!(out.info.failed);
        assert_eq!(out.reward, env.config().reward.penalty);
    }

    #[test]
    fn frugal_replace_stacks_bonus() {
        let mut env = env_with(SamplingMode::Sequential, 2);
        // Health 0.18 at pos 82 of the 101-cycle linear engine.
        env.reset_at(0, 82).unwrap();
        assert!((env.current_health() - 0.18).abs() < 1e-12);
        let out = env.step_action(&Action::Replace).unwrap();
        let cfg = env.config().reward;
        assert_eq!(out.reward, cfg.replace + cfg.frugal);
        assert!(out.done);
        assert!(!out.info.failed);
    }

    #[test]
    fn early_replace_earns_base_reward_only() {
        let mut env = env_with(SamplingMode::Sequential, 3);
        env.reset_at(0, 10).unwrap(); // health 0.9
        let out = env.step_action(&Action::Replace).unwrap();
        assert_eq!(out.reward, env.config().reward.replace);
        assert!(out.done);
    }

    #[test]
    fn repair_is_unsupported() {
        let mut env = env_with(SamplingMode::Sequential, 4);
        env.reset_obs().unwrap();
        assert!(matches!(
            env.step_action(&Action::Repair { repair_type: 0 }),
            Err(EnvError::UnsupportedAction(_))
        ));
    }

    #[test]
    fn explore_bonus_only_on_first_bin_visit() {
        let cfg = DatasetEnvConfig {
            bins: 5,
            sampling: SamplingMode::Sequential,
            ..Default::default()
        };
        let mut env = DatasetEnv::new(cfg, vec![linear_engine(1, 101)], 0).unwrap();
        env.reset_obs().unwrap();
        let rewards: Vec<f64> = (0..30)
            .map(|_| env.step_action(&Action::Hold).unwrap().reward)
            .collect();
        let base = env.config().reward.hold_runtime;
        let bonus = base + env.config().reward.explore;
        // Bin width is 20 cycles; within 30 holds exactly one new bin
        // boundary (health 0.79) is crossed.
        let bonus_count = rewards.iter().filter(|&&r| (r - bonus).abs() < 1e-12).count();
        let base_count = rewards.iter().filter(|&&r| (r - base).abs() < 1e-12).count();
        assert_eq!(bonus_count, 1, "rewards: {rewards:?}");
        assert_eq!(base_count, 29);
    }

    #[test]
    fn every_episode_terminates_within_trajectory_length() {
        let mut env = env_with(SamplingMode::RandomStart, 5);
        for _ in 0..20 {
            env.reset_obs().unwrap();
            let max_len = env.current_engine().len();
            let mut steps = 0;
            loop {
                let out = env.step_action(&Action::Hold).unwrap();
                steps += 1;
                if out.done {
                    break;
                }
                assert!(steps <= max_len, "episode exceeded trajectory length");
            }
        }
    }

    #[test]
    fn window_left_pads_with_episode_start() {
        let cfg = DatasetEnvConfig {
            window: 3,
            sampling: SamplingMode::Sequential,
            ..Default::default()
        };
        let mut env = DatasetEnv::new(cfg, vec![linear_engine(1, 101)], 0).unwrap();
        let obs = env.reset_obs().unwrap();
        assert_eq!(obs.window_health, vec![1.0, 1.0, 1.0]);
        env.step_action(&Action::Hold).unwrap();
        let obs = env.observe().unwrap();
        assert_eq!(obs.window_health, vec![1.0, 1.0, 0.99]);
    }
}
