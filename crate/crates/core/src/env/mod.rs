//! Maintenance MDPs.
//!
//! Two environments share one action vocabulary and reward scheme:
//!
//! * [`SyntheticEnv`] — the equipment-degradation model: discrete sensor
//!   states advancing under an exponential hazard, a binary temperature
//!   mode that widens state skips, and Replace/Repair/Hold actions drawing
//!   on a maintenance budget.
//! * [`DatasetEnv`] — walks real (or synthesized) health trajectories one
//!   cycle per Hold, with Replace ending the episode; reaching the failure
//!   cycle is heavily penalized.

mod dataset;
mod reward;
mod synthetic;

pub use dataset::{DatasetEnv, DatasetEnvConfig, DatasetObs, SamplingMode};
pub use reward::{reward_of, RewardConfig, RewardContext};
pub use synthetic::{CostRegime, SyntheticEnv, SyntheticEnvConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error("step on a terminal state; call reset first")]
    Terminal,
    #[error("action {0:?} is not supported by this environment")]
    UnsupportedAction(Action),
    #[error("action index {index} out of range for {actions} actions")]
    BadActionIndex { index: usize, actions: usize },
    #[error("value {value} outside [0,1] cannot be discretized")]
    OutOfRange { value: f64 },
}

/// Maintenance action: full reset, partial reversion by repair type, or
/// no-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Replace,
    Repair { repair_type: usize },
    Hold,
}

/// Action indices shared by both environments: Hold = 0, Replace = 1,
/// Repair arms follow.
impl Action {
    pub fn index(&self) -> usize {
        match self {
            Action::Hold => 0,
            Action::Replace => 1,
            Action::Repair { repair_type } => 2 + repair_type,
        }
    }

    pub fn from_index(index: usize) -> Action {
        match index {
            0 => Action::Hold,
            1 => Action::Replace,
            n => Action::Repair {
                repair_type: n - 2,
            },
        }
    }
}

/// Synthetic-environment observation: discretized sensor state, binary
/// temperature mode, remaining budget, and the step counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub sensor_state: u32,
    pub temp: u8,
    pub budget: f64,
    pub t: u32,
}

/// Per-step metadata alongside the reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub failed: bool,
    pub action_valid: bool,
    pub budget_after: f64,
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Continuous feature vector for the agent.
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Uniform interface the training loop drives.
pub trait Environment {
    /// Start a new episode and return the initial observation.
    fn reset(&mut self) -> Vec<f64>;
    /// Apply the action with the given index.
    fn step(&mut self, action_index: usize) -> Result<StepOutcome, EnvError>;
    fn num_actions(&self) -> usize;
    fn obs_dim(&self) -> usize;
}

/// Map `x ∈ [0,1]` to `floor(x·bins)` clamped to `[0, bins-1]`.
pub fn discretize(x: f64, bins: usize) -> Result<usize, EnvError> {
    assert!(bins >= 2, "discretization needs at least 2 bins");
    if !(-1e-9..=1.0 + 1e-9).contains(&x) {
        return Err(EnvError::OutOfRange { value: x });
    }
    let clamped = x.clamp(0.0, 1.0);
    Ok(((clamped * bins as f64).floor() as usize).min(bins - 1))
}
