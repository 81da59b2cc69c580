//! Training and evaluation: TD targets, the prioritized Double-DQN loop
//! with parameter noise, ablation variants, tabular oracles, and
//! replacement-point prediction.

pub mod eval;
mod tabular;
mod targets;
mod train;

pub use eval::{
    dataset_dp_optimal_return, evaluate_policy, predict_replacement_point, EvalPolicy,
    EvalSummary, ReplacementOutcome, Rollout, RolloutResult,
};
pub use tabular::{
    exact_policy_value, greedy_policy, tabular_q_update, value_iteration, QTable, TabularMdp,
};
pub use targets::{td_target_ddqn, td_target_dqn};
pub use train::{
    select_action, train, AgentConfig, Checkpoint, EvalRow, Evaluator, StepRow, TrainLog,
    TrainMeta, TrainOutput, Variant, CHECKPOINT_VERSION,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Net(#[from] crate::neural::NetError),
    #[error(transparent)]
    Replay(#[from] crate::replay::ReplayError),
    #[error(transparent)]
    Env(#[from] crate::env::EnvError),
    #[error("{what} did not converge within the iteration limit")]
    NonConvergence { what: &'static str },
    #[error("invalid agent config: {0}")]
    BadConfig(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
