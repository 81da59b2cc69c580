//! Predictive-maintenance reinforcement learning toolkit.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`cmapss`] — turbofan sensor ingestion: parsing, normalization, sensor
//!   selection, PCA health indicators, degradation-model fitting, and a
//!   synthetic fallback generator.
//! * [`env`] — the two maintenance MDPs: a synthetic equipment-degradation
//!   environment (Replace/Repair/Hold under a budget) and a dataset
//!   environment that walks health trajectories (Replace/Hold).
//! * [`replay`] — prioritized experience replay over a sum tree with
//!   importance-sampling weights.
//! * [`neural`] — a small dense Q-network with explicit backpropagation,
//!   Adam, target-network cloning, and parameter-space noise.
//! * [`agent`] — TD targets, the full training loop with ablation variants,
//!   tabular oracles, and policy evaluation.

pub mod agent;
pub mod cmapss;
pub mod env;
pub mod linalg;
pub mod neural;
pub mod replay;
pub mod rng;

pub use agent::{AgentConfig, TrainLog, Variant};
pub use cmapss::{DegradationFit, HealthTrajectory, NormalizationStats, RawRecord, Trajectory};
pub use env::{Action, DatasetEnvConfig, EnvState, RewardConfig, StepOutcome, SyntheticEnvConfig};
pub use neural::{AdamState, DenseNet, NetConfig, NoiseState};
pub use replay::{PerConfig, PrioritizedReplay, Transition};
