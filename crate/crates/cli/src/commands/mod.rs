mod benchmark;
mod evaluate;
mod ingest;
mod train;

pub use benchmark::cmd_benchmark;
pub use evaluate::{cmd_eval, cmd_predict};
pub use ingest::{cmd_ingest, ingest_health_trajectories};
pub use train::{cmd_train, split_train_eval, train_once};
