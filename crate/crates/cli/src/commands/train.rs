//! `train`: run the configured variant and write the log, evaluation
//! snapshots, checkpoint, and run metadata.

use anyhow::{bail, Result};

use pdmrl_core::agent::{train, Evaluator, TrainOutput};
use pdmrl_core::cmapss::HealthTrajectory;
use pdmrl_core::env::{DatasetEnv, SyntheticEnv};

use crate::config::{EnvSection, RunConfig};
use crate::io::{load_health_dir, write_atomic};

/// Leading engines train; the rest (optionally capped) are the evaluation
/// holdout. With a single engine it serves both roles.
pub fn split_train_eval(
    healths: &[HealthTrajectory],
    train_engines: usize,
    eval_cap: usize,
) -> (Vec<HealthTrajectory>, Vec<HealthTrajectory>) {
    let n_train = train_engines.clamp(1, healths.len());
    let train: Vec<_> = healths[..n_train].to_vec();
    let mut eval: Vec<_> = healths[n_train..].to_vec();
    if eval.is_empty() {
        eval = train.clone();
    }
    if eval_cap > 0 && eval.len() > eval_cap {
        eval.truncate(eval_cap);
    }
    (train, eval)
}

/// Train per the config, reading ingested health data for the dataset
/// environment. Pure in-memory variant of `cmd_train`.
pub fn train_once(config: &RunConfig) -> Result<TrainOutput> {
    match &config.env {
        EnvSection::Dataset(section) => {
            let healths = load_health_dir(&config.out_dir.join("health"))?;
            if healths.len() < section.train_engines {
                bail!(
                    "config asks for {} training engines but only {} are ingested",
                    section.train_engines,
                    healths.len()
                );
            }
            let (train_set, eval_set) =
                split_train_eval(&healths, section.train_engines, section.eval_engines);
            let env_config = config.dataset_env_config(section);
            let mut env = DatasetEnv::new(env_config.clone(), train_set, config.seed)?;
            let evaluator = Evaluator::Dataset {
                trajectories: eval_set,
                env_config,
            };
            Ok(train(
                &mut env,
                &config.agent,
                &config.replay,
                &config.network,
                &evaluator,
            )?)
        }
        EnvSection::Synthetic(section) => {
            let env_config = config.synthetic_env_config(section);
            let mut env = SyntheticEnv::new(env_config, config.seed)?;
            Ok(train(
                &mut env,
                &config.agent,
                &config.replay,
                &config.network,
                &Evaluator::None,
            )?)
        }
    }
}

pub fn cmd_train(config: &RunConfig) -> Result<()> {
    let output = train_once(config)?;

    let out = &config.out_dir;
    write_atomic(&out.join("train_log.csv"), &output.log.steps_csv())?;
    write_atomic(&out.join("train_evals.csv"), &output.log.evals_csv())?;
    write_atomic(
        &out.join("train_meta.json"),
        &serde_json::to_string_pretty(&output.log.meta)?,
    )?;
    write_atomic(&out.join("checkpoint.json"), &output.checkpoint.to_json()?)?;

    let episodes = output.log.episode_returns.len();
    println!(
        "train: {} steps, {} episodes, variant {} → {}",
        output.log.meta.total_steps,
        episodes,
        output.log.meta.variant.name(),
        out.display()
    );
    if let Some(last) = output.log.evals.last() {
        println!(
            "train: final eval mean return {:.3} (oracle ratio {:.3}), median replacement health {:.3}",
            last.mean_return, last.oracle_ratio, last.median_replace_health
        );
    }
    Ok(())
}
