//! `eval` and `predict`: greedy rollouts of a trained checkpoint over the
//! engine sets.

use std::path::Path;

use anyhow::{bail, Context, Result};

use pdmrl_core::agent::{
    evaluate_policy, predict_replacement_point, Checkpoint, EvalPolicy, ReplacementOutcome,
    Variant,
};
use pdmrl_core::cmapss::HealthTrajectory;
use pdmrl_core::env::DatasetEnvConfig;

use crate::config::{EnvSection, RunConfig};
use crate::io::{load_health_dir, write_atomic};

use super::split_train_eval;

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read checkpoint {}", path.display()))?;
    Ok(Checkpoint::from_json(&text)?)
}

fn dataset_pieces(
    config: &RunConfig,
) -> Result<(
    DatasetEnvConfig,
    Vec<HealthTrajectory>,
    Vec<HealthTrajectory>,
)> {
    let EnvSection::Dataset(section) = &config.env else {
        bail!("eval/predict need a dataset environment");
    };
    let healths = load_health_dir(&config.out_dir.join("health"))?;
    let (train_set, eval_set) =
        split_train_eval(&healths, section.train_engines, section.eval_engines);
    Ok((config.dataset_env_config(section), train_set, eval_set))
}

fn check_dims(config: &DatasetEnvConfig, ckpt: &Checkpoint) -> Result<()> {
    if ckpt.obs_dim != config.window || ckpt.n_actions != 2 {
        bail!(
            "checkpoint dimensions ({} obs, {} actions) do not match the configured dataset \
             environment ({} obs, 2 actions)",
            ckpt.obs_dim,
            ckpt.n_actions,
            config.window
        );
    }
    Ok(())
}

/// Summary statistics over the train and holdout engine sets.
pub fn cmd_eval(config: &RunConfig, checkpoint_path: &Path) -> Result<()> {
    let ckpt = load_checkpoint(checkpoint_path)?;
    let (env_config, train_set, eval_set) = dataset_pieces(config)?;
    check_dims(&env_config, &ckpt)?;

    let mut out = String::from(
        "set,variant,episodes,mean_return,median_replace_health,std_replace_health,failures\n",
    );
    for (name, set) in [("train", &train_set), ("validation", &eval_set)] {
        let policy = match ckpt.variant {
            Variant::Random => EvalPolicy::Random(config.seed),
            _ => EvalPolicy::Greedy(&ckpt.net),
        };
        let summary = evaluate_policy(
            &policy,
            set,
            &env_config,
            config.agent.gamma,
            set.len(),
        )?;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            name,
            ckpt.variant.name(),
            summary.episodes,
            summary.mean_return,
            summary.median_replace_health,
            summary.std_replace_health,
            summary.failures
        ));
        println!(
            "eval[{name}]: median replacement health {:.3} (std {:.3}), mean return {:.3}, {} failures",
            summary.median_replace_health,
            summary.std_replace_health,
            summary.mean_return,
            summary.failures
        );
    }
    write_atomic(&config.out_dir.join("eval_summary.csv"), &out)?;
    Ok(())
}

/// Per-engine replacement points over the holdout set.
pub fn cmd_predict(config: &RunConfig, checkpoint_path: &Path) -> Result<()> {
    let ckpt = load_checkpoint(checkpoint_path)?;
    let (env_config, _train_set, eval_set) = dataset_pieces(config)?;
    check_dims(&env_config, &ckpt)?;

    let mut out = String::from("engine,replace_cycle,replace_health\n");
    let mut replaced = 0usize;
    for traj in &eval_set {
        match predict_replacement_point(&ckpt.net, traj, &env_config)? {
            ReplacementOutcome::Replaced { cycle, health } => {
                replaced += 1;
                out.push_str(&format!("{},{},{}\n", traj.unit_id, cycle, health));
            }
            ReplacementOutcome::Failed => {
                out.push_str(&format!("{},failed,\n", traj.unit_id));
            }
        }
    }
    write_atomic(&config.out_dir.join("predictions.csv"), &out)?;
    println!(
        "predict: {replaced}/{} engines got a replacement point → {}",
        eval_set.len(),
        config.out_dir.join("predictions.csv").display()
    );
    Ok(())
}
