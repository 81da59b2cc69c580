//! Command-line entry point for the predictive-maintenance RL pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pdmrl_cli::commands;
use pdmrl_cli::config::{Overrides, RunConfig};
use pdmrl_core::agent::Variant;

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse()
}

#[derive(Parser)]
#[command(
    name = "pdmrl",
    about = "Predictive-maintenance reinforcement learning: ingest sensor data, train \
             maintenance agents, and evaluate replacement policies",
    version
)]
struct Cli {
    /// Path to a JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed overriding the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Agent variant overriding the config file
    /// (random|dqn_vanilla|ddqn_per|pddqn_pn).
    #[arg(long, global = true, value_parser = parse_variant)]
    variant: Option<Variant>,
    /// Output directory overriding the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sensor data file overriding the config file's data source.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse/generate sensor data and derive per-engine health indicators.
    Ingest,
    /// Train the configured agent variant and write log + checkpoint.
    Train,
    /// Summarize a trained checkpoint over the train and holdout engines.
    Eval {
        /// Checkpoint path; defaults to <out_dir>/checkpoint.json.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Emit per-engine replacement points for a trained checkpoint.
    Predict {
        /// Checkpoint path; defaults to <out_dir>/checkpoint.json.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train every variant on shared seeds and emit comparison tables.
    Benchmark,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();

    let overrides = Overrides {
        seed: cli.seed,
        variant: cli.variant,
        out: cli.out.clone(),
        data: cli.data.clone(),
    };
    let config = match RunConfig::load(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("config error: {err:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(err) = config.validate() {
        eprintln!("config error: {err:#}");
        return ExitCode::from(2);
    }

    let result = match &cli.command {
        Command::Ingest => commands::cmd_ingest(&config),
        Command::Train => commands::cmd_train(&config),
        Command::Eval { checkpoint } => {
            let path = checkpoint
                .clone()
                .unwrap_or_else(|| config.out_dir.join("checkpoint.json"));
            commands::cmd_eval(&config, &path)
        }
        Command::Predict { checkpoint } => {
            let path = checkpoint
                .clone()
                .unwrap_or_else(|| config.out_dir.join("checkpoint.json"));
            commands::cmd_predict(&config, &path)
        }
        Command::Benchmark => commands::cmd_benchmark(&config),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
