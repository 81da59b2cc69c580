//! `benchmark`: train every configured variant on the same seeds and emit
//! aligned learning curves plus a steps-to-threshold table.

use std::collections::BTreeMap;

use anyhow::Result;

use pdmrl_core::agent::TrainLog;

use crate::config::RunConfig;
use crate::ema::ema_smooth;
use crate::io::write_atomic;

use super::train_once;

/// EMA of episodic returns resampled onto fixed step buckets so variants
/// align column-wise.
fn binned_ema_curve(log: &TrainLog, factor: f64, bin: u64, total: u64) -> Vec<f64> {
    let smoothed: Vec<f64> = ema_smooth(
        &log.episode_returns.iter().map(|&(_, r)| r).collect::<Vec<_>>(),
        factor,
    );
    let n_bins = (total / bin.max(1)) as usize;
    let mut out = vec![f64::NAN; n_bins];
    let mut idx = 0usize;
    let mut last = f64::NAN;
    for (b, slot) in out.iter_mut().enumerate() {
        let step_end = (b as u64 + 1) * bin;
        while idx < log.episode_returns.len() && log.episode_returns[idx].0 < step_end {
            last = smoothed[idx];
            idx += 1;
        }
        *slot = last;
    }
    out
}

pub fn cmd_benchmark(config: &RunConfig) -> Result<()> {
    let bench = &config.benchmark;
    let mut seeds = vec![config.seed];
    seeds.extend(bench.seeds.iter().copied().filter(|s| *s != config.seed));

    // variant name -> per-seed logs
    let mut logs: BTreeMap<&'static str, Vec<TrainLog>> = BTreeMap::new();
    for &variant in &bench.variants {
        for &seed in &seeds {
            let mut run_cfg = config.clone();
            run_cfg.seed = seed;
            run_cfg.agent.seed = seed;
            run_cfg.agent.variant = variant;
            log::info!("benchmark: training {} with seed {seed}", variant.name());
            let output = train_once(&run_cfg)?;
            logs.entry(variant.name()).or_default().push(output.log);
        }
    }

    let total = config.agent.total_steps;
    let bin = bench.curve_bin.max(1);

    // Aligned curves: step index plus one column per (variant, seed).
    let mut header = String::from("step");
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (name, variant_logs) in &logs {
        for (i, log) in variant_logs.iter().enumerate() {
            header.push_str(&format!(",{name}_seed{}", seeds[i]));
            columns.push(binned_ema_curve(log, bench.ema_factor, bin, total));
        }
    }
    let n_bins = (total / bin) as usize;
    let mut curves = header;
    curves.push('\n');
    for b in 0..n_bins {
        curves.push_str(&format!("{}", (b as u64 + 1) * bin));
        for col in &columns {
            curves.push_str(&format!(",{}", col[b]));
        }
        curves.push('\n');
    }
    write_atomic(&config.out_dir.join("benchmark_curves.csv"), &curves)?;

    // Steps-to-threshold table from greedy-evaluation snapshots.
    let mut summary =
        String::from("variant,seed,steps_to_threshold,final_oracle_ratio,final_median_replace_health\n");
    for (name, variant_logs) in &logs {
        for (i, log) in variant_logs.iter().enumerate() {
            let reached = log
                .steps_to_oracle_ratio(bench.threshold_ratio)
                .map(|s| s.to_string())
                .unwrap_or_else(|| "never".to_string());
            let (ratio, median) = log
                .evals
                .last()
                .map(|e| (e.oracle_ratio, e.median_replace_health))
                .unwrap_or((f64::NAN, f64::NAN));
            summary.push_str(&format!("{name},{},{reached},{ratio},{median}\n", seeds[i]));
            println!(
                "benchmark: {name} seed {} → steps-to-{:.0}% {}",
                seeds[i],
                bench.threshold_ratio * 100.0,
                reached
            );
        }
    }
    write_atomic(&config.out_dir.join("benchmark_summary.csv"), &summary)?;
    println!("benchmark: wrote curves and summary under {}", config.out_dir.display());
    Ok(())
}
