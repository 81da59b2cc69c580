//! `ingest`: raw data → per-engine health CSVs plus a degradation-fit
//! report.

use anyhow::{Context, Result};

use pdmrl_core::cmapss::{
    fit_degradation_model, parse_cmapss_file, pca_health_indicator, rescale_health,
    select_informative_sensors, synth_generate, zscore_normalize, HealthTrajectory,
};

use crate::config::{DataSection, DatasetSection, EnvSection, RunConfig};
use crate::io::{health_csv, health_file_name, write_atomic};

/// Minimum cycles for an engine to enter the pipeline output.
const MIN_ENGINE_CYCLES: usize = 10;

/// Produce the health trajectories for the configured data source without
/// touching the filesystem.
pub fn ingest_health_trajectories(config: &RunConfig) -> Result<Vec<HealthTrajectory>> {
    let section = match &config.env {
        EnvSection::Dataset(d) => d.clone(),
        EnvSection::Synthetic(_) => DatasetSection::default(),
    };
    let mut healths = match &config.data {
        DataSection::Cmapss { path } => {
            let trajectories = parse_cmapss_file(path)
                .with_context(|| format!("parsing {}", path.display()))?;
            log::info!(
                "parsed {} trajectories from {}",
                trajectories.len(),
                path.display()
            );
            let (normalized, _stats) = zscore_normalize(&trajectories, None);
            let sensors =
                select_informative_sensors(&normalized, section.sensor_t_threshold)?;
            log::info!("selected sensors: {sensors:?}");
            pca_health_indicator(&normalized, &sensors)?
        }
        DataSection::Synthetic { config: synth } => {
            let raw = synth_generate(synth, config.seed)?;
            // Bring the raw model curves onto the health convention
            // (max = 1, failure = 0).
            let mut rescaled = Vec::with_capacity(raw.len());
            for traj in raw {
                match rescale_health(&traj.health) {
                    Ok(health) => rescaled.push(HealthTrajectory {
                        unit_id: traj.unit_id,
                        health,
                    }),
                    Err(err) => log::warn!("unit {}: skipped ({err})", traj.unit_id),
                }
            }
            rescaled
        }
    };
    healths.retain(|t| {
        if t.len() < MIN_ENGINE_CYCLES {
            log::warn!(
                "unit {}: only {} cycles, skipping (needs {MIN_ENGINE_CYCLES})",
                t.unit_id,
                t.len()
            );
            false
        } else {
            true
        }
    });
    if healths.is_empty() {
        anyhow::bail!("no usable engines after filtering");
    }
    Ok(healths)
}

/// Run parse → normalize → select → PCA → rescale → fit and write
/// artifacts.
pub fn cmd_ingest(config: &RunConfig) -> Result<()> {
    let healths = ingest_health_trajectories(config)?;

    let health_dir = config.out_dir.join("health");
    for traj in &healths {
        let path = health_dir.join(health_file_name(traj.unit_id));
        write_atomic(&path, &health_csv(traj))?;
    }

    let mut fits = String::from("unit_id,a,b,d,sse\n");
    let mut fitted = 0usize;
    for traj in &healths {
        match fit_degradation_model(&traj.health) {
            Ok(fit) => {
                fits.push_str(&format!(
                    "{},{},{},{},{}\n",
                    traj.unit_id, fit.a, fit.b, fit.d, fit.residual_sse
                ));
                fitted += 1;
            }
            Err(err) => log::warn!("unit {}: fit failed ({err})", traj.unit_id),
        }
    }
    write_atomic(&config.out_dir.join("fits.csv"), &fits)?;

    println!(
        "ingest: wrote {} health trajectories and {} fits under {}",
        healths.len(),
        fitted,
        config.out_dir.display()
    );
    Ok(())
}
