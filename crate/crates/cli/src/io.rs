//! Atomic file output and the health-trajectory CSV format.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use pdmrl_core::cmapss::HealthTrajectory;

/// Write via a temp file in the same directory plus rename, so an
/// interrupted command never leaves a truncated file under the final name.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create directory {}", dir.display()))?;
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "out".to_string());
    let tmp = dir.join(format!(".tmp-{file_name}"));
    fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

/// `unit_id,cycle,health` rows for one engine.
pub fn health_csv(traj: &HealthTrajectory) -> String {
    let mut out = String::from("unit_id,cycle,health\n");
    for (i, &h) in traj.health.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", traj.unit_id, i + 1, h));
    }
    out
}

pub fn health_file_name(unit_id: u32) -> String {
    format!("unit_{unit_id:03}.csv")
}

/// Load every per-engine health CSV under `dir`, sorted by unit id.
pub fn load_health_dir(dir: &Path) -> Result<Vec<HealthTrajectory>> {
    if !dir.is_dir() {
        bail!(
            "health directory {} not found; run `pdmrl ingest` first",
            dir.display()
        );
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        out.push(parse_health_csv(&path)?);
    }
    if out.is_empty() {
        bail!("no health CSVs under {}", dir.display());
    }
    out.sort_by_key(|t| t.unit_id);
    Ok(out)
}

fn parse_health_csv(path: &Path) -> Result<HealthTrajectory> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut unit_id = None;
    let mut health = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line.trim() != "unit_id,cycle,health" {
                bail!("{}: unexpected header {line:?}", path.display());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            bail!("{}:{}: expected 3 columns", path.display(), idx + 1);
        }
        let unit: u32 = cols[0]
            .parse()
            .with_context(|| format!("{}:{}: bad unit id", path.display(), idx + 1))?;
        if *unit_id.get_or_insert(unit) != unit {
            bail!("{}: mixed unit ids in one file", path.display());
        }
        let value: f64 = cols[2]
            .parse()
            .with_context(|| format!("{}:{}: bad health value", path.display(), idx + 1))?;
        health.push(value);
    }
    let unit_id = unit_id.ok_or_else(|| anyhow::anyhow!("{}: no rows", path.display()))?;
    Ok(HealthTrajectory { unit_id, health })
}
