//! Per-sensor z-score normalization.

use serde::{Deserialize, Serialize};

use super::{Trajectory, SENSOR_COUNT};

/// Per-sensor mean and population standard deviation, with a mask for
/// constant columns (σ < 1e-12) that map to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant_mask: Vec<bool>,
}

impl NormalizationStats {
    /// Compute pooled statistics over every record of every trajectory.
    pub fn from_trajectories(trajectories: &[Trajectory]) -> Self {
        let mut sum = [0.0; SENSOR_COUNT];
        let mut sum_sq = [0.0; SENSOR_COUNT];
        let mut count = 0usize;
        for traj in trajectories {
            for rec in &traj.records {
                for (i, &v) in rec.sensors.iter().enumerate() {
                    sum[i] += v;
                    sum_sq[i] += v * v;
                }
            }
            count += traj.records.len();
        }
        let n = count.max(1) as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let std: Vec<f64> = sum_sq
            .iter()
            .zip(&mean)
            .map(|(&sq, &m)| (sq / n - m * m).max(0.0).sqrt())
            .collect();
        let constant_mask = std.iter().map(|&s| s < 1e-12).collect();
        Self {
            mean,
            std,
            constant_mask,
        }
    }

    #[inline]
    pub fn apply(&self, sensor: usize, value: f64) -> f64 {
        if self.constant_mask[sensor] {
            0.0
        } else {
            (value - self.mean[sensor]) / self.std[sensor]
        }
    }
}

/// Normalize every sensor column to zero mean and unit population standard
/// deviation. When `stats` is supplied (the held-out-set path) those
/// statistics are reused instead of refit, so held-out columns need not end
/// up centered.
pub fn zscore_normalize(
    trajectories: &[Trajectory],
    stats: Option<&NormalizationStats>,
) -> (Vec<Trajectory>, NormalizationStats) {
    let stats = match stats {
        Some(s) => s.clone(),
        None => NormalizationStats::from_trajectories(trajectories),
    };
    let normalized = trajectories
        .iter()
        .map(|traj| {
            let records = traj
                .records
                .iter()
                .map(|rec| {
                    let mut out = rec.clone();
                    for i in 0..SENSOR_COUNT {
                        out.sensors[i] = stats.apply(i, rec.sensors[i]);
                    }
                    out
                })
                .collect();
            Trajectory {
                unit_id: traj.unit_id,
                records,
                rul: traj.rul.clone(),
            }
        })
        .collect();
    (normalized, stats)
}
