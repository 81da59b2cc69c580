//! Trend-based sensor selection.

use super::{DataError, Trajectory, SENSOR_COUNT};
use crate::linalg::ols;

/// Default |t-statistic| threshold on the per-sensor slope.
pub const DEFAULT_T_THRESHOLD: f64 = 4.0;

/// Keep sensors whose pooled regression against cycle shows a significant
/// slope (|t| ≥ threshold). Constant sensors are always excluded.
pub fn select_informative_sensors(
    trajectories: &[Trajectory],
    t_threshold: f64,
) -> Result<Vec<usize>, DataError> {
    if trajectories.iter().all(|t| t.is_empty()) {
        return Err(DataError::NotEnoughData("no records".into()));
    }
    let mut selected = Vec::new();
    for sensor in 0..SENSOR_COUNT {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for traj in trajectories {
            for rec in &traj.records {
                xs.push(rec.cycle as f64);
                ys.push(rec.sensors[sensor]);
            }
        }
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / ys.len() as f64;
        if var < 1e-24 {
            continue;
        }
        let fit = ols(&xs, &ys);
        if fit.t_stat.abs() >= t_threshold {
            selected.push(sensor);
        }
    }
    if selected.is_empty() {
        return Err(DataError::NoInformativeSensors);
    }
    Ok(selected)
}
