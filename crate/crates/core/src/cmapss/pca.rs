//! First-principal-component health indicator.

use super::{DataError, HealthTrajectory, Trajectory};
use crate::linalg::{pearson, symmetric_eigen, SquareMat};

/// Project every record onto the first principal component of the pooled
/// covariance over the selected sensors, orient the component so the score
/// trends downward with cycle, then rescale each engine to [0,1] with the
/// failure cycle at 0.
///
/// Engines whose projected score is flat (no span between maximum and
/// failure value) are skipped with a warning.
pub fn pca_health_indicator(
    trajectories: &[Trajectory],
    sensors: &[usize],
) -> Result<Vec<HealthTrajectory>, DataError> {
    if sensors.len() < 2 {
        return Err(DataError::NotEnoughData(
            "PCA needs at least 2 selected sensors".into(),
        ));
    }
    let total_records: usize = trajectories.iter().map(|t| t.len()).sum();
    if total_records < 2 {
        return Err(DataError::NotEnoughData(
            "covariance needs at least 2 records".into(),
        ));
    }

    let component = first_component(trajectories, sensors)?;

    // Pooled mean for centering the projections.
    let dims = sensors.len();
    let mut mean = vec![0.0; dims];
    for traj in trajectories {
        for rec in &traj.records {
            for (k, &s) in sensors.iter().enumerate() {
                mean[k] += rec.sensors[s];
            }
        }
    }
    for m in &mut mean {
        *m /= total_records as f64;
    }

    // Orient: score should anti-correlate with cycle.
    let mut scores = Vec::with_capacity(total_records);
    let mut cycles = Vec::with_capacity(total_records);
    for traj in trajectories {
        for rec in &traj.records {
            let mut dot = 0.0;
            for (k, &s) in sensors.iter().enumerate() {
                dot += (rec.sensors[s] - mean[k]) * component[k];
            }
            scores.push(dot);
            cycles.push(rec.cycle as f64);
        }
    }
    let direction = if pearson(&scores, &cycles) > 0.0 { -1.0 } else { 1.0 };

    let mut out = Vec::with_capacity(trajectories.len());
    let mut offset = 0usize;
    for traj in trajectories {
        let raw: Vec<f64> = scores[offset..offset + traj.len()]
            .iter()
            .map(|&v| v * direction)
            .collect();
        offset += traj.len();
        match rescale_health(&raw) {
            Ok(health) => out.push(HealthTrajectory {
                unit_id: traj.unit_id,
                health,
            }),
            Err(err) => {
                log::warn!("unit {}: skipping flat health projection ({err})", traj.unit_id);
            }
        }
    }
    if out.is_empty() {
        return Err(DataError::Degenerate(
            "every engine produced a flat health projection".into(),
        ));
    }
    Ok(out)
}

/// Largest-eigenvalue eigenvector of the pooled covariance of the selected
/// sensor columns.
fn first_component(trajectories: &[Trajectory], sensors: &[usize]) -> Result<Vec<f64>, DataError> {
    let dims = sensors.len();
    let mut count = 0usize;
    let mut mean = vec![0.0; dims];
    for traj in trajectories {
        for rec in &traj.records {
            for (k, &s) in sensors.iter().enumerate() {
                mean[k] += rec.sensors[s];
            }
            count += 1;
        }
    }
    let n = count as f64;
    for m in &mut mean {
        *m /= n;
    }

    let mut cov = SquareMat::zeros(dims);
    for traj in trajectories {
        for rec in &traj.records {
            for i in 0..dims {
                let di = rec.sensors[sensors[i]] - mean[i];
                for j in i..dims {
                    let dj = rec.sensors[sensors[j]] - mean[j];
                    let v = cov.get(i, j) + di * dj;
                    cov.set(i, j, v);
                }
            }
        }
    }
    for i in 0..dims {
        for j in i..dims {
            let v = cov.get(i, j) / n;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }

    let (_, vectors) = symmetric_eigen(&cov);
    Ok(vectors[0].clone())
}

/// Rescale a downward-trending score to the health convention: failure
/// (last value) at 0, maximum at 1, everything clamped to [0,1].
pub fn rescale_health(raw: &[f64]) -> Result<Vec<f64>, DataError> {
    if raw.len() < 2 {
        return Err(DataError::NotEnoughData(
            "health rescaling needs at least 2 samples".into(),
        ));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(DataError::NonFinite("health values"));
    }
    let last = *raw.last().expect("non-empty");
    let max = raw.iter().cloned().fold(f64::MIN, f64::max);
    let span = max - last;
    if span < 1e-12 {
        return Err(DataError::Degenerate("health span is zero".into()));
    }
    Ok(raw
        .iter()
        .map(|&v| ((v - last) / span).clamp(0.0, 1.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmapss::{RawRecord, SENSOR_COUNT};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn unit_from_rows(rows: Vec<[f64; SENSOR_COUNT]>) -> Trajectory {
        let records: Vec<RawRecord> = rows
            .into_iter()
            .enumerate()
            .map(|(i, sensors)| RawRecord {
                unit_id: 1,
                cycle: i as u32 + 1,
                op_settings: [0.0; 3],
                sensors,
            })
            .collect();
        let n = records.len();
        Trajectory {
            unit_id: 1,
            records,
            rul: (0..n).map(|t| (n - 1 - t) as u32).collect(),
        }
    }

    #[test]
    fn rank_one_data_aligns_with_its_axis() {
        // Sensors 0 and 1 carry the same decreasing signal; component must
        // be (±1/√2, ±1/√2) on those coordinates.
        let rows: Vec<[f64; SENSOR_COUNT]> = (0..20)
            .map(|i| {
                let mut s = [0.0; SENSOR_COUNT];
                s[0] = 10.0 - i as f64;
                s[1] = 10.0 - i as f64;
                s
            })
            .collect();
        let traj = unit_from_rows(rows);
        let comp = first_component(&[traj], &[0, 1]).unwrap();
        assert!((comp[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((comp[1].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((comp[0] - comp[1]).abs() < 1e-9, "same sign on both axes");
    }

    #[test]
    fn projection_matches_eigen_oracle_up_to_sign() {
        // Oracle: nalgebra's symmetric eigensolver on the same covariance.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let rows: Vec<[f64; SENSOR_COUNT]> = (0..200)
            .map(|i| {
                let t = i as f64 / 10.0;
                let mut s = [0.0; SENSOR_COUNT];
                let base = -t + normal.sample(&mut rng) * 0.3;
                s[0] = base;
                s[1] = 0.8 * base + normal.sample(&mut rng) * 0.2;
                s[2] = -0.5 * base + normal.sample(&mut rng) * 0.4;
                s
            })
            .collect();
        let traj = unit_from_rows(rows.clone());
        let comp = first_component(&[traj], &[0, 1, 2]).unwrap();

        let n = rows.len() as f64;
        let mut mean = [0.0f64; 3];
        for r in &rows {
            for k in 0..3 {
                mean[k] += r[k];
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut cov = nalgebra::Matrix3::<f64>::zeros();
        for r in &rows {
            for i in 0..3 {
                for j in 0..3 {
                    cov[(i, j)] += (r[i] - mean[i]) * (r[j] - mean[j]) / n;
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(cov);
        let mut best = 0;
        for k in 0..3 {
            if eig.eigenvalues[k] > eig.eigenvalues[best] {
                best = k;
            }
        }
        let oracle = eig.eigenvectors.column(best);

        let dot: f64 = (0..3).map(|k| comp[k] * oracle[k]).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        for k in 0..3 {
            assert!(
                (comp[k] - sign * oracle[k]).abs() < 1e-8,
                "component {k}: {} vs oracle {}",
                comp[k],
                sign * oracle[k]
            );
        }
    }

    #[test]
    fn outputs_satisfy_rescaling_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal = Normal::new(0.0, 0.05).unwrap();
        let rows: Vec<[f64; SENSOR_COUNT]> = (0..120)
            .map(|i| {
                let t = i as f64;
                let mut s = [0.0; SENSOR_COUNT];
                s[0] = -0.02 * t + normal.sample(&mut rng);
                s[1] = -0.015 * t + normal.sample(&mut rng);
                s[2] = 0.01 * t + normal.sample(&mut rng);
                s
            })
            .collect();
        let traj = unit_from_rows(rows);
        let healths = pca_health_indicator(&[traj], &[0, 1, 2]).unwrap();
        let h = &healths[0].health;
        assert_eq!(*h.last().unwrap(), 0.0);
        let max = h.iter().cloned().fold(f64::MIN, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
        assert!(h.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let cycles: Vec<f64> = (0..h.len()).map(|i| i as f64).collect();
        assert!(pearson(h, &cycles) < 0.0);
    }

    #[test]
    fn too_few_sensors_is_an_error() {
        let traj = unit_from_rows(vec![[0.0; SENSOR_COUNT]; 5]);
        assert!(pca_health_indicator(&[traj], &[0]).is_err());
    }

    #[test]
    fn too_few_records_is_an_error() {
        let traj = unit_from_rows(vec![[0.0; SENSOR_COUNT]; 1]);
        assert!(pca_health_indicator(&[traj], &[0, 1]).is_err());
    }
}
