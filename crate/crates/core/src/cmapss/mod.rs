//! Turbofan degradation data pipeline.
//!
//! Raw 26-column sensor files are parsed into per-engine [`Trajectory`]
//! values with remaining-useful-life labels, z-score normalized, reduced to
//! a scalar health indicator by PCA over trend-bearing sensors, and fitted
//! with an exponential degradation model. A seeded synthetic generator
//! stands in when no dataset files are available.

mod fit;
mod normalize;
mod pca;
mod select;
mod synth;

pub use fit::{fit_degradation_model, DegradationFit};
pub use normalize::{zscore_normalize, NormalizationStats};
pub use pca::{pca_health_indicator, rescale_health};
pub use select::{select_informative_sensors, DEFAULT_T_THRESHOLD};
pub use synth::{synth_generate, SynthConfig};

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use thiserror::Error;

/// Number of raw sensor columns in the dataset format.
pub const SENSOR_COUNT: usize = 21;
/// Operational-setting columns preceding the sensors.
pub const OP_SETTING_COUNT: usize = 3;
/// unit, cycle, 3 op settings, 21 sensors.
pub const COLUMN_COUNT: usize = 2 + OP_SETTING_COUNT + SENSOR_COUNT;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("file contains no records")]
    EmptyFile,
    #[error("unit {unit}: cycles are not consecutive from 1")]
    BadCycles { unit: u32 },
    #[error("no informative sensors")]
    NoInformativeSensors,
    #[error("not enough data: {0}")]
    NotEnoughData(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

/// One row of the 26-column dataset format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub unit_id: u32,
    pub cycle: u32,
    pub op_settings: [f64; OP_SETTING_COUNT],
    pub sensors: [f64; SENSOR_COUNT],
}

/// One engine's run-to-failure series with RUL labels
/// (`rul[t] = len - 1 - t`; the final cycle has RUL 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub unit_id: u32,
    pub records: Vec<RawRecord>,
    pub rul: Vec<u32>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Column of one sensor across the trajectory.
    pub fn sensor_column(&self, sensor: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.sensors[sensor]).collect()
    }
}

/// Scalar health indicator per engine: 1 ≈ new, 0 = failed at the last
/// cycle, values clamped to [0,1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthTrajectory {
    pub unit_id: u32,
    pub health: Vec<f64>,
}

impl HealthTrajectory {
    pub fn len(&self) -> usize {
        self.health.len()
    }

    pub fn is_empty(&self) -> bool {
        self.health.is_empty()
    }
}

/// Parse a whitespace-delimited 26-column file into per-unit trajectories
/// with RUL labels appended.
pub fn parse_cmapss_file(path: &Path) -> Result<Vec<Trajectory>, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_cmapss_reader(BufReader::new(file), &path.display().to_string())
}

/// Parse from any reader; `origin` only labels IO errors.
pub fn parse_cmapss_reader<R: BufRead>(
    reader: R,
    origin: &str,
) -> Result<Vec<Trajectory>, DataError> {
    // BTreeMap keeps unit order deterministic.
    let mut units: std::collections::BTreeMap<u32, Vec<RawRecord>> =
        std::collections::BTreeMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| DataError::Io {
            path: origin.to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != COLUMN_COUNT {
            return Err(DataError::Parse {
                line: line_no,
                message: format!("expected {COLUMN_COUNT} columns, found {}", tokens.len()),
            });
        }
        let parse_num = |tok: &str, what: &str| -> Result<f64, DataError> {
            tok.parse::<f64>().map_err(|_| DataError::Parse {
                line: line_no,
                message: format!("non-numeric {what}: {tok:?}"),
            })
        };
        let unit = parse_num(tokens[0], "unit id")?;
        let cycle = parse_num(tokens[1], "cycle")?;
        if unit < 1.0 || unit.fract() != 0.0 {
            return Err(DataError::Parse {
                line: line_no,
                message: format!("unit id must be a positive integer, got {unit}"),
            });
        }
        if cycle < 1.0 || cycle.fract() != 0.0 {
            return Err(DataError::Parse {
                line: line_no,
                message: format!("cycle must be a positive integer, got {cycle}"),
            });
        }
        let mut op_settings = [0.0; OP_SETTING_COUNT];
        for (i, slot) in op_settings.iter_mut().enumerate() {
            *slot = parse_num(tokens[2 + i], "op setting")?;
        }
        let mut sensors = [0.0; SENSOR_COUNT];
        for (i, slot) in sensors.iter_mut().enumerate() {
            *slot = parse_num(tokens[2 + OP_SETTING_COUNT + i], "sensor value")?;
        }
        units.entry(unit as u32).or_default().push(RawRecord {
            unit_id: unit as u32,
            cycle: cycle as u32,
            op_settings,
            sensors,
        });
    }

    if units.is_empty() {
        return Err(DataError::EmptyFile);
    }

    let mut trajectories = Vec::with_capacity(units.len());
    for (unit_id, mut records) in units {
        records.sort_by_key(|r| r.cycle);
        for (i, rec) in records.iter().enumerate() {
            if rec.cycle as usize != i + 1 {
                return Err(DataError::BadCycles { unit: unit_id });
            }
        }
        let n = records.len();
        let rul = (0..n).map(|t| (n - 1 - t) as u32).collect();
        trajectories.push(Trajectory {
            unit_id,
            records,
            rul,
        });
    }
    Ok(trajectories)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn line(unit: u32, cycle: u32, fill: f64) -> String {
        let mut cols = vec![unit.to_string(), cycle.to_string()];
        for i in 0..OP_SETTING_COUNT + SENSOR_COUNT {
            cols.push(format!("{}", fill + i as f64 * 0.5));
        }
        cols.join(" ")
    }

    #[test]
    fn three_cycle_engine_gets_descending_rul() {
        let text = [line(1, 1, 0.0), line(1, 2, 0.1), line(1, 3, 0.2)].join("\n");
        let trajs = parse_cmapss_reader(Cursor::new(text), "mem").unwrap();
        assert_eq!(trajs.len(), 1);
        assert_eq!(trajs[0].rul, vec![2, 1, 0]);
    }

    #[test]
    fn wrong_column_count_names_line() {
        let mut text = line(1, 1, 0.0);
        text.push('\n');
        text.push_str("1 2 3");
        let err = parse_cmapss_reader(Cursor::new(text), "mem").unwrap_err();
        match err {
            DataError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_numeric_token_names_line() {
        let mut good = line(1, 1, 0.0);
        let bad = good.replace("0.5", "oops");
        good.push('\n');
        good.push_str(&bad);
        let err = parse_cmapss_reader(Cursor::new(good), "mem").unwrap_err();
        match err {
            DataError::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("oops"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        let err = parse_cmapss_reader(Cursor::new("\n  \n"), "mem").unwrap_err();
        assert!(matches!(err, DataError::EmptyFile));
    }

    #[test]
    fn units_are_split_and_out_of_order_cycles_sorted() {
        let text = [
            line(2, 2, 0.0),
            line(1, 1, 0.0),
            line(2, 1, 0.0),
            line(1, 2, 0.0),
        ]
        .join("\n");
        let trajs = parse_cmapss_reader(Cursor::new(text), "mem").unwrap();
        assert_eq!(trajs.len(), 2);
        assert_eq!(trajs[0].unit_id, 1);
        assert_eq!(trajs[1].unit_id, 2);
        assert_eq!(trajs[1].records[0].cycle, 1);
        assert_eq!(trajs[1].records[1].cycle, 2);
    }

    #[test]
    fn gap_in_cycles_is_rejected() {
        let text = [line(1, 1, 0.0), line(1, 3, 0.0)].join("\n");
        let err = parse_cmapss_reader(Cursor::new(text), "mem").unwrap_err();
        assert!(matches!(err, DataError::BadCycles { unit: 1 }));
    }

    #[test]
    fn rul_invariant_holds() {
        let text: Vec<String> = (1..=7).map(|c| line(3, c, 0.3)).collect();
        let trajs = parse_cmapss_reader(Cursor::new(text.join("\n")), "mem").unwrap();
        let t = &trajs[0];
        for (i, &r) in t.rul.iter().enumerate() {
            assert_eq!(r as usize + i, t.len() - 1);
        }
    }
}
