//! Synthetic health-trajectory generator, used when no dataset files are
//! present.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DataError, HealthTrajectory};
use crate::rng::{stream_rng, Stream};

/// Ranges for the synthetic degradation model. Per engine a length `L`,
/// exponent `b`, and offset `d` are drawn, and `a` is solved so the
/// noiseless curve `1 - d - exp(a·t^b)` crosses zero exactly at `t = L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_engines: usize,
    /// Inclusive bounds on the failure cycle.
    pub length_range: (usize, usize),
    pub noise_sigma: f64,
    /// Accepted band for the solved growth coefficient.
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    /// Negative offsets place the initial health near 1.
    pub d_range: (f64, f64),
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_engines: 100,
            length_range: (120, 350),
            // Comparable to the cycle-to-cycle jitter of PCA health
            // indicators on real turbofan data.
            noise_sigma: 0.05,
            a_range: (1e-9, 0.1),
            b_range: (1.2, 2.2),
            d_range: (-0.95, -0.8),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.n_engines == 0 {
            return Err(DataError::InvalidConfig("n_engines must be positive".into()));
        }
        if self.length_range.0 < 2 || self.length_range.0 > self.length_range.1 {
            return Err(DataError::InvalidConfig(format!(
                "empty length range {:?}",
                self.length_range
            )));
        }
        if self.noise_sigma < 0.0 {
            return Err(DataError::InvalidConfig("noise_sigma must be >= 0".into()));
        }
        for (name, range) in [
            ("a_range", self.a_range),
            ("b_range", self.b_range),
            ("d_range", self.d_range),
        ] {
            if range.0 > range.1 {
                return Err(DataError::InvalidConfig(format!("empty {name} {range:?}")));
            }
        }
        if self.d_range.1 >= 1.0 {
            return Err(DataError::InvalidConfig(
                "d must stay below 1 so the curve can cross zero".into(),
            ));
        }
        Ok(())
    }
}

/// Generate seeded health trajectories from the degradation model plus
/// Gaussian noise, clamped to [0,1] and terminated at the first crossing
/// below zero.
pub fn synth_generate(config: &SynthConfig, seed: u64) -> Result<Vec<HealthTrajectory>, DataError> {
    config.validate()?;
    let mut rng = stream_rng(seed, Stream::Data);
    let noise = if config.noise_sigma > 0.0 {
        Some(Normal::new(0.0, config.noise_sigma).expect("sigma validated"))
    } else {
        None
    };

    let mut out = Vec::with_capacity(config.n_engines);
    for unit in 1..=config.n_engines {
        let mut accepted = None;
        for _ in 0..200 {
            let length = rng.gen_range(config.length_range.0..=config.length_range.1);
            let b = rng.gen_range(config.b_range.0..=config.b_range.1);
            let d = rng.gen_range(config.d_range.0..=config.d_range.1);
            // Zero crossing at t = L: exp(a·L^b) = 1 - d.
            let a = (1.0 - d).ln() / (length as f64).powf(b);
            if a >= config.a_range.0 && a <= config.a_range.1 {
                accepted = Some((length, a, b, d));
                break;
            }
        }
        let Some((length, a, b, d)) = accepted else {
            return Err(DataError::InvalidConfig(
                "could not draw parameters inside a_range; ranges are inconsistent".into(),
            ));
        };

        let mut health = Vec::with_capacity(length);
        for t in 1..=length {
            let mut h = 1.0 - d - (a * (t as f64).powf(b)).exp();
            if let Some(n) = &noise {
                h += n.sample(&mut rng);
            }
            if h <= 0.0 || t == length {
                // Failure sample: the crossing itself, clamped to 0.
                health.push(0.0);
                break;
            }
            health.push(h.clamp(0.0, 1.0));
        }
        out.push(HealthTrajectory {
            unit_id: unit as u32,
            health,
        });
    }
    Ok(out)
}
