//! Run configuration: one JSON document with nested sections, overridable
//! from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use pdmrl_core::agent::{AgentConfig, Variant};
use pdmrl_core::cmapss::SynthConfig;
use pdmrl_core::env::{
    CostRegime, DatasetEnvConfig, RewardConfig, SamplingMode, SyntheticEnvConfig,
};
use pdmrl_core::neural::NetConfig;
use pdmrl_core::replay::PerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSection {
    /// Parse a 26-column sensor file from disk.
    Cmapss { path: PathBuf },
    /// Generate seeded synthetic health trajectories.
    Synthetic { config: SynthConfig },
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection::Synthetic {
            config: SynthConfig::default(),
        }
    }
}

/// Dataset-environment section (reward comes from the top-level section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSection {
    pub bins: usize,
    pub window: usize,
    pub sampling: SamplingMode,
    /// Number of leading engines used for training; the rest are the
    /// evaluation holdout.
    pub train_engines: usize,
    /// Cap on holdout engines evaluated during training snapshots and by
    /// `eval`/`predict`; 0 means all.
    pub eval_engines: usize,
    /// |t|-statistic threshold for sensor selection during ingest.
    pub sensor_t_threshold: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            bins: 20,
            window: 1,
            sampling: SamplingMode::RandomStart,
            // A small pool of engines: with one engine the fixed
            // health-to-failure map is memorizable and the learned
            // replacement threshold drifts toward the brink; a pool makes
            // the same health reading genuinely ambiguous and anchors it.
            train_engines: 8,
            eval_engines: 0,
            sensor_t_threshold: 4.0,
        }
    }
}

/// Synthetic-environment section (reward comes from the top-level section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSection {
    pub s_max: u32,
    pub lambda: f64,
    pub temp_chain: [[f64; 2]; 2],
    pub high_temp_skip: (u32, u32),
    pub repair_effects: Vec<u32>,
    pub cost_replace: f64,
    pub cost_repair: Vec<f64>,
    pub budget_init: f64,
    pub horizon: u32,
    pub cost_regime: CostRegime,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        let base = SyntheticEnvConfig::default();
        Self {
            s_max: base.s_max,
            lambda: base.lambda,
            temp_chain: base.temp_chain,
            high_temp_skip: base.high_temp_skip,
            repair_effects: base.repair_effects,
            cost_replace: base.cost_replace,
            cost_repair: base.cost_repair,
            budget_init: base.budget_init,
            horizon: base.horizon,
            cost_regime: base.cost_regime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSection {
    Dataset(DatasetSection),
    Synthetic(SyntheticSection),
}

impl Default for EnvSection {
    fn default() -> Self {
        EnvSection::Dataset(DatasetSection::default())
    }
}

/// Benchmark protocol knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkSection {
    pub variants: Vec<Variant>,
    /// Extra seeds; the run seed is always included first.
    pub seeds: Vec<u64>,
    /// Reporting-time EMA factor for the return curves.
    pub ema_factor: f64,
    /// Fraction of the DP-oracle return counted as "learned".
    pub threshold_ratio: f64,
    /// Step bucket width for aligned curves.
    pub curve_bin: u64,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self {
            variants: Variant::ALL.to_vec(),
            seeds: vec![],
            ema_factor: 0.18,
            threshold_ratio: 0.9,
            curve_bin: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub data: DataSection,
    pub env: EnvSection,
    pub reward: RewardConfig,
    pub replay: PerConfig,
    pub network: NetConfig,
    pub agent: AgentConfig,
    pub benchmark: BenchmarkSection,
}

/// Command-line overrides applied after the file loads.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub variant: Option<Variant>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                serde_json::from_str::<RunConfig>(&text)
                    .with_context(|| format!("cannot parse config {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(variant) = overrides.variant {
            config.agent.variant = variant;
        }
        if let Some(out) = &overrides.out {
            config.out_dir = out.clone();
        }
        if let Some(data) = &overrides.data {
            config.data = DataSection::Cmapss { path: data.clone() };
        }
        // One root seed drives every component stream.
        config.agent.seed = config.seed;
        if config.out_dir.as_os_str().is_empty() {
            config.out_dir = PathBuf::from("out");
        }
        Ok(config)
    }

    /// Check every module's invariants before any work starts.
    pub fn validate(&self) -> Result<()> {
        if let DataSection::Cmapss { path } = &self.data {
            if !path.exists() {
                bail!("data file {} does not exist", path.display());
            }
        }
        if let DataSection::Synthetic { config } = &self.data {
            config.validate()?;
        }
        self.reward
            .validate()
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        match &self.env {
            EnvSection::Dataset(d) => {
                self.dataset_env_config(d).validate()?;
                if d.train_engines == 0 {
                    bail!("env.train_engines must be at least 1");
                }
            }
            EnvSection::Synthetic(s) => {
                self.synthetic_env_config(s).validate()?;
            }
        }
        self.replay.validate()?;
        self.agent.validate()?;
        if self.benchmark.ema_factor <= 0.0 || self.benchmark.ema_factor > 1.0 {
            bail!("benchmark.ema_factor must lie in (0,1]");
        }
        if self.benchmark.variants.is_empty() {
            bail!("benchmark.variants must not be empty");
        }
        Ok(())
    }

    pub fn dataset_env_config(&self, section: &DatasetSection) -> DatasetEnvConfig {
        DatasetEnvConfig {
            bins: section.bins,
            window: section.window,
            sampling: section.sampling,
            reward: self.reward,
        }
    }

    pub fn synthetic_env_config(&self, section: &SyntheticSection) -> SyntheticEnvConfig {
        SyntheticEnvConfig {
            s_max: section.s_max,
            lambda: section.lambda,
            temp_chain: section.temp_chain,
            high_temp_skip: section.high_temp_skip,
            repair_effects: section.repair_effects.clone(),
            cost_replace: section.cost_replace,
            cost_repair: section.cost_repair.clone(),
            budget_init: section.budget_init,
            horizon: section.horizon,
            cost_regime: section.cost_regime,
            reward: self.reward,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let config = RunConfig::default();
        let text = config.to_json().unwrap();
        let reloaded: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, reloaded);
        let text2 = reloaded.to_json().unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn overrides_apply() {
        let overrides = Overrides {
            seed: Some(99),
            variant: Some(Variant::Random),
            out: Some(PathBuf::from("elsewhere")),
            data: None,
        };
        let config = RunConfig::load(None, &overrides).unwrap();
        assert_eq!(config.seed, 99);
        assert_eq!(config.agent.seed, 99);
        assert_eq!(config.agent.variant, Variant::Random);
        assert_eq!(config.out_dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn missing_data_file_fails_validation() {
        let config = RunConfig {
            data: DataSection::Cmapss {
                path: PathBuf::from("/definitely/not/here.txt"),
            },
            ..Default::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn default_config_validates() {
        RunConfig::default().validate().unwrap();
    }
}
