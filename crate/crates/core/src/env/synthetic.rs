//! Synthetic equipment-degradation environment.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    reward_of, Action, EnvError, EnvState, Environment, RewardConfig, RewardContext, StepInfo,
    StepOutcome,
};
use crate::rng::{stream_rng, Stream};

/// Which branch of the cost constraint the configuration must satisfy:
/// replacement at least twice any repair, or replacement at most half any
/// repair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostRegime {
    ReplaceDominant,
    RepairDominant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticEnvConfig {
    /// Failure state index; the sensor state lives in `[0, s_max]`.
    pub s_max: u32,
    /// Hazard rate: a Hold step advances degradation with probability
    /// `1 - exp(-lambda)`.
    pub lambda: f64,
    /// 2x2 row-stochastic transition matrix over {low, high} temperature.
    pub temp_chain: [[f64; 2]; 2],
    /// Inclusive state-skip range while the temperature mode is high.
    pub high_temp_skip: (u32, u32),
    /// State reversion magnitude per repair type.
    pub repair_effects: Vec<u32>,
    pub cost_replace: f64,
    /// Cost per repair type; same length as `repair_effects`.
    pub cost_repair: Vec<f64>,
    pub budget_init: f64,
    /// Steps per episode before truncation.
    pub horizon: u32,
    pub cost_regime: CostRegime,
    pub reward: RewardConfig,
}

impl Default for SyntheticEnvConfig {
    fn default() -> Self {
        Self {
            s_max: 20,
            lambda: 0.05,
            temp_chain: [[0.95, 0.05], [0.2, 0.8]],
            high_temp_skip: (2, 4),
            repair_effects: vec![2, 5, 8],
            cost_replace: 10.0,
            cost_repair: vec![2.0, 3.0, 4.0],
            budget_init: 100.0,
            horizon: 500,
            cost_regime: CostRegime::ReplaceDominant,
            reward: RewardConfig::default(),
        }
    }
}

impl SyntheticEnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        self.reward.validate()?;
        if self.s_max < 3 {
            return Err(EnvError::InvalidConfig(
                "s_max must be at least 3 (reset draws from {0,1,2})".into(),
            ));
        }
        if self.lambda < 0.0 {
            return Err(EnvError::InvalidConfig("lambda must be >= 0".into()));
        }
        for row in &self.temp_chain {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(EnvError::InvalidConfig(
                    "temperature chain entries must be probabilities".into(),
                ));
            }
            if (row[0] + row[1] - 1.0).abs() > 1e-9 {
                return Err(EnvError::InvalidConfig(
                    "temperature chain rows must sum to 1".into(),
                ));
            }
        }
        if self.high_temp_skip.0 < 1 || self.high_temp_skip.0 > self.high_temp_skip.1 {
            return Err(EnvError::InvalidConfig(format!(
                "bad high-temperature skip range {:?}",
                self.high_temp_skip
            )));
        }
        if self.repair_effects.len() != self.cost_repair.len() {
            return Err(EnvError::InvalidConfig(
                "repair_effects and cost_repair must have the same length".into(),
            ));
        }
        if self.cost_replace <= 0.0 || self.cost_repair.iter().any(|&c| c <= 0.0) {
            return Err(EnvError::InvalidConfig("costs must be positive".into()));
        }
        // Cost constraint, validated against whichever regime the config
        // declares.
        for (psi, &c_eta) in self.cost_repair.iter().enumerate() {
            let ok = match self.cost_regime {
                CostRegime::ReplaceDominant => self.cost_replace >= 2.0 * c_eta,
                CostRegime::RepairDominant => self.cost_replace <= c_eta / 2.0,
            };
            if !ok {
                return Err(EnvError::InvalidConfig(format!(
                    "cost constraint violated for repair type {psi}: replace={} repair={}",
                    self.cost_replace, c_eta
                )));
            }
        }
        if self.budget_init < self.cost_replace {
            return Err(EnvError::InvalidConfig(
                "initial budget must cover at least one replacement".into(),
            ));
        }
        if self.horizon == 0 {
            return Err(EnvError::InvalidConfig("horizon must be positive".into()));
        }
        Ok(())
    }

    pub fn num_actions(&self) -> usize {
        2 + self.repair_effects.len()
    }
}

/// The degradation MDP. Owns its RNG; instances are independent.
#[derive(Debug, Clone)]
pub struct SyntheticEnv {
    config: SyntheticEnvConfig,
    state: EnvState,
    rng: ChaCha8Rng,
    visited: Vec<bool>,
    terminal: bool,
}

impl SyntheticEnv {
    pub fn new(config: SyntheticEnvConfig, seed: u64) -> Result<Self, EnvError> {
        config.validate()?;
        let visited = vec![false; config.s_max as usize + 1];
        let mut env = Self {
            state: EnvState {
                sensor_state: 0,
                temp: 0,
                budget: config.budget_init,
                t: 0,
            },
            visited,
            config,
            rng: stream_rng(seed, Stream::Env),
            terminal: true,
        };
        env.reset_state();
        Ok(env)
    }

    pub fn config(&self) -> &SyntheticEnvConfig {
        &self.config
    }

    pub fn state(&self) -> EnvState {
        self.state
    }

    fn reset_state(&mut self) -> EnvState {
        // Almost-new condition: one of the three lowest states.
        self.state = EnvState {
            sensor_state: self.rng.gen_range(0..3),
            temp: 0,
            budget: self.config.budget_init,
            t: 0,
        };
        self.visited.iter_mut().for_each(|v| *v = false);
        self.visited[self.state.sensor_state as usize] = true;
        self.terminal = false;
        self.state
    }

    fn features(&self) -> Vec<f64> {
        vec![
            self.state.sensor_state as f64 / self.config.s_max as f64,
            self.state.temp as f64,
            self.state.budget / self.config.budget_init,
            self.state.t as f64 / self.config.horizon as f64,
        ]
    }

    /// Run one episode under the given action sequence and record it as
    /// `t,state,temp,budget,action,reward,done` rows. Stops at the first
    /// terminal step or when the actions run out.
    pub fn trace_episode_csv(&mut self, actions: &[Action]) -> Result<String, EnvError> {
        let mut out = String::from("t,state,temp,budget,action,reward,done\n");
        self.reset_state();
        for action in actions {
            let before = self.state;
            let outcome = self.step_action(action)?;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                before.t,
                before.sensor_state,
                before.temp,
                before.budget,
                action.index(),
                outcome.reward,
                outcome.done
            ));
            if outcome.done {
                break;
            }
        }
        Ok(out)
    }

    /// One transition with a typed action.
    pub fn step_action(&mut self, action: &Action) -> Result<StepOutcome, EnvError> {
        if self.terminal {
            return Err(EnvError::Terminal);
        }
        let cfg = &self.config;
        let prev = self.state;
        let mut valid = true;
        let mut first_visit = false;
        let mut frugal_timing = false;

        match action {
            Action::Hold => {
                if self.rng.gen::<f64>() < 1.0 - (-cfg.lambda).exp() {
                    let advance = if self.state.temp == 0 {
                        1
                    } else {
                        self.rng
                            .gen_range(cfg.high_temp_skip.0..=cfg.high_temp_skip.1)
                    };
                    self.state.sensor_state =
                        (self.state.sensor_state + advance).min(cfg.s_max);
                }
                let s = self.state.sensor_state as usize;
                if self.state.sensor_state < cfg.s_max && !self.visited[s] {
                    first_visit = true;
                    self.visited[s] = true;
                }
            }
            Action::Replace => {
                if self.state.budget >= cfg.cost_replace {
                    // Timing is judged on the state being replaced.
                    let health_equiv = 1.0 - prev.sensor_state as f64 / cfg.s_max as f64;
                    frugal_timing = health_equiv <= cfg.reward.frugal_threshold;
                    self.state.sensor_state = self.rng.gen_range(0..3);
                    self.state.budget -= cfg.cost_replace;
                } else {
                    valid = false;
                }
            }
            Action::Repair { repair_type } => {
                let psi = *repair_type;
                if psi >= cfg.repair_effects.len() {
                    return Err(EnvError::UnsupportedAction(*action));
                }
                if self.state.budget >= cfg.cost_repair[psi] {
                    self.state.sensor_state =
                        self.state.sensor_state.saturating_sub(cfg.repair_effects[psi]);
                    self.state.budget -= cfg.cost_repair[psi];
                } else {
                    valid = false;
                }
            }
        }

        {
            let row = cfg.temp_chain[self.state.temp as usize];
            let u: f64 = self.rng.gen();
            self.state.temp = if u < row[1] { 1 } else { 0 };
        }
        self.state.t += 1;

        let failed = self.state.sensor_state >= cfg.s_max;
        let done = failed || self.state.t >= cfg.horizon;
        self.terminal = done;

        let ctx = RewardContext {
            failed,
            action_valid: valid,
            first_visit,
            frugal_timing,
        };
        let reward = reward_of(action, &ctx, &cfg.reward);
        Ok(StepOutcome {
            observation: self.features(),
            reward,
            done,
            info: StepInfo {
                failed,
                action_valid: valid,
                budget_after: self.state.budget,
            },
        })
    }
}

impl Environment for SyntheticEnv {
    fn reset(&mut self) -> Vec<f64> {
        self.reset_state();
        self.features()
    }

    fn step(&mut self, action_index: usize) -> Result<StepOutcome, EnvError> {
        if action_index >= self.num_actions() {
            return Err(EnvError::BadActionIndex {
                index: action_index,
                actions: self.num_actions(),
            });
        }
        let action = Action::from_index(action_index);
        self.step_action(&action)
    }

    fn num_actions(&self) -> usize {
        self.config.num_actions()
    }

    fn obs_dim(&self) -> usize {
        4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_config() -> SyntheticEnvConfig {
        SyntheticEnvConfig {
            lambda: 0.0,
            temp_chain: [[1.0, 0.0], [0.0, 1.0]],
            ..Default::default()
        }
    }

    #[test]
    fn reset_contract() {
        let mut env = SyntheticEnv::new(SyntheticEnvConfig::default(), 5).unwrap();
        for _ in 0..20 {
            let state = env.reset_state();
            assert!(state.sensor_state <= 2);
            assert_eq!(state.temp, 0);
            assert_eq!(state.budget, env.config().budget_init);
            assert_eq!(state.t, 0);
        }
    }

    #[test]
    fn reset_is_deterministic_per_seed() {
        let mut a = SyntheticEnv::new(SyntheticEnvConfig::default(), 11).unwrap();
        let mut b = SyntheticEnv::new(SyntheticEnvConfig::default(), 11).unwrap();
        for _ in 0..10 {
            assert_eq!(a.reset_state(), b.reset_state());
        }
    }

    #[test]
    fn cost_constraint_violation_rejected() {
        let cfg = SyntheticEnvConfig {
            cost_replace: 5.0,
            cost_repair: vec![3.0],
            repair_effects: vec![2],
            ..Default::default()
        };
        assert!(matches!(
            SyntheticEnv::new(cfg, 0),
            Err(EnvError::InvalidConfig(_))
        ));
    }

    #[test]
    fn repair_dominant_regime_validates_other_branch() {
        let cfg = SyntheticEnvConfig {
            cost_replace: 1.0,
            cost_repair: vec![2.0, 4.0],
            repair_effects: vec![2, 5],
            cost_regime: CostRegime::RepairDominant,
            ..Default::default()
        };
        assert!(SyntheticEnv::new(cfg, 0).is_ok());
    }

    #[test]
    fn zero_hazard_hold_keeps_state_and_pays_runtime() {
        let mut env = SyntheticEnv::new(quiet_config(), 1).unwrap();
        let before = env.state();
        let out = env.step_action(&Action::Hold).unwrap();
        assert_eq!(env.state().sensor_state, before.sensor_state);
        assert_eq!(out.reward, env.config().reward.hold_runtime);
        assert!(!out.done);
    }

    #[test]
    fn repair_reverts_exactly_phi_states() {
        let mut env = SyntheticEnv::new(quiet_config(), 2).unwrap();
        env.state.sensor_state = 7;
        let budget_before = env.state().budget;
        env.step_action(&Action::Repair { repair_type: 1 }).unwrap();
        assert_eq!(env.state().sensor_state, 2); // 7 - 5
        assert_eq!(env.state().budget, budget_before - 3.0);
    }

    #[test]
    fn repair_saturates_at_zero() {
        let mut env = SyntheticEnv::new(quiet_config(), 2).unwrap();
        env.state.sensor_state = 1;
        env.step_action(&Action::Repair { repair_type: 2 }).unwrap();
        assert_eq!(env.state().sensor_state, 0);
    }

    #[test]
    fn replace_resets_to_almost_new_and_charges_cost() {
        let mut env = SyntheticEnv::new(quiet_config(), 3).unwrap();
        for _ in 0..10 {
            env.reset_state();
            env.state.sensor_state = 15;
            let out = env.step_action(&Action::Replace).unwrap();
            assert!(env.state().sensor_state <= 2);
            assert_eq!(out.info.budget_after, 90.0);
            assert!(out.info.action_valid);
        }
    }

    #[test]
    fn insufficient_budget_penalizes_and_preserves_state() {
        let mut env = SyntheticEnv::new(quiet_config(), 4).unwrap();
        env.state.budget = 1.0;
        env.state.sensor_state = 9;
        let out = env.step_action(&Action::Replace).unwrap();
        assert!(!out.info.action_valid);
        assert_eq!(out.reward, env.config().reward.penalty);
        assert_eq!(env.state().sensor_state, 9);
        assert_eq!(env.state().budget, 1.0);
        assert!(!out.done);
    }

    #[test]
    fn failure_terminates_with_penalty() {
        let mut cfg = quiet_config();
        cfg.lambda = 50.0; // advance virtually every step
        let mut env = SyntheticEnv::new(cfg, 6).unwrap();
        env.state.sensor_state = env.config().s_max - 1;
        let out = env.step_action(&Action::Hold).unwrap();
        assert!(out.info.failed);
        assert!(out.done);
        assert_eq!(out.reward, env.config().reward.penalty);
        assert!(matches!(
            env.step_action(&Action::Hold),
            Err(EnvError::Terminal)
        ));
    }

    #[test]
    fn budget_never_increases() {
        let mut env = SyntheticEnv::new(SyntheticEnvConfig::default(), 7).unwrap();
        let mut budget = env.state().budget;
        let mut obs_budget = budget;
        for i in 0..300 {
            let action = match i % 4 {
                0 => Action::Replace,
                1 => Action::Repair { repair_type: i % 3 },
                _ => Action::Hold,
            };
            match env.step_action(&action) {
                Ok(out) => {
                    assert!(env.state().budget <= budget + 1e-12);
                    assert!(env.state().budget >= 0.0 || !out.info.action_valid);
                    budget = env.state().budget;
                    obs_budget = out.info.budget_after;
                }
                Err(EnvError::Terminal) => {
                    env.reset_state();
                    budget = env.state().budget;
                }
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
        let _ = obs_budget;
    }

    #[test]
    fn episode_trace_has_one_row_per_step() {
        let mut env = SyntheticEnv::new(quiet_config(), 5).unwrap();
        let actions = vec![Action::Hold, Action::Repair { repair_type: 0 }, Action::Replace];
        let csv = env.trace_episode_csv(&actions).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,state,temp,budget,action,reward,done");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[3].contains(",1,")); // replace action index
    }

    #[test]
    fn hazard_rate_matches_closed_form() {
        // 1e5-step smoke check; the acceptance suite runs the full 1e6.
        // Low temperature pinned so every advance is a single state.
        let cfg = SyntheticEnvConfig {
            lambda: 0.05,
            s_max: 1_000_000,
            horizon: u32::MAX,
            temp_chain: [[1.0, 0.0], [0.0, 1.0]],
            ..Default::default()
        };
        let mut env = SyntheticEnv::new(cfg, 8).unwrap();
        let mut advances = 0u32;
        let steps = 100_000;
        let mut prev = env.state().sensor_state;
        for _ in 0..steps {
            env.step_action(&Action::Hold).unwrap();
            if env.state().sensor_state != prev {
                advances += 1;
            }
            prev = env.state().sensor_state;
        }
        let rate = advances as f64 / steps as f64;
        let expected = 1.0 - (-0.05f64).exp();
        assert!((rate - expected).abs() < 2e-3, "rate {rate} vs {expected}");
    }
}
