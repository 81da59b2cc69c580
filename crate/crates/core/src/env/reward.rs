//! Five-branch immediate reward.

use serde::{Deserialize, Serialize};

use super::{Action, EnvError};

/// Reward magnitudes. The penalty dominates so failure is never worth it,
/// and the frugal bonus makes late-but-safe replacement beat early
/// replacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    /// Runtime credit per survived Hold step.
    pub hold_runtime: f64,
    /// R_Rpl: valid replacement.
    pub replace: f64,
    /// R_Rpa: valid repair.
    pub repair: f64,
    /// R_Exp: additive bonus on first visit to a state bin this episode.
    pub explore: f64,
    /// R_Frug: additive bonus for replacing at or below the frugal
    /// threshold.
    pub frugal: f64,
    /// Health level at or under which replacement counts as frugal.
    pub frugal_threshold: f64,
    /// R_Pen: failure or budget violation.
    pub penalty: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            hold_runtime: 1.0,
            replace: 50.0,
            repair: 20.0,
            explore: 0.5,
            frugal: 25.0,
            frugal_threshold: 0.25,
            penalty: -100.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.penalty < 0.0
            && 0.0 < self.hold_runtime
            && self.hold_runtime <= self.repair
            && self.repair <= self.replace)
        {
            return Err(EnvError::InvalidConfig(format!(
                "reward ordering must satisfy penalty < 0 < hold <= repair <= replace, got \
                 penalty={} hold={} repair={} replace={}",
                self.penalty, self.hold_runtime, self.repair, self.replace
            )));
        }
        if !(self.frugal_threshold > 0.0 && self.frugal_threshold < 1.0) {
            return Err(EnvError::InvalidConfig(format!(
                "frugal_threshold must lie in (0,1), got {}",
                self.frugal_threshold
            )));
        }
        if self.explore < 0.0 || self.frugal < 0.0 {
            return Err(EnvError::InvalidConfig(
                "explore and frugal bonuses must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// How a transition triple resolves into reward branches. Environments
/// distill `(prev state, action, next state)` plus episode bookkeeping into
/// this context.
#[derive(Debug, Clone, Copy, Default)]
pub struct RewardContext {
    /// The equipment failed on this step.
    pub failed: bool,
    /// The action's cost was covered by the remaining budget.
    pub action_valid: bool,
    /// The step entered a state bin not yet visited this episode.
    pub first_visit: bool,
    /// A replacement executed at or below the frugal threshold.
    pub frugal_timing: bool,
}

/// Exactly one base branch fires per step — penalty on failure or budget
/// violation, otherwise the action's own branch — and the explore/frugal
/// bonuses are additive on top.
pub fn reward_of(action: &Action, ctx: &RewardContext, cfg: &RewardConfig) -> f64 {
    if ctx.failed || !ctx.action_valid {
        return cfg.penalty;
    }
    match action {
        Action::Hold => {
            let mut r = cfg.hold_runtime;
            if ctx.first_visit {
                r += cfg.explore;
            }
            r
        }
        Action::Replace => {
            let mut r = cfg.replace;
            if ctx.frugal_timing {
                r += cfg.frugal;
            }
            r
        }
        Action::Repair { .. } => cfg.repair,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid() -> RewardContext {
        RewardContext {
            failed: false,
            action_valid: true,
            first_visit: false,
            frugal_timing: false,
        }
    }

    #[test]
    fn failure_transition_is_penalized() {
        let cfg = RewardConfig::default();
        let ctx = RewardContext {
            failed: true,
            action_valid: true,
            ..valid()
        };
        assert_eq!(reward_of(&Action::Hold, &ctx, &cfg), cfg.penalty);
    }

    #[test]
    fn valid_repair_earns_repair_reward() {
        let cfg = RewardConfig::default();
        let r = reward_of(&Action::Repair { repair_type: 1 }, &valid(), &cfg);
        assert_eq!(r, cfg.repair);
    }

    #[test]
    fn hold_on_visited_bin_has_no_explore_bonus() {
        let cfg = RewardConfig::default();
        assert_eq!(reward_of(&Action::Hold, &valid(), &cfg), cfg.hold_runtime);
        let ctx = RewardContext {
            first_visit: true,
            ..valid()
        };
        assert_eq!(
            reward_of(&Action::Hold, &ctx, &cfg),
            cfg.hold_runtime + cfg.explore
        );
    }

    #[test]
    fn budget_violation_is_penalized() {
        let cfg = RewardConfig::default();
        let ctx = RewardContext {
            action_valid: false,
            ..valid()
        };
        assert_eq!(reward_of(&Action::Replace, &ctx, &cfg), cfg.penalty);
    }

    #[test]
    fn frugal_replacement_stacks_bonus() {
        let cfg = RewardConfig::default();
        let ctx = RewardContext {
            frugal_timing: true,
            ..valid()
        };
        assert_eq!(
            reward_of(&Action::Replace, &ctx, &cfg),
            cfg.replace + cfg.frugal
        );
    }

    #[test]
    fn exactly_one_base_branch_fires() {
        let cfg = RewardConfig::default();
        // Failure wins over everything, including bonuses.
        let ctx = RewardContext {
            failed: true,
            action_valid: true,
            first_visit: true,
            frugal_timing: true,
        };
        for action in [Action::Hold, Action::Replace, Action::Repair { repair_type: 0 }] {
            assert_eq!(reward_of(&action, &ctx, &cfg), cfg.penalty);
        }
    }

    #[test]
    fn bad_ordering_rejected() {
        let cfg = RewardConfig {
            repair: 60.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RewardConfig {
            frugal_threshold: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
