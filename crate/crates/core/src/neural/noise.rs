//! Adaptive scale for parameter-space exploration noise.

use serde::{Deserialize, Serialize};

/// Perturbation scale with multiplicative adaptation toward a target
/// action-disagreement rate between perturbed and unperturbed greedy
/// policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseState {
    /// Current Gaussian scale applied to every parameter.
    pub sigma: f64,
    /// Desired mean disagreement rate.
    pub sigma_target: f64,
    /// Multiplicative adaptation factor (> 1).
    pub adapt_factor: f64,
}

impl Default for NoiseState {
    fn default() -> Self {
        Self {
            sigma: 0.05,
            sigma_target: 0.1,
            adapt_factor: 1.01,
        }
    }
}

impl NoiseState {
    /// Grow sigma while exploration is too tame, shrink it when perturbed
    /// decisions diverge too often. `divergence` is a rate in [0,1].
    pub fn adapt(&mut self, divergence: f64) {
        debug_assert!((0.0..=1.0).contains(&divergence));
        if divergence < self.sigma_target {
            self.sigma *= self.adapt_factor;
        } else {
            self.sigma /= self.adapt_factor;
        }
    }
}
