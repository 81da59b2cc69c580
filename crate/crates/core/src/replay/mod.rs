//! Prioritized experience replay.
//!
//! Transitions are stored in a ring buffer alongside a [`SumTree`] of
//! sampling masses. New transitions enter at the current maximum priority,
//! sampling is proportional to `p^α` via stratified prefix-sum descent, and
//! importance-sampling weights `(N·P(i))^{-b}` correct the induced bias with
//! `b` annealed linearly to 1 over training.

mod sum_tree;

pub use sum_tree::SumTree;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One replay element: `(s, a, r, s', done)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Replay hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PerConfig {
    /// Leaf count; rounded up to a power of two.
    pub capacity: usize,
    /// Prioritization exponent; 0 gives uniform sampling, 1 full
    /// proportionality.
    pub alpha: f64,
    /// Initial importance-sampling exponent, annealed linearly to 1.
    pub beta_start: f64,
    /// Steps over which beta reaches 1.
    pub beta_anneal_steps: u64,
    /// Priority floor so zero-TD-error transitions stay sampleable.
    pub epsilon_priority: f64,
}

impl Default for PerConfig {
    fn default() -> Self {
        Self {
            capacity: 1 << 15,
            alpha: 0.6,
            beta_start: 0.4,
            beta_anneal_steps: 20_000,
            epsilon_priority: 1e-3,
        }
    }
}

impl PerConfig {
    pub fn validate(&self) -> Result<(), ReplayError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ReplayError::BadConfig(format!(
                "alpha must be in [0,1], got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.beta_start) {
            return Err(ReplayError::BadConfig(format!(
                "beta_start must be in [0,1], got {}",
                self.beta_start
            )));
        }
        if self.epsilon_priority <= 0.0 {
            return Err(ReplayError::BadConfig(
                "epsilon_priority must be positive".into(),
            ));
        }
        if self.capacity == 0 {
            return Err(ReplayError::BadConfig("capacity must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("invalid replay config: {0}")]
    BadConfig(String),
    #[error("observation dimension {got} does not match buffer dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("requested batch of {requested} but buffer holds {available}")]
    NotEnoughSamples { requested: usize, available: usize },
    #[error("TD-error magnitude must be non-negative, got {0}")]
    NegativePriority(f64),
    #[error("leaf index {0} out of range")]
    BadIndex(usize),
}

/// A sampled mini-batch: transitions, their leaf indices for priority
/// write-back, and max-normalized importance-sampling weights.
#[derive(Debug, Clone)]
pub struct SampledBatch {
    pub transitions: Vec<Transition>,
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Ring buffer with proportional prioritized sampling.
#[derive(Debug, Clone)]
pub struct PrioritizedReplay {
    cfg: PerConfig,
    tree: SumTree,
    /// Raw priorities `|δ| + ε` per slot; the exponent is applied to the
    /// tree masses at write time so prefix sums stay proportional to `p^α`.
    raw: Vec<f64>,
    data: Vec<Option<Transition>>,
    write: usize,
    size: usize,
    max_raw: f64,
    obs_dim: Option<usize>,
}

impl PrioritizedReplay {
    pub fn new(cfg: PerConfig) -> Result<Self, ReplayError> {
        cfg.validate()?;
        let tree = SumTree::new(cfg.capacity);
        let capacity = tree.capacity();
        Ok(Self {
            cfg,
            tree,
            raw: vec![0.0; capacity],
            data: vec![None; capacity],
            write: 0,
            size: 0,
            max_raw: 0.0,
            obs_dim: None,
        })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn capacity(&self) -> usize {
        self.tree.capacity()
    }

    pub fn config(&self) -> &PerConfig {
        &self.cfg
    }

    /// Current maximum raw priority, or 1.0 for an empty buffer.
    pub fn max_priority(&self) -> f64 {
        if self.size == 0 {
            1.0
        } else {
            self.max_raw
        }
    }

    /// Store a transition at the current maximum priority, evicting the
    /// oldest entry when full.
    pub fn push(&mut self, transition: Transition) -> Result<(), ReplayError> {
        match self.obs_dim {
            None => self.obs_dim = Some(transition.state.len()),
            Some(d) => {
                if transition.state.len() != d || transition.next_state.len() != d {
                    return Err(ReplayError::DimensionMismatch {
                        expected: d,
                        got: transition.state.len().max(transition.next_state.len()),
                    });
                }
            }
        }
        let priority = self.max_priority();
        let slot = self.write;
        self.data[slot] = Some(transition);
        self.raw[slot] = priority;
        self.tree.set_mass(slot, priority.powf(self.cfg.alpha));
        self.max_raw = self.max_raw.max(priority);
        self.write = (self.write + 1) % self.capacity();
        self.size = (self.size + 1).min(self.capacity());
        Ok(())
    }

    /// Importance-sampling exponent at `step`: linear from `beta_start`
    /// to 1.0 over `beta_anneal_steps`, clamped at 1.
    pub fn anneal_beta(&self, step: u64) -> f64 {
        if self.cfg.beta_anneal_steps == 0 {
            return 1.0;
        }
        let frac = (step as f64 / self.cfg.beta_anneal_steps as f64).min(1.0);
        self.cfg.beta_start + (1.0 - self.cfg.beta_start) * frac
    }

    /// Stratified proportional sample of `batch` transitions.
    ///
    /// The total mass is split into `batch` equal segments with one uniform
    /// draw per segment, so each leaf is selected with probability
    /// `pᵢ^α / Σ p^α` while the batch composition stays low-variance.
    pub fn sample(
        &self,
        batch: usize,
        step: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<SampledBatch, ReplayError> {
        if batch == 0 || self.size < batch {
            return Err(ReplayError::NotEnoughSamples {
                requested: batch,
                available: self.size,
            });
        }
        let total = self.tree.total();
        let beta = self.anneal_beta(step);
        let n = self.size as f64;

        let mut transitions = Vec::with_capacity(batch);
        let mut indices = Vec::with_capacity(batch);
        let mut weights = Vec::with_capacity(batch);
        for k in 0..batch {
            let lo = total * k as f64 / batch as f64;
            let hi = total * (k + 1) as f64 / batch as f64;
            let q = rng.gen_range(lo..hi);
            let leaf = self.tree.descend(q);
            let prob = self.tree.mass(leaf) / total;
            weights.push((n * prob).powf(-beta));
            indices.push(leaf);
            transitions.push(
                self.data[leaf]
                    .clone()
                    .expect("descent lands on occupied leaves only"),
            );
        }
        let w_max = weights.iter().cloned().fold(f64::MIN, f64::max);
        for w in &mut weights {
            *w /= w_max;
        }
        Ok(SampledBatch {
            transitions,
            indices,
            weights,
        })
    }

    /// Write back TD-error magnitudes as new priorities `|δ| + ε`.
    pub fn update_priorities(
        &mut self,
        indices: &[usize],
        td_abs: &[f64],
    ) -> Result<(), ReplayError> {
        assert_eq!(indices.len(), td_abs.len());
        for (&leaf, &delta) in indices.iter().zip(td_abs) {
            if delta < 0.0 || !delta.is_finite() {
                return Err(ReplayError::NegativePriority(delta));
            }
            if leaf >= self.capacity() || self.data[leaf].is_none() {
                return Err(ReplayError::BadIndex(leaf));
            }
            let raw_new = delta + self.cfg.epsilon_priority;
            let raw_old = self.raw[leaf];
            self.raw[leaf] = raw_new;
            self.tree.set_mass(leaf, raw_new.powf(self.cfg.alpha));
            if raw_new >= self.max_raw {
                self.max_raw = raw_new;
            } else if raw_old >= self.max_raw {
                // The previous maximum may have been lowered; rescan.
                self.max_raw = self.raw[..self.size].iter().cloned().fold(0.0, f64::max);
            }
        }
        Ok(())
    }

    /// Exact selection probability of each occupied leaf, `p^α / Σ p^α`.
    pub fn selection_probabilities(&self) -> Vec<f64> {
        let total = self.tree.total();
        (0..self.size).map(|i| self.tree.mass(i) / total).collect()
    }

    pub fn tree(&self) -> &SumTree {
        &self.tree
    }

    pub fn raw_priority(&self, leaf: usize) -> f64 {
        self.raw[leaf]
    }

    /// Debug dump: one `leaf,priority,done` row per occupied slot.
    pub fn snapshot_csv(&self) -> String {
        let mut out = String::from("leaf,priority,done\n");
        for i in 0..self.size {
            let done = self.data[i].as_ref().map(|t| t.done).unwrap_or(false);
            out.push_str(&format!("{},{},{}\n", i, self.raw[i], done));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn tr(v: f64) -> Transition {
        Transition {
            state: vec![v],
            action: 0,
            reward: v,
            next_state: vec![v + 1.0],
            done: false,
        }
    }

    fn filled(cfg: PerConfig, n: usize) -> PrioritizedReplay {
        let mut buf = PrioritizedReplay::new(cfg).unwrap();
        for i in 0..n {
            buf.push(tr(i as f64)).unwrap();
        }
        buf
    }

    #[test]
    fn first_push_gets_priority_one() {
        let buf = filled(PerConfig::default(), 1);
        assert_eq!(buf.raw_priority(0), 1.0);
    }

    #[test]
    fn push_inherits_max_priority() {
        let mut buf = filled(PerConfig::default(), 2);
        buf.update_priorities(&[0], &[3.2 - buf.config().epsilon_priority])
            .unwrap();
        assert!((buf.max_priority() - 3.2).abs() < 1e-12);
        buf.push(tr(9.0)).unwrap();
        assert!((buf.raw_priority(2) - 3.2).abs() < 1e-12);
    }

    #[test]
    fn ring_evicts_oldest() {
        let cfg = PerConfig {
            capacity: 4,
            ..Default::default()
        };
        let mut buf = filled(cfg, 4);
        assert_eq!(buf.len(), 4);
        buf.push(tr(100.0)).unwrap();
        assert_eq!(buf.len(), 4);
        // Slot 0 (oldest) was overwritten.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = buf.sample(4, 0, &mut rng).unwrap();
        assert!(batch
            .transitions
            .iter()
            .all(|t| t.reward == 100.0 || t.reward >= 1.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut buf = filled(PerConfig::default(), 1);
        let bad = Transition {
            state: vec![1.0, 2.0],
            action: 0,
            reward: 0.0,
            next_state: vec![0.0, 0.0],
            done: false,
        };
        assert!(matches!(
            buf.push(bad),
            Err(ReplayError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn proportional_masses_alpha_one() {
        let cfg = PerConfig {
            capacity: 4,
            alpha: 1.0,
            epsilon_priority: 1e-9,
            ..Default::default()
        };
        let mut buf = filled(cfg, 3);
        let eps = buf.config().epsilon_priority;
        buf.update_priorities(&[0, 1, 2], &[1.0 - eps, 1.0 - eps, 2.0 - eps])
            .unwrap();
        let probs = buf.selection_probabilities();
        assert!((probs[0] - 0.25).abs() < 1e-9);
        assert!((probs[1] - 0.25).abs() < 1e-9);
        assert!((probs[2] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn alpha_zero_is_uniform() {
        let cfg = PerConfig {
            capacity: 8,
            alpha: 0.0,
            ..Default::default()
        };
        let mut buf = filled(cfg, 5);
        buf.update_priorities(&[0, 1], &[10.0, 0.5]).unwrap();
        let probs = buf.selection_probabilities();
        for p in probs {
            assert!((p - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_priorities_full_beta_gives_unit_weights() {
        let cfg = PerConfig {
            capacity: 8,
            beta_start: 1.0,
            ..Default::default()
        };
        let buf = filled(cfg, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch = buf.sample(8, 0, &mut rng).unwrap();
        for w in batch.weights {
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_zero_gives_unit_weights_everywhere() {
        let cfg = PerConfig {
            capacity: 8,
            beta_start: 0.0,
            beta_anneal_steps: 1_000_000,
            ..Default::default()
        };
        let mut buf = filled(cfg, 8);
        buf.update_priorities(&[0, 3], &[5.0, 0.01]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let batch = buf.sample(8, 0, &mut rng).unwrap();
        for w in batch.weights {
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_td_error_floors_at_epsilon() {
        let mut buf = filled(PerConfig::default(), 2);
        buf.update_priorities(&[0], &[0.0]).unwrap();
        assert_eq!(buf.raw_priority(0), buf.config().epsilon_priority);
        assert!(buf.tree().mass(0) > 0.0);
    }

    #[test]
    fn negative_td_error_rejected() {
        let mut buf = filled(PerConfig::default(), 2);
        assert!(matches!(
            buf.update_priorities(&[0], &[-0.1]),
            Err(ReplayError::NegativePriority(_))
        ));
    }

    #[test]
    fn sample_smaller_than_batch_errors() {
        let buf = filled(PerConfig::default(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            buf.sample(4, 0, &mut rng),
            Err(ReplayError::NotEnoughSamples { .. })
        ));
    }

    #[test]
    fn beta_anneals_linearly() {
        let cfg = PerConfig {
            beta_start: 0.4,
            beta_anneal_steps: 1000,
            ..Default::default()
        };
        let buf = PrioritizedReplay::new(cfg).unwrap();
        assert!((buf.anneal_beta(0) - 0.4).abs() < 1e-12);
        assert!((buf.anneal_beta(500) - 0.7).abs() < 1e-12);
        assert!((buf.anneal_beta(1000) - 1.0).abs() < 1e-12);
        assert!((buf.anneal_beta(5000) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn snapshot_lists_priorities_and_done_flags() {
        let mut buf = filled(PerConfig::default(), 3);
        buf.push(Transition {
            state: vec![9.0],
            action: 1,
            reward: 0.0,
            next_state: vec![9.5],
            done: true,
        })
        .unwrap();
        let snapshot = buf.snapshot_csv();
        let lines: Vec<&str> = snapshot.lines().collect();
        assert_eq!(lines[0], "leaf,priority,done");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("3,1,true"));
    }

    #[test]
    fn grown_priority_attracts_sampling() {
        // Empirical frequencies shift toward an updated leaf (1e5 draws).
        let cfg = PerConfig {
            capacity: 8,
            alpha: 1.0,
            epsilon_priority: 1e-6,
            ..Default::default()
        };
        let mut buf = filled(cfg, 8);
        buf.update_priorities(&[5], &[9.0]).unwrap();
        let exact = buf.selection_probabilities();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut counts = [0usize; 8];
        let draws = 100_000;
        for _ in 0..draws / 8 {
            let batch = buf.sample(8, 0, &mut rng).unwrap();
            for idx in batch.indices {
                counts[idx] += 1;
            }
        }
        let emp5 = counts[5] as f64 / draws as f64;
        assert!((emp5 - exact[5]).abs() < 0.01, "emp={emp5} exact={}", exact[5]);
        assert!(emp5 > 0.5);
    }
}
