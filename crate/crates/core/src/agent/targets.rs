//! TD targets for the DQN and Double-DQN update rules.

use crate::neural::{argmax, DenseNet, NetError};
use crate::replay::Transition;

/// `y = r + γ·max_a Q_target(s', a)`, with `y = r` on terminal
/// transitions.
pub fn td_target_dqn(
    batch: &[Transition],
    target: &DenseNet,
    gamma: f64,
) -> Result<Vec<f64>, NetError> {
    batch
        .iter()
        .map(|t| {
            if t.done {
                Ok(t.reward)
            } else {
                let q = target.forward(&t.next_state)?;
                let best = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Ok(t.reward + gamma * best)
            }
        })
        .collect()
}

/// Double-DQN target: the online network chooses `a* = argmax Q(s', ·; θ)`
/// and the target network evaluates it, `y = r + γ·Q(s', a*; θ⁻)`.
pub fn td_target_ddqn(
    batch: &[Transition],
    online: &DenseNet,
    target: &DenseNet,
    gamma: f64,
) -> Result<Vec<f64>, NetError> {
    batch
        .iter()
        .map(|t| {
            if t.done {
                Ok(t.reward)
            } else {
                let online_q = online.forward(&t.next_state)?;
                let a_star = argmax(&online_q);
                let target_q = target.forward(&t.next_state)?;
                Ok(t.reward + gamma * target_q[a_star])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Net with two outputs that returns fixed Q-values regardless of input:
    /// a single linear layer with zero weights and the Q-values as biases.
    fn constant_net(q: &[f64]) -> DenseNet {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = DenseNet::new(&[1, q.len()], &mut rng).unwrap();
        net.layers[0].weights.iter_mut().for_each(|w| *w = 0.0);
        net.layers[0].biases.copy_from_slice(q);
        net
    }

    fn transition(reward: f64, done: bool) -> Transition {
        Transition {
            state: vec![0.0],
            action: 0,
            reward,
            next_state: vec![0.0],
            done,
        }
    }

    #[test]
    fn terminal_target_is_reward() {
        let target = constant_net(&[2.0, 5.0]);
        let batch = vec![transition(-100.0, true)];
        let y = td_target_dqn(&batch, &target, 0.9).unwrap();
        assert_eq!(y, vec![-100.0]);
        let y = td_target_ddqn(&batch, &target, &target, 0.9).unwrap();
        assert_eq!(y, vec![-100.0]);
    }

    #[test]
    fn zero_gamma_reduces_to_reward() {
        let target = constant_net(&[2.0, 5.0]);
        let batch = vec![transition(3.5, false)];
        let y = td_target_dqn(&batch, &target, 0.0).unwrap();
        assert_eq!(y, vec![3.5]);
    }

    #[test]
    fn dqn_substitution_example() {
        // r = 1, gamma = 0.9, target Q(s',·) = [2, 5] → y = 1 + 0.9·5 = 5.5.
        let target = constant_net(&[2.0, 5.0]);
        let batch = vec![transition(1.0, false)];
        let y = td_target_dqn(&batch, &target, 0.9).unwrap();
        assert!((y[0] - 5.5).abs() < 1e-12);
    }

    #[test]
    fn ddqn_decouples_choice_from_evaluation() {
        // Online picks a* = 1 (argmax of [1,3]); the target's value at
        // a* = 1 is 2, not its own maximum 7.
        let online = constant_net(&[1.0, 3.0]);
        let target = constant_net(&[7.0, 2.0]);
        let batch = vec![transition(0.0, false)];
        let y = td_target_ddqn(&batch, &online, &target, 1.0).unwrap();
        assert_eq!(y, vec![2.0]);
    }

    #[test]
    fn identical_nets_make_ddqn_equal_dqn() {
        let net = constant_net(&[0.3, -0.2, 1.7]);
        let batch = vec![transition(1.0, false), transition(-2.0, false)];
        let a = td_target_dqn(&batch, &net, 0.95).unwrap();
        let b = td_target_ddqn(&batch, &net, &net, 0.95).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perturbing_non_argmax_target_values_leaves_ddqn_unchanged() {
        let online = constant_net(&[1.0, 3.0]);
        let target = constant_net(&[7.0, 2.0]);
        let batch = vec![transition(0.5, false)];
        let before = td_target_ddqn(&batch, &online, &target, 0.9).unwrap();
        // Index 0 is not the online argmax; changing it must not matter.
        let perturbed = constant_net(&[-50.0, 2.0]);
        let after = td_target_ddqn(&batch, &online, &perturbed, 0.9).unwrap();
        assert_eq!(before, after);
    }
}
