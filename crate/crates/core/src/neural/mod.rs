//! Minimal dense Q-network with explicit backpropagation.
//!
//! The architecture family is fixed: a stack of fully-connected layers with
//! ReLU hidden activations and a linear output head, one Q-value per action.
//! Gradients are computed by hand, which keeps training deterministic and
//! lets tests check them against finite differences.

#![allow(clippy::needless_range_loop)]

mod adam;
mod noise;

pub use adam::{AdamConfig, AdamState};
pub use noise::NoiseState;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("input dimension {got} does not match network input {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("network needs at least one layer")]
    Empty,
}

/// Network topology and training knobs.
///
/// The pipeline default is the squared loss: the maintenance environments
/// mix frequent small runtime rewards with rare large penalties, and a
/// clipped loss regresses toward the majority branch of a stochastic
/// outcome, which buries the failure signal. Huber remains available for
/// reward scales where its bounded gradients matter more.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetConfig {
    /// Hidden layer widths; input and output sizes come from the
    /// environment.
    pub hidden: Vec<usize>,
    pub loss: Loss,
    pub adam: AdamConfig,
    /// Initial parameter-noise state for the noisy variant.
    pub noise: NoiseState,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            loss: Loss::Squared,
            adam: AdamConfig::default(),
            noise: NoiseState::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Training loss applied to the per-sample TD error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Loss {
    /// Quadratic for |δ| ≤ kappa, linear beyond: bounded gradients under
    /// large penalty spikes.
    Huber { kappa: f64 },
    Squared,
}

impl Default for Loss {
    fn default() -> Self {
        Loss::Huber { kappa: 1.0 }
    }
}

impl Loss {
    pub fn value(self, delta: f64) -> f64 {
        match self {
            Loss::Huber { kappa } => {
                if delta.abs() <= kappa {
                    0.5 * delta * delta
                } else {
                    kappa * (delta.abs() - 0.5 * kappa)
                }
            }
            Loss::Squared => 0.5 * delta * delta,
        }
    }

    /// d value / d delta.
    pub fn derivative(self, delta: f64) -> f64 {
        match self {
            Loss::Huber { kappa } => {
                if delta.abs() <= kappa {
                    delta
                } else {
                    kappa * delta.signum()
                }
            }
            Loss::Squared => delta,
        }
    }
}

/// One fully-connected layer; `weights` is row-major `out_dim × in_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

/// Feedforward Q-network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    pub layers: Vec<Layer>,
}

/// Per-layer gradients, same shapes as the network parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            for g in layer.iter_mut() {
                *g *= factor;
            }
        }
    }
}

impl DenseNet {
    /// Build a network with the given layer sizes, ReLU hidden units, a
    /// linear output head, fan-in-scaled uniform weights, and zero biases.
    pub fn new(dims: &[usize], rng: &mut ChaCha8Rng) -> Result<Self, NetError> {
        if dims.len() < 2 {
            return Err(NetError::Empty);
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (idx, pair) in dims.windows(2).enumerate() {
            let (in_dim, out_dim) = (pair[0], pair[1]);
            let bound = 1.0 / (in_dim as f64).sqrt();
            let weights = (0..in_dim * out_dim)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            let activation = if idx + 2 == dims.len() {
                Activation::Identity
            } else {
                Activation::Relu
            };
            layers.push(Layer {
                in_dim,
                out_dim,
                weights,
                biases: vec![0.0; out_dim],
                activation,
            });
        }
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map(|l| l.in_dim).unwrap_or(0)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.out_dim).unwrap_or(0)
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Q-values for a single observation.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NetError> {
        if input.len() != self.input_dim() {
            return Err(NetError::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut current = input.to_vec();
        for layer in &self.layers {
            current = layer_forward(layer, &current).0;
        }
        if current.iter().any(|v| !v.is_finite()) {
            return Err(NetError::NonFinite("forward output"));
        }
        Ok(current)
    }

    /// Q-value matrix for a batch of observations (batch × actions).
    pub fn forward_batch(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NetError> {
        inputs.iter().map(|x| self.forward(x)).collect()
    }

    /// Greedy action for one observation.
    pub fn argmax_action(&self, input: &[f64]) -> Result<usize, NetError> {
        let q = self.forward(input)?;
        Ok(argmax(&q))
    }

    /// Deep copy for use as a frozen target network.
    pub fn sync_target(&self) -> DenseNet {
        self.clone()
    }

    /// Copy with i.i.d. zero-mean Gaussian noise of scale `sigma` added to
    /// every parameter; the original is untouched.
    pub fn perturb(&self, sigma: f64, rng: &mut ChaCha8Rng) -> DenseNet {
        let normal = Normal::new(0.0, sigma.max(0.0)).expect("sigma >= 0");
        let mut copy = self.clone();
        if sigma <= 0.0 {
            return copy;
        }
        for layer in &mut copy.layers {
            for w in &mut layer.weights {
                *w += normal.sample(rng);
            }
            for b in &mut layer.biases {
                *b += normal.sample(rng);
            }
        }
        copy
    }
}

#[inline]
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Returns (post-activation, pre-activation).
fn layer_forward(layer: &Layer, input: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut pre = Vec::with_capacity(layer.out_dim);
    for o in 0..layer.out_dim {
        let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
        let mut acc = layer.biases[o];
        for (w, x) in row.iter().zip(input) {
            acc += w * x;
        }
        pre.push(acc);
    }
    let post = pre.iter().map(|&z| layer.activation.apply(z)).collect();
    (post, pre)
}

/// Mean weighted TD loss over a batch and its gradients.
#[derive(Debug, Clone)]
pub struct BackwardResult {
    pub gradients: Gradients,
    /// Per-sample |δ| for replay priority updates.
    pub td_abs: Vec<f64>,
    pub loss: f64,
}

/// Backpropagate the weighted TD loss
/// `L = mean_i wᵢ · loss(yᵢ − Q(sᵢ, aᵢ))`.
///
/// Gradients flow only through the chosen-action output of each sample.
pub fn backward(
    net: &DenseNet,
    observations: &[Vec<f64>],
    actions: &[usize],
    td_targets: &[f64],
    is_weights: &[f64],
    loss: Loss,
) -> Result<BackwardResult, NetError> {
    let batch = observations.len();
    assert!(
        batch == actions.len() && batch == td_targets.len() && batch == is_weights.len(),
        "batch arrays must agree in length"
    );
    if td_targets.iter().any(|y| !y.is_finite()) {
        return Err(NetError::NonFinite("td targets"));
    }

    let mut grads = Gradients::zeros_like(net);
    let mut td_abs = Vec::with_capacity(batch);
    let mut total_loss = 0.0;
    let scale = 1.0 / batch as f64;

    for i in 0..batch {
        let obs = &observations[i];
        if obs.len() != net.input_dim() {
            return Err(NetError::DimensionMismatch {
                expected: net.input_dim(),
                got: obs.len(),
            });
        }
        // Forward pass keeping every layer's activations.
        let mut posts: Vec<Vec<f64>> = Vec::with_capacity(net.layers.len());
        let mut pres: Vec<Vec<f64>> = Vec::with_capacity(net.layers.len());
        let mut current = obs.clone();
        for layer in &net.layers {
            let (post, pre) = layer_forward(layer, &current);
            current = post.clone();
            posts.push(post);
            pres.push(pre);
        }
        let q = posts.last().expect("at least one layer");
        let action = actions[i];
        let delta = td_targets[i] - q[action];
        td_abs.push(delta.abs());
        total_loss += is_weights[i] * loss.value(delta) * scale;

        // dL/dQ(s,a); other outputs receive no gradient.
        let dq = -is_weights[i] * loss.derivative(delta) * scale;
        let out_layer = net.layers.len() - 1;
        let mut delta_vec = vec![0.0; net.layers[out_layer].out_dim];
        delta_vec[action] =
            dq * net.layers[out_layer].activation.derivative(pres[out_layer][action]);

        for l in (0..net.layers.len()).rev() {
            let layer = &net.layers[l];
            let input: &[f64] = if l == 0 { obs } else { &posts[l - 1] };
            for o in 0..layer.out_dim {
                let dz = delta_vec[o];
                if dz == 0.0 {
                    continue;
                }
                let row = &mut grads.weights[l][o * layer.in_dim..(o + 1) * layer.in_dim];
                for (g, x) in row.iter_mut().zip(input) {
                    *g += dz * x;
                }
                grads.biases[l][o] += dz;
            }
            if l > 0 {
                let prev = &net.layers[l - 1];
                let mut next_delta = vec![0.0; layer.in_dim];
                for o in 0..layer.out_dim {
                    let dz = delta_vec[o];
                    if dz == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (nd, w) in next_delta.iter_mut().zip(row) {
                        *nd += dz * w;
                    }
                }
                for (nd, &z) in next_delta.iter_mut().zip(&pres[l - 1]) {
                    *nd *= prev.activation.derivative(z);
                }
                delta_vec = next_delta;
            }
        }
    }

    Ok(BackwardResult {
        gradients: grads,
        td_abs,
        loss: total_loss,
    })
}
