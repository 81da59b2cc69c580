//! Exponential degradation-model fitting.
//!
//! The health model is `H(t) = 1 - d - exp(a·t^b)` over cycles `t = 1..n`,
//! fitted by unconstrained nonlinear least squares (Levenberg–Marquardt)
//! from a multi-start grid. Taken literally the model gives `H(0) = -d`, so
//! curves that start near health 1 are reached with negative `d`; the fit
//! leaves all three parameters free and reports the residual.

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::linalg::{solve, SquareMat};

/// Fitted parameters and their residual sum of squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationFit {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub residual_sse: f64,
}

impl DegradationFit {
    /// Model value at cycle `t` (1-based).
    pub fn predict(&self, t: f64) -> f64 {
        1.0 - self.d - guarded_exp(self.a * t.powf(self.b))
    }

    /// Flat inputs fit with a ≈ 0: the curve carries no degradation trend.
    pub fn is_degenerate(&self, len: usize) -> bool {
        (self.predict(1.0) - self.predict(len as f64)).abs() < 1e-6
    }
}

const MAX_EXP: f64 = 700.0;

#[inline]
fn guarded_exp(x: f64) -> f64 {
    x.min(MAX_EXP).exp()
}

/// Multi-start grids. `b` spans sub-linear to super-quadratic growth and
/// `d` covers both the literal positive regime and the negative offsets
/// needed for curves that start near 1.
const B_STARTS: [f64; 6] = [0.5, 0.8, 1.0, 1.5, 2.0, 3.0];
const D_STARTS: [f64; 7] = [-1.5, -1.0, -0.75, -0.5, -0.25, 0.0, 0.05];

/// Least-squares fit of the degradation model to a health sequence
/// (`health[i]` is the value at cycle `i + 1`).
pub fn fit_degradation_model(health: &[f64]) -> Result<DegradationFit, DataError> {
    if health.len() < 10 {
        return Err(DataError::NotEnoughData(format!(
            "degradation fit needs at least 10 samples, got {}",
            health.len()
        )));
    }
    if health.iter().any(|v| !v.is_finite()) {
        return Err(DataError::NonFinite("health values"));
    }

    let mut best: Option<DegradationFit> = None;
    for &b0 in &B_STARTS {
        for &d0 in &D_STARTS {
            let a0 = closed_form_a(health, b0, d0);
            let candidate = levenberg_marquardt(health, a0, b0, d0);
            if best
                .map(|cur| candidate.residual_sse < cur.residual_sse)
                .unwrap_or(true)
            {
                best = Some(candidate);
            }
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Given (b, d), the SSE-optimal `a` of the linearized model
/// `ln(1 - d - y) = a·t^b` (values clamped away from the log singularity).
fn closed_form_a(health: &[f64], b: f64, d: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &y) in health.iter().enumerate() {
        let t = (i + 1) as f64;
        let inner = (1.0 - d - y).max(1e-9);
        let tb = t.powf(b);
        num += tb * inner.ln();
        den += tb * tb;
    }
    if den > 0.0 {
        num / den
    } else {
        1e-4
    }
}

fn sse(health: &[f64], a: f64, b: f64, d: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &y) in health.iter().enumerate() {
        let t = (i + 1) as f64;
        let r = 1.0 - d - guarded_exp(a * t.powf(b)) - y;
        acc += r * r;
    }
    acc
}

fn levenberg_marquardt(health: &[f64], a0: f64, b0: f64, d0: f64) -> DegradationFit {
    let mut p = [a0, b0, d0];
    let mut current = sse(health, p[0], p[1], p[2]);
    let mut lambda = 1e-3;

    for _ in 0..200 {
        // Normal equations J'J and J'r for residuals r_t = model - y.
        let mut jtj = SquareMat::zeros(3);
        let mut jtr = [0.0f64; 3];
        for (i, &y) in health.iter().enumerate() {
            let t = (i + 1) as f64;
            let tb = t.powf(p[1]);
            let e = guarded_exp(p[0] * tb);
            let r = 1.0 - p[2] - e - y;
            let grad = [-tb * e, -p[0] * tb * t.ln() * e, -1.0];
            for i2 in 0..3 {
                jtr[i2] += grad[i2] * r;
                for j2 in 0..3 {
                    let v = jtj.get(i2, j2) + grad[i2] * grad[j2];
                    jtj.set(i2, j2, v);
                }
            }
        }

        let mut improved = false;
        for _ in 0..8 {
            let mut damped = jtj.clone();
            for k in 0..3 {
                let v = damped.get(k, k) * (1.0 + lambda);
                damped.set(k, k, v.max(1e-12));
            }
            let rhs = [-jtr[0], -jtr[1], -jtr[2]];
            let Some(step) = solve(&damped, &rhs) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            if trial.iter().any(|v| !v.is_finite()) {
                lambda *= 10.0;
                continue;
            }
            let trial_sse = sse(health, trial[0], trial[1], trial[2]);
            if trial_sse.is_finite() && trial_sse < current {
                p = trial;
                current = trial_sse;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || current < 1e-22 {
            break;
        }
    }

    DegradationFit {
        a: p[0],
        b: p[1],
        d: p[2],
        residual_sse: current,
    }
}
