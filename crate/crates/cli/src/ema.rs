//! Reporting-time exponential moving average. Never applied to training
//! signals, only to curves written for plotting.

/// `y₀ = x₀; y_t = factor·x_t + (1-factor)·y_{t-1}`.
pub fn ema_smooth(series: &[f64], factor: f64) -> Vec<f64> {
    assert!(factor > 0.0 && factor <= 1.0, "factor must lie in (0,1]");
    let mut out = Vec::with_capacity(series.len());
    let mut prev = None;
    for &x in series {
        let y = match prev {
            None => x,
            Some(p) => factor * x + (1.0 - factor) * p,
        };
        out.push(y);
        prev = Some(y);
    }
    out
}
