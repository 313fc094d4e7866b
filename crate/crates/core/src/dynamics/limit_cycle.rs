use serde::{Deserialize, Serialize};

use super::{MeanFieldModel, StateQuad, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCycleInfo {
    /// Seconds.
    pub period: f64,
    /// Hz.
    pub frequency: f64,
    /// Peak-to-peak of `|α|` after the transient.
    pub amplitude_a: f64,
    /// Peak-to-peak of `|β|` after the transient.
    pub amplitude_b: f64,
    pub mean_point: StateQuad,
    /// Relative standard deviation of the individual period estimates.
    pub period_spread: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitCycleOptions {
    /// Leading span discarded before analysis (s).
    pub transient: f64,
    /// Oscillation requires peak-to-peak `|α|` above `threshold·max|α|`.
    pub threshold: f64,
    /// Largest accepted relative spread of period estimates.
    pub max_spread: f64,
    /// Fewest full periods needed after the transient.
    pub min_periods: usize,
}

impl LimitCycleOptions {
    /// Transient `20/min(κ_a, κ_b)`, threshold `1e−3`, spread 1 %.
    pub fn for_model(model: &MeanFieldModel) -> Self {
        Self { transient: 20.0 / model.kappa_a().min(model.kappa_b()), threshold: 1e-3, max_spread: 0.01, min_periods: 5 }
    }
}

/// Upward crossings of `signal − level`, linearly interpolated in time.
pub(crate) fn upward_crossings(t: &[f64], signal: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..signal.len() {
        let (a, b) = (signal[k - 1] - level, signal[k] - level);
        if a < 0.0 && b >= 0.0 {
            let w = a / (a - b);
            out.push(t[k - 1] + w * (t[k] - t[k - 1]));
        }
    }
    out
}

/// Sustained oscillation of `|α(t)|` after the transient, or `None` when the
/// trajectory settles or the oscillation is irregular.
pub fn detect_limit_cycle(traj: &Trajectory, opts: &LimitCycleOptions) -> Option<LimitCycleInfo> {
    let t0 = *traj.t.first()?;
    let start = traj.t.partition_point(|&t| t < t0 + opts.transient);
    let t = &traj.t[start..];
    let states = &traj.states[start..];
    if t.len() < 4 {
        return None;
    }
    let amp_a: Vec<f64> = states.iter().map(|s| s.alpha().norm()).collect();
    let amp_b: Vec<f64> = states.iter().map(|s| s.beta().norm()).collect();
    let pp = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_a = amp_a.iter().cloned().fold(0.0, f64::max);
    let amplitude_a = pp(&amp_a);
    if !(amplitude_a > opts.threshold * max_a) {
        return None;
    }
    let mean = amp_a.iter().sum::<f64>() / amp_a.len() as f64;
    let crossings = upward_crossings(t, &amp_a, mean);
    if crossings.len() < opts.min_periods + 1 {
        return None;
    }
    let periods: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let n = periods.len() as f64;
    let period = periods.iter().sum::<f64>() / n;
    let spread = (periods.iter().map(|p| (p - period).powi(2)).sum::<f64>() / n).sqrt() / period;
    if !(spread < opts.max_spread) {
        return None;
    }
    let m = states.len() as f64;
    let sum = states.iter().fold([0.0; 4], |acc, s| {
        let v = s.to_array();
        std::array::from_fn(|i| acc[i] + v[i])
    });
    Some(LimitCycleInfo {
        period,
        frequency: 1.0 / period,
        amplitude_a,
        amplitude_b: pp(&amp_b),
        mean_point: StateQuad::from_array(sum.map(|v| v / m)),
        period_spread: spread,
    })
}
