//! Measurement emulation: heterodyne records, energy spectral densities,
//! Lorentzian fits, tick extraction and Wald statistics.

mod iq;
mod noisy_drive;
mod spectrum;
mod ticks;

pub use iq::{readout_operator, synthesize_heterodyne, HeterodyneOptions, IQRecord, IQ_MAGIC, READOUT_ROW};
pub use noisy_drive::{noisy_drive_experiment, DrivePoint, FmNoise, NoisyDriveOptions, NoisyDriveReport};
pub use spectrum::{compute_esd, fit_lorentzian, EsdResult, LorentzianFit, Window};
pub use ticks::{extract_ticks, filter_zero_delay, fir_lowpass, Band, TickOptions, FIR_TAPS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::wald_pdf;

/// Successive clock periods (s).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TickSeries {
    pub periods: Vec<f64>,
}

impl TickSeries {
    pub fn new(periods: Vec<f64>) -> Self {
        Self { periods }
    }

    /// Periods between successive tick instants.
    pub fn with_instants(instants: Vec<f64>) -> Self {
        Self { periods: instants.windows(2).map(|w| w[1] - w[0]).collect() }
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.periods.iter().sum::<f64>() / self.periods.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.periods.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (self.periods.len() as f64 - 1.0)
    }

    /// `T̄²/ΔT²`.
    pub fn accuracy(&self) -> f64 {
        self.mean().powi(2) / self.variance()
    }

    pub fn extend(&mut self, other: &TickSeries) {
        self.periods.extend_from_slice(&other.periods);
    }

    /// One period per line under a `period_s` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period_s\n");
        for p in &self.periods {
            out.push_str(&format!("{p}\n"));
        }
        out
    }
}

/// Inverse Gaussian fit of a tick series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaldFit {
    /// Mean period (s).
    pub alpha: f64,
    /// Shape parameter (s).
    pub lambda: f64,
    /// `λ/α`.
    pub accuracy: f64,
    /// Coefficient of determination of the density against the period histogram.
    pub r_squared: f64,
    pub n: usize,
}

impl WaldFit {
    /// Period variance implied by the fit, `α³/λ`.
    pub fn variance(&self) -> f64 {
        self.alpha.powi(3) / self.lambda
    }

    /// A random (Poissonian) clock has accuracy 2.
    pub fn beats_random_clock(&self) -> bool {
        self.accuracy > 2.0
    }
}

/// Maximum-likelihood fit: `α̂ = T̄`, `λ̂ = n / Σ(1/T_i − 1/T̄)`.
pub fn fit_wald(ticks: &TickSeries) -> Result<WaldFit> {
    let n = ticks.len();
    if n < 10 {
        return Err(Error::InsufficientData { needed: 10, got: n });
    }
    if ticks.periods.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Degenerate("periods must be positive".into()));
    }
    let alpha = ticks.mean();
    let s: f64 = ticks.periods.iter().map(|t| 1.0 / t - 1.0 / alpha).sum();
    let spread = ticks.periods.iter().map(|t| (t - alpha).abs()).fold(0.0, f64::max);
    if !(spread > 1e-12 * alpha) || !(s > 0.0) {
        return Err(Error::Degenerate("periods have zero variance".into()));
    }
    let lambda = n as f64 / s;
    Ok(WaldFit { alpha, lambda, accuracy: lambda / alpha, r_squared: histogram_r_squared(&ticks.periods, alpha, lambda), n })
}

fn histogram_r_squared(periods: &[f64], alpha: f64, lambda: f64) -> f64 {
    let n = periods.len();
    let bins = ((n as f64).sqrt().round() as usize).clamp(10, 100);
    let lo = periods.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = periods.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for t in periods {
        let k = (((t - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let density: Vec<f64> = counts.iter().map(|c| *c as f64 / (n as f64 * width)).collect();
    let model: Vec<f64> = (0..bins).map(|k| wald_pdf(lo + (k as f64 + 0.5) * width, alpha, lambda).unwrap_or(0.0)).collect();
    let mean = density.iter().sum::<f64>() / bins as f64;
    let ss_res: f64 = density.iter().zip(&model).map(|(d, m)| (d - m).powi(2)).sum();
    let ss_tot: f64 = density.iter().map(|d| (d - mean).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

/// Sideband FWHM (Hz) of a noisy phase oscillator whose first-passage
/// statistics match `fit` at cycle frequency `lc_freq` (Hz). Uses
/// `ΔT² = 2πσ²/(ω³μ²)` and FWHM `= σ²/μ²` rad/s.
pub fn linewidth_from_ticks(fit: &WaldFit, lc_freq: f64) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * lc_freq;
    let diffusion = fit.variance() * omega.powi(3) / (2.0 * std::f64::consts::PI);
    diffusion / (2.0 * std::f64::consts::PI)
}
