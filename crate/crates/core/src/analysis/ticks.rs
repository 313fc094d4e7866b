use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{IQRecord, TickSeries};
use crate::error::{invalid, Error, Result};

pub const FIR_TAPS: usize = 127;

/// Linear-phase low-pass: Hamming-windowed sinc with unit DC gain.
pub fn fir_lowpass(cutoff: f64, sample_rate: f64, taps: usize) -> Result<Vec<f64>> {
    if !(cutoff > 0.0) || !(cutoff < sample_rate / 2.0) {
        return Err(invalid("lp_cutoff", format!("must lie in (0, {}) Hz, got {cutoff}", sample_rate / 2.0)));
    }
    if taps.is_multiple_of(2) {
        return Err(invalid("taps", "must be odd"));
    }
    let fc = cutoff / sample_rate;
    let mid = (taps / 2) as f64;
    let mut h: Vec<f64> = (0..taps)
        .map(|k| {
            let x = k as f64 - mid;
            let sinc = if x == 0.0 { 2.0 * fc } else { (2.0 * std::f64::consts::PI * fc * x).sin() / (std::f64::consts::PI * x) };
            let w = 0.54 - 0.46 * (2.0 * std::f64::consts::PI * k as f64 / (taps - 1) as f64).cos();
            sinc * w
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    Ok(h)
}

/// Convolution aligned so the output has no group delay; the signal is
/// extended with its end values.
pub fn filter_zero_delay(signal: &[f64], taps: &[f64]) -> Vec<f64> {
    let n = signal.len() as isize;
    let half = (taps.len() / 2) as isize;
    (0..n)
        .map(|i| {
            taps.iter()
                .enumerate()
                .map(|(k, h)| {
                    let j = (i + half - k as isize).clamp(0, n - 1);
                    h * signal[j as usize]
                })
                .sum()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// Envelope `|s(t)|` of the full record.
    #[default]
    Full,
    /// Real part of the positive-frequency content of `s(t)`.
    PositiveSideband,
    /// Real part of the negative-frequency content of `s(t)`.
    NegativeSideband,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TickOptions {
    /// Hz.
    pub lp_cutoff: f64,
    pub band: Band,
}

impl Default for TickOptions {
    fn default() -> Self {
        Self { lp_cutoff: 4e6, band: Band::Full }
    }
}

fn one_sided(rec: &IQRecord, positive: bool) -> Vec<f64> {
    let n = rec.len();
    let mut buf = rec.samples.clone();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        let keep = if positive { k >= 1 && k < n.div_ceil(2) } else { k > n / 2 };
        if !keep {
            *z = C64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.re / n as f64).collect()
}

/// Clock ticks of a record: band selection, low-pass filter, zero mean and
/// unit peak, then the rising edges of the sign function. Edge times are
/// refined by linear interpolation of the filtered signal.
pub fn extract_ticks(rec: &IQRecord, opts: &TickOptions) -> Result<TickSeries> {
    let taps = fir_lowpass(opts.lp_cutoff, rec.sample_rate, FIR_TAPS)?;
    let raw: Vec<f64> = match opts.band {
        Band::Full => rec.samples.iter().map(|z| z.norm()).collect(),
        Band::PositiveSideband => one_sided(rec, true),
        Band::NegativeSideband => one_sided(rec, false),
    };
    let filtered = filter_zero_delay(&raw, &taps);
    let edge = FIR_TAPS / 2;
    if filtered.len() <= 2 * edge + 2 {
        return Err(Error::InsufficientData { needed: 2 * edge + 3, got: filtered.len() });
    }
    let body = &filtered[edge..filtered.len() - edge];
    let mean = body.iter().sum::<f64>() / body.len() as f64;
    let peak = body.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::InsufficientData { needed: 3, got: 0 });
    }
    let norm: Vec<f64> = body.iter().map(|v| (v - mean) / peak).collect();
    let dt = rec.dt();
    let mut ticks = Vec::new();
    for k in 1..norm.len() {
        let (a, b) = (norm[k - 1], norm[k]);
        if a < 0.0 && b >= 0.0 {
            let w = a / (a - b);
            ticks.push((edge + k - 1) as f64 * dt + w * dt);
        }
    }
    if ticks.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: ticks.len() });
    }
    Ok(TickSeries::with_instants(ticks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_dc_gain_and_symmetry() {
        let h = fir_lowpass(4e6, 125e6, FIR_TAPS).unwrap();
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for k in 0..h.len() {
            assert!((h[k] - h[h.len() - 1 - k]).abs() < 1e-16);
        }
        assert!(fir_lowpass(70e6, 125e6, FIR_TAPS).is_err());
    }

    #[test]
    fn sinusoidal_envelope() {
        let rate = 125e6;
        let f = 2.5e6;
        let s: Vec<C64> = (0..4800).map(|k| C64::new(1.0 + 0.5 * (2.0 * std::f64::consts::PI * f * k as f64 / rate).sin(), 0.0)).collect();
        let rec = IQRecord::new(rate, s).unwrap();
        let ticks = extract_ticks(&rec, &TickOptions::default()).unwrap();
        assert!(ticks.periods.len() > 80);
        for p in &ticks.periods {
            assert!((p - 1.0 / f).abs() < 1.0 / rate, "{p}");
        }
    }

    #[test]
    fn sideband_band_selection() {
        let rate = 125e6;
        let f = 3e6;
        let s: Vec<C64> = (0..4800)
            .map(|k| {
                let t = k as f64 / rate;
                C64::new(2.0, 0.0) + 0.3 * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * t)
            })
            .collect();
        let rec = IQRecord::new(rate, s).unwrap();
        let ticks = extract_ticks(&rec, &TickOptions { band: Band::PositiveSideband, ..Default::default() }).unwrap();
        let mean = ticks.periods.iter().sum::<f64>() / ticks.periods.len() as f64;
        assert!((mean - 1.0 / f).abs() < 1e-3 / f);
    }

    #[test]
    fn flat_record_has_no_ticks() {
        let rec = IQRecord::new(125e6, vec![C64::new(1.0, 0.0); 4800]).unwrap();
        assert!(extract_ticks(&rec, &TickOptions::default()).is_err());
    }
}
