use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compute_esd, fit_lorentzian, readout_operator, EsdResult, IQRecord, LorentzianFit, Window, READOUT_ROW};
use crate::dynamics::{detect_limit_cycle, integrate, LimitCycleOptions, MeanFieldModel, Method, StateQuad};
use crate::error::{invalid, Error, Result};
use crate::slh::{AffineModeOperator, ClockParams};
use crate::stochastic::path_rng;

/// Band-limited frequency noise on the drive: the instantaneous frequency
/// offset is an Ornstein–Uhlenbeck process with RMS `deviation_hz` and
/// corner `cutoff_hz`. For `deviation ≪ cutoff` the drive line is a
/// Lorentzian of FWHM `2·deviation²/cutoff` (Hz).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FmNoise {
    pub deviation_hz: f64,
    pub cutoff_hz: f64,
}

impl FmNoise {
    pub fn expected_fwhm_hz(&self) -> f64 {
        2.0 * self.deviation_hz.powi(2) / self.cutoff_hz
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyDriveOptions {
    pub params: ClockParams,
    /// Drive photon rate ε² (photons/s).
    pub eps_sq: f64,
    /// Corner of the FM noise (Hz).
    pub cutoff_hz: f64,
    /// Diffusion rate on every quadrature (1/s).
    pub technical_noise: f64,
    pub n_records: usize,
    pub sample_rate: f64,
    pub n_samples: usize,
    /// Integration substeps per sample.
    pub substeps: usize,
    /// Deterministic warm-up onto the cycle (s).
    pub warmup: f64,
    /// Noisy settling before each record (s).
    pub settle: f64,
    pub seed: u64,
}

impl NoisyDriveOptions {
    /// Acquisition defaults: 100 records of 4800 samples at 125 MS/s and a
    /// 500 kHz noise corner.
    pub fn new(params: ClockParams, eps_sq: f64) -> Self {
        Self {
            params,
            eps_sq,
            cutoff_hz: 500e3,
            technical_noise: 2e3,
            n_records: 100,
            sample_rate: 125e6,
            n_samples: 4800,
            substeps: 8,
            warmup: 100e-6,
            settle: 4e-6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivePoint {
    pub deviation_hz: f64,
    pub drive: Option<LorentzianFit>,
    /// The drive line occupies a single bin, so it has no fitted width.
    pub transform_limited: bool,
    pub sideband: Option<LorentzianFit>,
    /// Fit failures, if any.
    pub error: Option<String>,
}

impl DrivePoint {
    /// Drive linewidth (Hz), zero when transform-limited.
    pub fn drive_fwhm(&self) -> Option<f64> {
        if self.transform_limited {
            Some(0.0)
        } else {
            self.drive.map(|f| f.fwhm)
        }
    }

    pub fn sideband_narrower(&self) -> Option<bool> {
        Some(self.sideband?.fwhm < self.drive_fwhm()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyDriveReport {
    /// Noise-free cycle frequency (Hz).
    pub cycle_frequency: f64,
    pub points: Vec<DrivePoint>,
    /// First deviation at which the sideband is narrower than the drive line.
    pub crossover_hz: Option<f64>,
}

impl NoisyDriveReport {
    pub fn drive_fwhm_monotone(&self) -> bool {
        let w: Vec<f64> = self.points.iter().filter_map(DrivePoint::drive_fwhm).collect();
        w.len() == self.points.len() && w.windows(2).all(|x| x[1] >= x[0])
    }
}

struct Engine<'a> {
    model: MeanFieldModel,
    readout: &'a AffineModeOperator,
    fm: FmNoise,
    opts: &'a NoisyDriveOptions,
}

impl Engine<'_> {
    /// One record, the drive carrying the phase `ψ(t)`.
    fn record(&self, start: StateQuad, stream: u64) -> Result<IQRecord> {
        let o = self.opts;
        let mut rng = path_rng(o.seed, stream);
        let dt = 1.0 / (o.sample_rate * o.substeps as f64);
        let corner = 2.0 * std::f64::consts::PI * self.fm.cutoff_hz;
        let decay = (-corner * dt).exp();
        let kick = self.fm.deviation_hz * (1.0 - decay * decay).sqrt();
        let tech = (2.0 * o.technical_noise * dt).sqrt();
        let mut df = self.fm.deviation_hz * rng.sample::<f64, _>(StandardNormal);
        let mut psi = 0.0f64;
        let mut y = start.to_array();
        let (da, db) = (self.model.drive_a, self.model.drive_b);
        let f = |v: &[f64; 4], ph: C64| {
            let m = self.model.with_drive(da * ph, db * ph);
            crate::dynamics::rhs(&m, &StateQuad::from_array(*v)).to_array()
        };
        let settle_steps = (o.settle / dt).round() as usize;
        let total = settle_steps + o.n_samples * o.substeps;
        let mut samples = Vec::with_capacity(o.n_samples);
        for k in 0..total {
            if k >= settle_steps && (k - settle_steps).is_multiple_of(o.substeps) {
                let s = StateQuad::from_array(y);
                let z = self.readout.coeffs[0] * s.alpha() + self.readout.coeffs[1] * s.beta() + self.readout.scalar * C64::from_polar(1.0, psi);
                samples.push(z);
            }
            let ph0 = C64::from_polar(1.0, psi);
            let df_next = if self.fm.deviation_hz > 0.0 { decay * df + kick * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
            let psi_next = psi + std::f64::consts::PI * (df + df_next) * dt;
            let ph1 = C64::from_polar(1.0, psi_next);
            let mut dw = [0.0; 4];
            if tech > 0.0 {
                for v in &mut dw {
                    *v = tech * rng.sample::<f64, _>(StandardNormal);
                }
            }
            let k1 = f(&y, ph0);
            let pred: [f64; 4] = std::array::from_fn(|i| y[i] + k1[i] * dt + dw[i]);
            let k2 = f(&pred, ph1);
            y = std::array::from_fn(|i| y[i] + 0.5 * (k1[i] + k2[i]) * dt + dw[i]);
            psi = psi_next;
            df = df_next;
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::StepSizeUnderflow { t: total as f64 * dt, h: dt });
        }
        IQRecord::new(o.sample_rate, samples)
    }

    fn esd(&self, start: StateQuad, point: usize) -> Result<EsdResult> {
        let recs: Vec<IQRecord> =
            (0..self.opts.n_records).into_par_iter().map(|r| self.record(start, (point * self.opts.n_records + r) as u64)).collect::<Result<_>>()?;
        compute_esd(&recs, Window::Rectangular)
    }
}

/// Drive and upper-sideband linewidths versus FM deviation.
pub fn noisy_drive_experiment(deviations_hz: &[f64], opts: &NoisyDriveOptions) -> Result<NoisyDriveReport> {
    if deviations_hz.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(invalid("fm_deviation_grid", "deviations must be finite and non-negative"));
    }
    if !(opts.cutoff_hz > 0.0) || opts.n_records == 0 || opts.substeps == 0 || opts.n_samples < 16 {
        return Err(invalid("noisy_drive", "cutoff must be positive; records, substeps and samples must be non-zero"));
    }
    let p = ClockParams { drive: opts.eps_sq.max(0.0).sqrt(), ..opts.params };
    let model = MeanFieldModel::from_params(&p);
    let readout = readout_operator(&p, READOUT_ROW)?;

    let dt = 1.0 / (opts.sample_rate * opts.substeps as f64);
    let warm = integrate(&model, StateQuad::default(), opts.warmup, dt, Method::Rk4)?;
    let lc_opts = LimitCycleOptions { transient: 0.6 * opts.warmup, ..LimitCycleOptions::for_model(&model) };
    let cycle = detect_limit_cycle(&warm, &lc_opts).ok_or_else(|| Error::Degenerate(format!("no limit cycle at eps_sq = {:e}", opts.eps_sq)))?;
    let start = warm.last().expect("non-empty");
    let f_lc = cycle.frequency;

    let points: Vec<DrivePoint> = deviations_hz
        .iter()
        .enumerate()
        .map(|(i, &dev)| {
            let engine = Engine { model, readout: &readout, fm: FmNoise { deviation_hz: dev, cutoff_hz: opts.cutoff_hz }, opts };
            let esd = match engine.esd(start, i) {
                Ok(e) => e,
                Err(e) => return DrivePoint { deviation_hz: dev, drive: None, transform_limited: false, sideband: None, error: Some(e.to_string()) },
            };
            let half = 0.45 * f_lc;
            let transform_limited = single_bin(&esd, (-half, half));
            let drive = if transform_limited { None } else { Some(fit_lorentzian(&esd, (-half, half))) };
            let sideband = fit_lorentzian(&esd, (f_lc - half, f_lc + half));
            let error = match (&drive, &sideband) {
                (Some(Err(e)), _) | (_, Err(e)) => Some(e.to_string()),
                _ => None,
            };
            DrivePoint { deviation_hz: dev, drive: drive.and_then(|d| d.ok()), transform_limited, sideband: sideband.ok(), error }
        })
        .collect();
    let crossover_hz = points.iter().find(|p| p.sideband_narrower() == Some(true)).map(|p| p.deviation_hz);
    Ok(NoisyDriveReport { cycle_frequency: f_lc, points, crossover_hz })
}

/// Whether one bin holds nearly all the energy of the window.
fn single_bin(esd: &EsdResult, window: (f64, f64)) -> bool {
    let vals: Vec<f64> = esd.freq.iter().zip(&esd.esd).filter(|(f, _)| **f >= window.0 && **f <= window.1).map(|(_, e)| *e).collect();
    let total: f64 = vals.iter().sum();
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    total > 0.0 && peak >= 0.99 * total
}
