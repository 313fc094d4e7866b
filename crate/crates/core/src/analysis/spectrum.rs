use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::IQRecord;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    /// Hann window scaled to unit mean square, so white-noise energy is kept.
    Hann,
}

impl Window {
    fn weights(&self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => {
                let w: Vec<f64> = (0..n).map(|k| (std::f64::consts::PI * k as f64 / n as f64).sin().powi(2)).collect();
                let rms = (w.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
                w.into_iter().map(|v| v / rms).collect()
            }
        }
    }
}

/// Averaged energy spectral density, `ESD_k = |dt·FFT(s)_k|²`, on a
/// two-sided axis centred at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsdResult {
    /// Hz, ascending.
    pub freq: Vec<f64>,
    /// Energy per Hz (record units² · s / Hz).
    pub esd: Vec<f64>,
    pub n_averages: usize,
    /// Bin width (Hz).
    pub df: f64,
}

impl EsdResult {
    /// `Σ ESD·df`.
    pub fn energy(&self) -> f64 {
        self.esd.iter().sum::<f64>() * self.df
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,esd\n");
        for (f, e) in self.freq.iter().zip(&self.esd) {
            out.push_str(&format!("{f},{e}\n"));
        }
        out
    }

    /// Index of the bin nearest `f`.
    pub fn bin_of(&self, f: f64) -> usize {
        let k = ((f - self.freq[0]) / self.df).round();
        k.clamp(0.0, (self.freq.len() - 1) as f64) as usize
    }
}

pub fn compute_esd(records: &[IQRecord], window: Window) -> Result<EsdResult> {
    let first = records.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let (n, rate) = (first.len(), first.sample_rate);
    for r in records {
        if r.len() != n {
            return Err(Error::RecordMismatch(format!("lengths {} and {}", n, r.len())));
        }
        if r.sample_rate != rate {
            return Err(Error::RecordMismatch(format!("sample rates {} and {}", rate, r.sample_rate)));
        }
    }
    let dt = 1.0 / rate;
    let w = window.weights(n);
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut acc = vec![0.0; n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for r in records {
        for (k, (b, s)) in buf.iter_mut().zip(&r.samples).enumerate() {
            *b = s * w[k];
        }
        fft.process(&mut buf);
        for (a, z) in acc.iter_mut().zip(&buf) {
            *a += (z * dt).norm_sqr();
        }
    }
    let m = records.len() as f64;
    let df = rate / n as f64;
    let shift = n / 2;
    let mut freq = Vec::with_capacity(n);
    let mut esd = Vec::with_capacity(n);
    for j in 0..n {
        let k = (j + n - shift) % n;
        let kk = if k >= n - shift { k as f64 - n as f64 } else { k as f64 };
        freq.push(kk * df);
        esd.push(acc[k] / m);
    }
    Ok(EsdResult { freq, esd, n_averages: records.len(), df })
}

/// `amplitude·(γ/2)² / ((f − center)² + (γ/2)²) + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    /// Hz.
    pub center: f64,
    /// Full width at half maximum (Hz).
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Standard errors of `(amplitude, center, fwhm, offset)`.
    pub stderr: [f64; 4],
    pub iterations: usize,
}

impl LorentzianFit {
    pub fn eval(&self, f: f64) -> f64 {
        lorentzian(&Vector4::new(self.amplitude, self.center, self.fwhm, self.offset), f)
    }
}

fn lorentzian(p: &Vector4<f64>, f: f64) -> f64 {
    let h = 0.5 * p[2];
    p[0] * h * h / ((f - p[1]).powi(2) + h * h) + p[3]
}

fn lorentzian_grad(p: &Vector4<f64>, f: f64) -> Vector4<f64> {
    let (a, f0, g) = (p[0], p[1], p[2]);
    let h = 0.5 * g;
    let u = f - f0;
    let den = u * u + h * h;
    let shape = h * h / den;
    Vector4::new(shape, a * h * h * 2.0 * u / (den * den), a * h * u * u / (den * den), 1.0)
}

const LM_MAX_ITER: usize = 500;

/// Least-squares Lorentzian over the bins with `window.0 ≤ f ≤ window.1`.
pub fn fit_lorentzian(esd: &EsdResult, window: (f64, f64)) -> Result<LorentzianFit> {
    if !(window.1 > window.0) {
        return Err(invalid("window", "upper edge must exceed lower edge"));
    }
    let (fs, ys): (Vec<f64>, Vec<f64>) = esd.freq.iter().zip(&esd.esd).filter(|(f, _)| **f >= window.0 && **f <= window.1).map(|(f, e)| (*f, *e)).unzip();
    if fs.len() < 5 {
        return Err(Error::InsufficientData { needed: 5, got: fs.len() });
    }
    // Work in units of the window width and peak height for conditioning.
    let f_mid = 0.5 * (window.0 + window.1);
    let f_scale = window.1 - window.0;
    let y_scale = ys.iter().cloned().fold(0.0, f64::max);
    if !(y_scale > 0.0) {
        return Err(Error::FitFailure { iterations: 0, cost: 0.0, reason: "window holds no signal".into() });
    }
    let u: Vec<f64> = fs.iter().map(|f| (f - f_mid) / f_scale).collect();
    let v: Vec<f64> = ys.iter().map(|y| y / y_scale).collect();
    let k_max = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).expect("non-empty");
    let base = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let half = base + 0.5 * (v[k_max] - base);
    let above = v.iter().filter(|&&y| y >= half).count().max(1) as f64;
    let du = esd.df / f_scale;
    let mut p = Vector4::new(v[k_max] - base, u[k_max], (above * du).max(du), base);

    let cost_of = |p: &Vector4<f64>| u.iter().zip(&v).map(|(x, y)| (lorentzian(p, *x) - y).powi(2)).sum::<f64>();
    let mut cost = cost_of(&p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < LM_MAX_ITER {
        iterations += 1;
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (x, y) in u.iter().zip(&v) {
            let g = lorentzian_grad(&p, *x);
            let r = y - lorentzian(&p, *x);
            jtj += g * g.transpose();
            jtr += g * r;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj;
            for i in 0..4 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-30);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let c = cost_of(&trial);
            if trial[2] > 0.0 && c.is_finite() && c <= cost {
                let rel = (cost - c) / cost.max(1e-300);
                let small_step = step.norm() <= 1e-12 * (p.norm() + 1e-12);
                p = trial;
                cost = c;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-14 || small_step {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged || !improved {
            converged = true;
            break;
        }
    }
    if !converged || !(p[2] > 0.0) || !p.iter().all(|x| x.is_finite()) {
        return Err(Error::FitFailure { iterations, cost: cost * y_scale * y_scale, reason: "Levenberg–Marquardt did not converge".into() });
    }
    let mut jtj = Matrix4::zeros();
    for x in &u {
        let g = lorentzian_grad(&p, *x);
        jtj += g * g.transpose();
    }
    let dof = (u.len() as f64 - 4.0).max(1.0);
    let s2 = cost / dof;
    let cov = jtj.try_inverse().map(|m| m * s2);
    let scales = [y_scale, f_scale, f_scale, y_scale];
    let stderr = std::array::from_fn(|i| cov.map(|c| c[(i, i)].max(0.0).sqrt() * scales[i]).unwrap_or(f64::NAN));
    Ok(LorentzianFit { center: p[1] * f_scale + f_mid, fwhm: p[2] * f_scale, amplitude: p[0] * y_scale, offset: p[3] * y_scale, stderr, iterations })
}
