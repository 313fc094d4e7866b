//! Noisy phase oscillator, Hopf normal form and mean-field equations with
//! additive noise; first-passage clock ticks and the Wald law.

mod wald;

pub use wald::{ks_test, wald_cdf, wald_pdf, KsResult};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::TickSeries;
use crate::dynamics::{rhs, MeanFieldModel, StateQuad, Trajectory};
use crate::error::{invalid, Error, Result};

/// Random stream of one path: the same `(seed, path)` pair always yields the
/// same numbers, whichever thread draws them.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `dθ = ω dt + (σ/μ) dW`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseOscillatorParams {
    /// rad/s.
    pub omega: f64,
    /// Amplification rate (1/s).
    pub mu: f64,
    /// Noise strength; `σ/μ` is in rad/√s.
    pub sigma: f64,
}

impl PhaseOscillatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(invalid("mu", format!("must be positive, got {}", self.mu)));
        }
        if !(self.sigma >= 0.0) {
            return Err(invalid("sigma", format!("must be non-negative, got {}", self.sigma)));
        }
        if !self.omega.is_finite() {
            return Err(invalid("omega", "must be finite"));
        }
        Ok(())
    }

    /// Phase diffusion coefficient `(σ/μ)²`, which is also the Lorentzian
    /// FWHM of `e^{iθ}` in rad/s.
    pub fn phase_diffusion(&self) -> f64 {
        (self.sigma / self.mu).powi(2)
    }

    pub fn mean_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    /// `2πσ²/(ω³μ²)`.
    pub fn period_variance(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.sigma.powi(2) / (self.omega.powi(3) * self.mu.powi(2))
    }

    /// Wald spread parameter of the period distribution, `4π²μ²/σ²`.
    pub fn wald_lambda(&self) -> f64 {
        self.mean_period().powi(3) / self.period_variance()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    /// Step (s).
    pub dt: f64,
    pub seed: u64,
    pub n_paths: usize,
    /// Keep every `record_every`-th step.
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

impl SdeConfig {
    pub fn new(dt: f64, seed: u64, n_paths: usize) -> Self {
        Self { dt, seed, n_paths, record_every: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be at least 1"));
        }
        Ok(())
    }

    fn steps(&self, t_end: f64) -> Result<usize> {
        self.validate()?;
        if !(t_end >= 0.0) {
            return Err(invalid("t_end", "must be non-negative"));
        }
        Ok((t_end / self.dt + 1e-9).floor() as usize)
    }
}

/// Phase paths sampled every `dt·record_every`, starting at `θ = 0`.
pub fn simulate_phase(p: &PhaseOscillatorParams, cfg: &SdeConfig, t_end: f64) -> Result<Vec<Vec<f64>>> {
    p.validate()?;
    let steps = cfg.steps(t_end)?;
    let noise = p.sigma / p.mu * cfg.dt.sqrt();
    Ok((0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(cfg.seed, path as u64);
            let mut theta = 0.0;
            let mut out = Vec::with_capacity(steps / cfg.record_every + 1);
            out.push(theta);
            for k in 1..=steps {
                theta += p.omega * cfg.dt + noise * normal(&mut rng);
                if k % cfg.record_every == 0 {
                    out.push(theta);
                }
            }
            out
        })
        .collect())
}

const MAX_STEPS_PER_TICK: u64 = 1 << 32;

/// Times at which the phase first reaches `2π, 4π, …`; one series of
/// `n_ticks` periods per path.
pub fn first_passage_ticks(p: &PhaseOscillatorParams, cfg: &SdeConfig, n_ticks: usize) -> Result<Vec<TickSeries>> {
    p.validate()?;
    cfg.validate()?;
    if n_ticks == 0 {
        return Err(invalid("n_ticks", "must be at least 1"));
    }
    if p.omega <= 0.0 && p.sigma == 0.0 {
        return Err(Error::NeverCrosses { omega: p.omega, sigma: p.sigma });
    }
    let noise = p.sigma / p.mu * cfg.dt.sqrt();
    let tau = 2.0 * std::f64::consts::PI;
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(cfg.seed, path as u64);
            let (mut theta, mut step) = (0.0f64, 0u64);
            let mut last_tick = 0.0;
            let mut periods = Vec::with_capacity(n_ticks);
            let mut level = tau;
            let mut since = 0u64;
            while periods.len() < n_ticks {
                let next = theta + p.omega * cfg.dt + noise * normal(&mut rng);
                while next >= level && periods.len() < n_ticks {
                    let w = (level - theta) / (next - theta);
                    let t_cross = (step as f64 + w) * cfg.dt;
                    periods.push(t_cross - last_tick);
                    last_tick = t_cross;
                    level += tau;
                    since = 0;
                }
                theta = next;
                step += 1;
                since += 1;
                if since > MAX_STEPS_PER_TICK {
                    return Err(Error::NeverCrosses { omega: p.omega, sigma: p.sigma });
                }
            }
            Ok(TickSeries::new(periods))
        })
        .collect()
}

/// Path of the Hopf normal form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanarPath {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PlanarPath {
    /// Times at which the unwrapped polar angle first reaches successive
    /// multiples of `2π` above its starting value.
    pub fn angle_ticks(&self) -> TickSeries {
        let tau = 2.0 * std::f64::consts::PI;
        let mut theta = Vec::with_capacity(self.t.len());
        let mut prev = 0.0f64;
        for (k, (x, y)) in self.x.iter().zip(&self.y).enumerate() {
            let a = y.atan2(*x);
            let unwrapped = if k == 0 { a } else { prev + (a - prev + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI };
            theta.push(unwrapped);
            prev = unwrapped;
        }
        let mut ticks = Vec::new();
        if let Some(&start) = theta.first() {
            let mut level = start + tau;
            for k in 1..theta.len() {
                while theta[k] >= level && theta[k - 1] < level {
                    let w = (level - theta[k - 1]) / (theta[k] - theta[k - 1]);
                    ticks.push(self.t[k - 1] + w * (self.t[k] - self.t[k - 1]));
                    level += tau;
                }
                while theta[k] >= level {
                    level += tau;
                }
            }
        }
        TickSeries::new(ticks.windows(2).map(|w| w[1] - w[0]).collect())
    }
}

/// `dx = [μx − ωy − (x²+y²)x]dt`, `dy = [ωx + μy − (x²+y²)y]dt + σ dW`,
/// integrated with the stochastic Heun scheme.
pub fn simulate_normal_form(mu: f64, omega: f64, sigma: f64, cfg: &SdeConfig, t_end: f64, start: (f64, f64)) -> Result<Vec<PlanarPath>> {
    if !(mu > 0.0) {
        return Err(invalid("mu", format!("must be positive, got {mu}")));
    }
    let steps = cfg.steps(t_end)?;
    let f = |x: f64, y: f64| {
        let r2 = x * x + y * y;
        (mu * x - omega * y - r2 * x, omega * x + mu * y - r2 * y)
    };
    let noise = sigma * cfg.dt.sqrt();
    Ok((0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(cfg.seed, path as u64);
            let (mut x, mut y) = start;
            let cap = steps / cfg.record_every + 1;
            let mut out = PlanarPath { t: Vec::with_capacity(cap), x: Vec::with_capacity(cap), y: Vec::with_capacity(cap) };
            out.t.push(0.0);
            out.x.push(x);
            out.y.push(y);
            for k in 1..=steps {
                let dw = if sigma > 0.0 { noise * normal(&mut rng) } else { 0.0 };
                let (fx, fy) = f(x, y);
                let (px, py) = (x + fx * cfg.dt, y + fy * cfg.dt + dw);
                let (gx, gy) = f(px, py);
                x += 0.5 * (fx + gx) * cfg.dt;
                y += 0.5 * (fy + gy) * cfg.dt + dw;
                if k % cfg.record_every == 0 {
                    out.t.push(k as f64 * cfg.dt);
                    out.x.push(x);
                    out.y.push(y);
                }
            }
            out
        })
        .collect())
}

/// Additive noise on the mean-field quadratures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSpec {
    /// Diffusion rate (1/s) added to `x_a` and `y_a` by measurement-based
    /// feedback; zero for coherent feedback.
    pub gamma: f64,
    /// Diffusion rate (1/s) on all four quadratures, standing in for noise
    /// sources common to both schemes.
    pub technical: f64,
}

impl DiffusionSpec {
    /// `Γ = λ_fb²·κ_a1·κ_b2`, with `λ_fb` a feedback-gain scale in √s.
    pub fn measurement_feedback(lambda_fb: f64, kappa_a1: f64, kappa_b2: f64, technical: f64) -> Self {
        Self { gamma: lambda_fb * lambda_fb * kappa_a1 * kappa_b2, technical }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(invalid("gamma", format!("must be non-negative, got {}", self.gamma)));
        }
        if !(self.technical >= 0.0) {
            return Err(invalid("technical", format!("must be non-negative, got {}", self.technical)));
        }
        Ok(())
    }
}

/// Mean-field equations plus independent increments `√(2Γ dt)·N(0,1)` on
/// `x_a`, `y_a` and `√(2Γ_tech dt)·N(0,1)` on every quadrature; stochastic
/// Heun scheme.
pub fn simulate_meanfield_sde(model: &MeanFieldModel, d: &DiffusionSpec, cfg: &SdeConfig, t_end: f64, s0: StateQuad) -> Result<Vec<Trajectory>> {
    d.validate()?;
    let steps = cfg.steps(t_end)?;
    let a_noise = (2.0 * d.gamma * cfg.dt).sqrt();
    let t_noise = (2.0 * d.technical * cfg.dt).sqrt();
    let f = |v: &[f64; 4]| rhs(model, &StateQuad::from_array(*v)).to_array();
    let dt = cfg.dt;
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(cfg.seed, path as u64);
            let mut y = s0.to_array();
            let cap = steps / cfg.record_every + 1;
            let mut tr = Trajectory { t: Vec::with_capacity(cap), states: Vec::with_capacity(cap) };
            tr.t.push(0.0);
            tr.states.push(s0);
            for k in 1..=steps {
                let mut dw = [0.0; 4];
                if d.technical > 0.0 {
                    for v in &mut dw {
                        *v = t_noise * normal(&mut rng);
                    }
                }
                if d.gamma > 0.0 {
                    dw[0] += a_noise * normal(&mut rng);
                    dw[1] += a_noise * normal(&mut rng);
                }
                let k1 = f(&y);
                let pred: [f64; 4] = std::array::from_fn(|i| y[i] + k1[i] * dt + dw[i]);
                let k2 = f(&pred);
                y = std::array::from_fn(|i| y[i] + 0.5 * (k1[i] + k2[i]) * dt + dw[i]);
                if !y.iter().all(|v| v.is_finite()) {
                    return Err(Error::StepSizeUnderflow { t: k as f64 * dt, h: dt });
                }
                if k % cfg.record_every == 0 {
                    tr.t.push(k as f64 * dt);
                    tr.states.push(StateQuad::from_array(y));
                }
            }
            Ok(tr)
        })
        .collect()
}
