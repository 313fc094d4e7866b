//! Run configuration. Frequencies are ν = ω/2π in Hz and are converted to
//! angular units once, at ingestion. Every block rejects unknown keys.

use std::path::PathBuf;

use cfclock::analysis::{Band, Window};
use cfclock::device::{CircuitGeometry, Constants, DeviceTargets, LineTemplate};
use cfclock::dynamics::Method;
use cfclock::slh::ClockParams;
use cfclock::{angular, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Compose,
    Stability,
    Sweep,
    Simulate,
    Sde,
    Ticks,
    Esd,
    Device,
    NoisyDrive,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Compose => "compose",
            Experiment::Stability => "stability",
            Experiment::Sweep => "sweep",
            Experiment::Simulate => "simulate",
            Experiment::Sde => "sde",
            Experiment::Ticks => "ticks",
            Experiment::Esd => "esd",
            Experiment::Device => "device",
            Experiment::NoisyDrive => "noisy-drive",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Defaults to the measured device with the drive off.
    pub params: Option<ParamsConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub rng: RngConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
    pub simulate: Option<SimulateConfig>,
    pub noise: Option<NoiseConfig>,
    pub record: Option<RecordConfig>,
    pub ticks: Option<TicksConfig>,
    pub esd: Option<EsdConfig>,
    pub device: Option<DeviceConfig>,
    pub noisy_drive: Option<NoisyDriveConfig>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub kappa_a1_hz: f64,
    pub kappa_a_int_hz: f64,
    pub kappa_b1_hz: f64,
    pub kappa_b2_hz: f64,
    pub kappa_b_int_hz: f64,
    pub delta_a_hz: f64,
    pub delta_b_hz: f64,
    pub kerr_a_hz: f64,
    pub kerr_b_hz: f64,
    pub eta1_amplitude: f64,
    pub eta2_amplitude: f64,
    pub phi1_rad: f64,
    pub phi2_rad: f64,
    pub drive_rate_per_s: Option<f64>,
    pub power_dbm: Option<f64>,
    pub drive_frequency_hz: Option<f64>,
}

/// Drive strength as a photon rate, or as a power at a drive frequency.
#[derive(Clone, Copy, Debug, Default)]
pub struct DriveConfig {
    pub drive_rate_per_s: Option<f64>,
    pub power_dbm: Option<f64>,
    pub drive_frequency_hz: Option<f64>,
}

impl DriveConfig {
    /// `ε²` in photons/s; zero when no drive is given.
    pub fn eps_sq(&self) -> Result<f64> {
        match (self.drive_rate_per_s, self.power_dbm, self.drive_frequency_hz) {
            (Some(r), None, None) => {
                if r >= 0.0 && r.is_finite() {
                    Ok(r)
                } else {
                    Err(schema("drive_rate_per_s", format!("must be finite and non-negative, got {r}")))
                }
            }
            (None, Some(p), Some(f)) => cfclock::device::dbm_to_rate(p, angular(f)),
            (None, None, None) => Ok(0.0),
            (None, Some(_), None) => Err(schema("drive_frequency_hz", "required with power_dbm")),
            _ => Err(schema("drive_rate_per_s", "give either drive_rate_per_s or power_dbm with drive_frequency_hz")),
        }
    }
}

impl ParamsConfig {
    pub fn drive(&self) -> DriveConfig {
        DriveConfig { drive_rate_per_s: self.drive_rate_per_s, power_dbm: self.power_dbm, drive_frequency_hz: self.drive_frequency_hz }
    }

    pub fn to_params(self) -> Result<ClockParams> {
        let p = ClockParams {
            kappa_a1: angular(self.kappa_a1_hz),
            kappa_a_int: angular(self.kappa_a_int_hz),
            kappa_b1: angular(self.kappa_b1_hz),
            kappa_b2: angular(self.kappa_b2_hz),
            kappa_b_int: angular(self.kappa_b_int_hz),
            delta_a: angular(self.delta_a_hz),
            delta_b: angular(self.delta_b_hz),
            kerr_a: angular(self.kerr_a_hz),
            kerr_b: angular(self.kerr_b_hz),
            eta1: self.eta1_amplitude,
            eta2: self.eta2_amplitude,
            phi1: self.phi1_rad,
            phi2: self.phi2_rad,
            drive: 0.0,
        }
        .with_drive_rate(self.drive().eps_sq()?);
        p.validate()?;
        Ok(p)
    }
}

impl RunConfig {
    pub fn params(&self) -> Result<ClockParams> {
        match &self.params {
            Some(p) => p.to_params(),
            None => Ok(ClockParams::reference_device()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Rk4,
    AdaptiveRk45,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt_s: f64,
    pub t_end_s: f64,
    /// Span discarded before limit-cycle analysis; defaults to `20/min(κ_a, κ_b)`.
    pub transient_s: Option<f64>,
    pub method: MethodName,
    pub atol: f64,
    pub rtol: f64,
    /// Newton tolerance for fixed points.
    pub newton_tol: f64,
    /// Starting points per quadrature axis in the fixed-point search.
    pub n_starts: usize,
    /// Keep every n-th step of stochastic paths.
    pub record_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt_s: 1e-9,
            t_end_s: 100e-6,
            transient_s: None,
            method: MethodName::Rk4,
            atol: 1e-10,
            rtol: 1e-8,
            newton_tol: 1e-12,
            n_starts: 5,
            record_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn method(&self) -> Method {
        match self.method {
            MethodName::Rk4 => Method::Rk4,
            MethodName::AdaptiveRk45 => Method::AdaptiveRk45 { atol: self.atol, rtol: self.rtol },
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("solver.dt_s", self.dt_s)?;
        positive("solver.t_end_s", self.t_end_s)?;
        positive("solver.atol", self.atol)?;
        positive("solver.rtol", self.rtol)?;
        positive("solver.newton_tol", self.newton_tol)?;
        if let Some(t) = self.transient_s {
            if !(t >= 0.0 && t < self.t_end_s) {
                return Err(schema("solver.transient_s", format!("must lie in [0, t_end_s), got {t}")));
            }
        }
        if self.n_starts == 0 || self.record_every == 0 {
            return Err(schema("solver", "n_starts and record_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RngConfig {
    pub seed: u64,
    pub n_paths: usize,
}

impl Default for RngConfig {
    fn default() -> Self {
        Self { seed: 0, n_paths: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json] }
    }
}

/// Drive-rate grid: an explicit list, or `n_points` evenly spaced values.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub eps_sq_grid_per_s: Option<Vec<f64>>,
    pub eps_sq_start_per_s: Option<f64>,
    pub eps_sq_stop_per_s: Option<f64>,
    pub n_points: Option<usize>,
    /// Bisection steps per transition.
    #[serde(default = "refine_steps")]
    pub refine_steps: usize,
    /// Integrate at each grid point and report limit cycles.
    #[serde(default)]
    pub detect_cycles: bool,
}

fn refine_steps() -> usize {
    30
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        match (&self.eps_sq_grid_per_s, self.eps_sq_start_per_s, self.eps_sq_stop_per_s, self.n_points) {
            (Some(g), None, None, None) => {
                if g.is_empty() {
                    return Err(schema("sweep.eps_sq_grid_per_s", "must not be empty"));
                }
                Ok(g.clone())
            }
            (None, Some(a), Some(b), Some(n)) => {
                if n < 2 || !(b > a) {
                    return Err(schema("sweep", "need n_points ≥ 2 and eps_sq_stop_per_s > eps_sq_start_per_s"));
                }
                Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
            }
            _ => Err(schema("sweep", "give eps_sq_grid_per_s, or eps_sq_start_per_s, eps_sq_stop_per_s and n_points")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// `[x_a, y_a, x_b, y_b]` in √photons; the origin by default.
    #[serde(default)]
    pub initial_quadratures_sqrt_photons: [f64; 4],
}

/// Additive quadrature noise. `gamma_per_s` acts on mode a only; it may be
/// given directly or through the feedback-gain scale `lambda_fb_sqrt_s`.
#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub gamma_per_s: Option<f64>,
    pub lambda_fb_sqrt_s: Option<f64>,
    #[serde(default)]
    pub technical_per_s: f64,
}

impl NoiseConfig {
    pub fn diffusion(&self, p: &ClockParams) -> Result<cfclock::stochastic::DiffusionSpec> {
        let d = match (self.gamma_per_s, self.lambda_fb_sqrt_s) {
            (Some(g), None) => cfclock::stochastic::DiffusionSpec { gamma: g, technical: self.technical_per_s },
            (None, Some(l)) => cfclock::stochastic::DiffusionSpec::measurement_feedback(l, p.kappa_a1, p.kappa_b2, self.technical_per_s),
            (None, None) => cfclock::stochastic::DiffusionSpec { gamma: 0.0, technical: self.technical_per_s },
            (Some(_), Some(_)) => return Err(schema("noise", "give gamma_per_s or lambda_fb_sqrt_s, not both")),
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IqFormat {
    #[default]
    Binary,
    Csv,
}

/// Heterodyne acquisition of simulated records.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecordConfig {
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    /// Trajectory time of the first sample.
    pub t_start_s: f64,
    /// Variance of the complex white noise added to each sample.
    pub noise_variance: f64,
    /// Write each record to disk.
    pub write_records: bool,
    pub iq_format: IqFormat,
}

impl Default for RecordConfig {
    fn default() -> Self {
        Self { sample_rate_hz: 125e6, n_samples: 4800, t_start_s: 50e-6, noise_variance: 0.0, write_records: false, iq_format: IqFormat::Binary }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TicksConfig {
    /// Analyse these IQ files instead of simulating.
    #[serde(default)]
    pub iq_paths: Vec<PathBuf>,
    #[serde(default = "lp_cutoff")]
    pub lp_cutoff_hz: f64,
    #[serde(default)]
    pub band: Band,
}

fn lp_cutoff() -> f64 {
    4e6
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsdConfig {
    #[serde(default)]
    pub iq_paths: Vec<PathBuf>,
    #[serde(default)]
    pub window: Window,
    /// `[low, high]` frequency windows for Lorentzian fits.
    #[serde(default)]
    pub fit_windows_hz: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub l0_h_per_m: f64,
    pub c0_f_per_m: f64,
    pub d_a_m: f64,
    pub d_b_m: f64,
    pub lj_a_h: f64,
    pub lj_b_h: f64,
    pub kappa0_a1_hz: f64,
    pub kappa0_b1_hz: f64,
    pub kappa0_b2_hz: f64,
    pub omega0_a_hz: f64,
    pub omega0_b_hz: f64,
    pub hbar_j_s: Option<f64>,
    pub flux_quantum_wb: Option<f64>,
}

impl GeometryConfig {
    pub fn to_geometry(self) -> CircuitGeometry {
        let d = Constants::default();
        CircuitGeometry {
            l0: self.l0_h_per_m,
            c0: self.c0_f_per_m,
            d_a: self.d_a_m,
            d_b: self.d_b_m,
            lj_a: self.lj_a_h,
            lj_b: self.lj_b_h,
            kappa0_a1: angular(self.kappa0_a1_hz),
            kappa0_b1: angular(self.kappa0_b1_hz),
            kappa0_b2: angular(self.kappa0_b2_hz),
            omega0_a: angular(self.omega0_a_hz),
            omega0_b: angular(self.omega0_b_hz),
            constants: Constants { hbar: self.hbar_j_s.unwrap_or(d.hbar), flux_quantum: self.flux_quantum_wb.unwrap_or(d.flux_quantum) },
        }
    }
}

/// Characterisation data from which a geometry is fitted.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsConfig {
    pub flux_rad: f64,
    pub omega_a_hz: f64,
    pub omega_b_zero_hz: f64,
    pub omega_b_flux_hz: f64,
    pub kerr_a_hz: f64,
    pub kerr_b_flux_hz: f64,
    pub kappa_a1_hz: f64,
    pub kappa_b_zero_hz: f64,
}

impl TargetsConfig {
    pub fn to_targets(self) -> DeviceTargets {
        DeviceTargets {
            flux: self.flux_rad,
            omega_a: angular(self.omega_a_hz),
            omega_b_zero: angular(self.omega_b_zero_hz),
            omega_b_flux: angular(self.omega_b_flux_hz),
            kerr_a: angular(self.kerr_a_hz),
            kerr_b_flux: angular(self.kerr_b_flux_hz),
            kappa_a1: angular(self.kappa_a1_hz),
            kappa_b_zero: angular(self.kappa_b_zero_hz),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    pub l0_h_per_m: f64,
    pub d_a_m: f64,
    pub d_b_m: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub geometry: Option<GeometryConfig>,
    pub targets: Option<TargetsConfig>,
    pub line: Option<LineConfig>,
    pub flux_grid_rad: Vec<f64>,
}

impl DeviceConfig {
    pub fn line(&self) -> LineTemplate {
        self.line.map(|l| LineTemplate { l0: l.l0_h_per_m, d_a: l.d_a_m, d_b: l.d_b_m }).unwrap_or_default()
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoisyDriveConfig {
    pub fm_deviations_hz: Vec<f64>,
    #[serde(default = "fm_cutoff")]
    pub fm_cutoff_hz: f64,
    #[serde(default = "technical")]
    pub technical_per_s: f64,
    #[serde(default = "n_records")]
    pub n_records: usize,
    #[serde(default = "substeps")]
    pub substeps: usize,
    #[serde(default = "warmup")]
    pub warmup_s: f64,
    #[serde(default = "settle")]
    pub settle_s: f64,
}

fn fm_cutoff() -> f64 {
    500e3
}
fn technical() -> f64 {
    2e3
}
fn n_records() -> usize {
    100
}
fn substeps() -> usize {
    8
}
fn warmup() -> f64 {
    100e-6
}
fn settle() -> f64 {
    4e-6
}

pub fn schema(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(schema(name, format!("must be positive and finite, got {v}")))
    }
}
