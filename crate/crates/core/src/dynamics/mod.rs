//! Semiclassical two-mode dynamics: vector field, Jacobian, integration,
//! fixed points, drive sweeps and limit cycles.

mod fixed_points;
mod limit_cycle;
mod mbf;
pub mod ode;
mod reduced;
mod sweep;

pub use fixed_points::{find_fixed_points, find_fixed_points_seeded, newton_polish, FixedPointOptions};
pub use limit_cycle::{detect_limit_cycle, LimitCycleInfo, LimitCycleOptions};
pub use mbf::mbf_mean_field;
pub use ode::{integrate, Method, Trajectory};
pub use reduced::{reduced_limit_cycle, reduced_model, reduced_polar_rhs, ReducedCycle};
pub use sweep::{sweep_drive, BifurcationDiagram, DriveTemplate, SweepOptions, SweepPoint, Transition, CSV_HEADER};

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::slh::ClockParams;

/// Coefficients of
///
/// ```text
/// α̇ = drift_a·α − 2i·kerr_a·|α|²α − coupling_ab·β − drive_a
/// β̇ = drift_b·β − 2i·kerr_b·|β|²β − coupling_ba·α − drive_b
/// ```
///
/// For the coherent-feedback clock `drift_a = −(iΔ_a + κ_a/2)`,
/// `coupling_ab = g_a e^{iφ₂}`, `coupling_ba = g_b e^{iφ₁}`, `drive_a = 0`
/// and `drive_b = ε̄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldModel {
    pub drift_a: C64,
    pub drift_b: C64,
    pub coupling_ab: C64,
    pub coupling_ba: C64,
    pub kerr_a: f64,
    pub kerr_b: f64,
    pub drive_a: C64,
    pub drive_b: C64,
}

impl MeanFieldModel {
    /// Closed-form coefficients of the coherent-feedback clock.
    pub fn from_params(p: &ClockParams) -> Self {
        let i = C64::new(0.0, 1.0);
        Self {
            drift_a: -(i * p.delta_a + p.kappa_a() / 2.0),
            drift_b: -(i * p.delta_b_eff() + p.kappa_b() / 2.0),
            coupling_ab: p.g_a() * C64::from_polar(1.0, p.phi2),
            coupling_ba: p.g_b() * C64::from_polar(1.0, p.phi1),
            kerr_a: p.kerr_a,
            kerr_b: p.kerr_b,
            drive_a: C64::new(0.0, 0.0),
            drive_b: C64::new(p.drive_eff(), 0.0),
        }
    }

    pub fn kappa_a(&self) -> f64 {
        -2.0 * self.drift_a.re
    }

    pub fn kappa_b(&self) -> f64 {
        -2.0 * self.drift_b.re
    }

    pub fn with_drive(mut self, drive_a: C64, drive_b: C64) -> Self {
        self.drive_a = drive_a;
        self.drive_b = drive_b;
        self
    }

    /// Default hyperbolicity tolerance, `1e−6·max(κ_a, κ_b)`.
    pub fn hyperbolic_tol(&self) -> f64 {
        1e-6 * self.kappa_a().abs().max(self.kappa_b().abs())
    }

    /// Complex vector field `(α̇, β̇)`.
    pub fn flow(&self, alpha: C64, beta: C64) -> (C64, C64) {
        let i = C64::new(0.0, 1.0);
        let da = self.drift_a * alpha - 2.0 * i * self.kerr_a * alpha.norm_sqr() * alpha - self.coupling_ab * beta - self.drive_a;
        let db = self.drift_b * beta - 2.0 * i * self.kerr_b * beta.norm_sqr() * beta - self.coupling_ba * alpha - self.drive_b;
        (da, db)
    }
}

/// Field quadratures, `α = x_a + i y_a`, `β = x_b + i y_b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateQuad {
    pub x_a: f64,
    pub y_a: f64,
    pub x_b: f64,
    pub y_b: f64,
}

impl StateQuad {
    pub fn new(x_a: f64, y_a: f64, x_b: f64, y_b: f64) -> Self {
        Self { x_a, y_a, x_b, y_b }
    }

    pub fn from_fields(alpha: C64, beta: C64) -> Self {
        Self::new(alpha.re, alpha.im, beta.re, beta.im)
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x_a, self.y_a, self.x_b, self.y_b]
    }

    pub fn alpha(&self) -> C64 {
        C64::new(self.x_a, self.y_a)
    }

    pub fn beta(&self) -> C64 {
        C64::new(self.x_b, self.y_b)
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &StateQuad) -> f64 {
        self.to_array().iter().zip(other.to_array()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Time derivative `(ẋ_a, ẏ_a, ẋ_b, ẏ_b)`.
pub fn rhs(model: &MeanFieldModel, s: &StateQuad) -> StateQuad {
    let (da, db) = model.flow(s.alpha(), s.beta());
    StateQuad::from_fields(da, db)
}

fn mode_block(drift: C64, kerr: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
    let (p, q) = (drift.re, drift.im);
    [[p + 4.0 * kerr * x * y, -q + 2.0 * kerr * (x * x + 3.0 * y * y)], [q - 2.0 * kerr * (3.0 * x * x + y * y), p - 4.0 * kerr * x * y]]
}

/// Analytic Jacobian of [`rhs`], rows and columns ordered `(x_a, y_a, x_b, y_b)`.
pub fn jacobian(model: &MeanFieldModel, s: &StateQuad) -> Matrix4<f64> {
    let ja = mode_block(model.drift_a, model.kerr_a, s.x_a, s.y_a);
    let jb = mode_block(model.drift_b, model.kerr_b, s.x_b, s.y_b);
    let (u, v) = (model.coupling_ab.re, model.coupling_ab.im);
    let (w, z) = (model.coupling_ba.re, model.coupling_ba.im);
    Matrix4::new(
        ja[0][0], ja[0][1], -u, v, //
        ja[1][0], ja[1][1], -v, -u, //
        -w, z, jb[0][0], jb[0][1], //
        -z, -w, jb[1][0], jb[1][1],
    )
}

/// Eigenvalues of a 4×4 real matrix, sorted by decreasing real part, then by
/// decreasing imaginary part.
pub fn eigenvalues(j: &Matrix4<f64>) -> [C64; 4] {
    let ev = j.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    Attractor,
    Repeller,
    Saddle,
    NonHyperbolic,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Attractor => "attractor",
            StabilityClass::Repeller => "repeller",
            StabilityClass::Saddle => "saddle",
            StabilityClass::NonHyperbolic => "non_hyperbolic",
        }
    }
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(eigenvalues: &[C64], hyperbolic_tol: f64) -> StabilityClass {
    if eigenvalues.iter().any(|l| l.re.abs() <= hyperbolic_tol) {
        StabilityClass::NonHyperbolic
    } else if eigenvalues.iter().all(|l| l.re < 0.0) {
        StabilityClass::Attractor
    } else if eigenvalues.iter().all(|l| l.re > 0.0) {
        StabilityClass::Repeller
    } else {
        StabilityClass::Saddle
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub state: StateQuad,
    pub eigenvalues: [C64; 4],
    pub class: StabilityClass,
    /// Euclidean norm of the vector field at `state`.
    pub residual: f64,
}

impl FixedPointReport {
    pub fn at(model: &MeanFieldModel, state: StateQuad, hyperbolic_tol: f64) -> Self {
        let eigenvalues = eigenvalues(&jacobian(model, &state));
        Self { state, eigenvalues, class: classify(&eigenvalues, hyperbolic_tol), residual: rhs(model, &state).norm() }
    }
}
