use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::MeanFieldModel;

/// Synchronised limit cycle of the symmetric, undriven, resonant model
/// `α̇ = −κα/2 − gβ − 2iK_a|α|²α`, `β̇ = −κβ/2 − gα − 2iK_b|β|²β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedCycle {
    pub exists: bool,
    /// Common squared radius `r_a² = r_b²`.
    pub r_sq: f64,
    /// Sine of the relative phase `θ_a − θ_b`. Its sign follows `K_a − K_b`.
    pub sin_phi: f64,
}

pub fn reduced_limit_cycle(g: f64, kappa: f64, kerr_a: f64, kerr_b: f64) -> ReducedCycle {
    let dk = kerr_a - kerr_b;
    if !(g > kappa / 2.0) || dk == 0.0 {
        return ReducedCycle { exists: false, r_sq: 0.0, sin_phi: 0.0 };
    }
    let root = (g * g - kappa * kappa / 4.0).sqrt();
    ReducedCycle { exists: true, r_sq: root / dk.abs(), sin_phi: dk.signum() * (1.0 - kappa * kappa / (4.0 * g * g)).sqrt() }
}

pub fn reduced_model(g: f64, kappa: f64, kerr_a: f64, kerr_b: f64) -> MeanFieldModel {
    let zero = C64::new(0.0, 0.0);
    MeanFieldModel {
        drift_a: C64::new(-kappa / 2.0, 0.0),
        drift_b: C64::new(-kappa / 2.0, 0.0),
        coupling_ab: C64::new(g, 0.0),
        coupling_ba: C64::new(g, 0.0),
        kerr_a,
        kerr_b,
        drive_a: zero,
        drive_b: zero,
    }
}

/// `(ṙ_a, ṙ_b, φ̇)` of the reduced model in polar form, `φ = θ_a − θ_b`.
pub fn reduced_polar_rhs(g: f64, kappa: f64, kerr_a: f64, kerr_b: f64, y: &[f64; 3]) -> [f64; 3] {
    let [ra, rb, phi] = *y;
    [
        -kappa / 2.0 * ra - g * rb * phi.cos(),
        -kappa / 2.0 * rb - g * ra * phi.cos(),
        g * (rb / ra + ra / rb) * phi.sin() - 2.0 * (kerr_a * ra * ra - kerr_b * rb * rb),
    ]
}
