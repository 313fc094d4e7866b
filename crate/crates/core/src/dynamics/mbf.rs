use num_complex::Complex64 as C64;

use super::MeanFieldModel;
use crate::slh::ClockParams;

/// Mean-field model of the measurement-based feedback clock: the heterodyne
/// current of `a` modulates a drive on `b` with gain `λ_fb` and phase `φ_fb`.
///
/// ```text
/// α̇ = −(iΔ_a + κ_a/2)α − 2iK_a|α|²α − iε − 2iλ_fb√(κ_a1κ_b2) e^{−iφ_fb} β
/// β̇ = −(iΔ_b + κ_b/2)β − 2iK_b|β|²β − √(κ_a1κ_b1) α
/// ```
///
/// `κ_b` is the total decay of `b` including port interference; the bare
/// detuning `Δ_b` is used. With `φ_fb = π/2`, `λ_fb = 1/2` and lossless,
/// phase-free routing the drive-free flow coincides with the coherent one.
pub fn mbf_mean_field(p: &ClockParams, lambda_fb: f64, phi_fb: f64) -> MeanFieldModel {
    let i = C64::new(0.0, 1.0);
    MeanFieldModel {
        drift_a: -(i * p.delta_a + p.kappa_a() / 2.0),
        drift_b: -(i * p.delta_b + p.kappa_b() / 2.0),
        coupling_ab: 2.0 * i * lambda_fb * (p.kappa_a1 * p.kappa_b2).sqrt() * C64::from_polar(1.0, -phi_fb),
        coupling_ba: C64::new((p.kappa_a1 * p.kappa_b1).sqrt(), 0.0),
        kerr_a: p.kerr_a,
        kerr_b: p.kerr_b,
        drive_a: i * p.drive,
        drive_b: C64::new(0.0, 0.0),
    }
}
