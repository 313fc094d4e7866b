use nalgebra::Vector4;
use rayon::prelude::*;

use super::{jacobian, rhs, FixedPointReport, MeanFieldModel, StateQuad};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointOptions {
    /// Starting points per quadrature axis; the grid has `n_starts⁴` points.
    pub n_starts: usize,
    /// Newton stops once the step is below `tol·(1 + |s|)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Solutions closer than this (quadrature units) are merged.
    pub dedup_tol: f64,
    /// Defaults to [`MeanFieldModel::hyperbolic_tol`].
    pub hyperbolic_tol: Option<f64>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { n_starts: 8, tol: 1e-12, max_iter: 200, dedup_tol: 1e-6, hyperbolic_tol: None }
    }
}

fn scale_radius(model: &MeanFieldModel) -> f64 {
    let (ka, kb) = (model.kappa_a().abs(), model.kappa_b().abs());
    let (k_min, k_max) = (ka.min(kb), ka.max(kb));
    let drive = model.drive_a.norm().max(model.drive_b.norm());
    let kerr = model.kerr_a.abs().max(model.kerr_b.abs());
    let mut r: f64 = 0.0;
    if k_min > 0.0 {
        r = r.max(2.0 * drive / k_min);
    }
    if kerr > 0.0 {
        r = r.max((k_max / (2.0 * kerr)).sqrt());
    }
    if r > 0.0 && r.is_finite() {
        r
    } else {
        1.0
    }
}

fn residual_scale(model: &MeanFieldModel) -> f64 {
    [model.drift_a.norm(), model.drift_b.norm(), model.coupling_ab.norm(), model.coupling_ba.norm()].into_iter().fold(0.0, f64::max).max(1.0)
}

/// Damped Newton iteration on the vector field from `start`. Returns the
/// converged state, or `None` when the iteration stalls or diverges.
pub fn newton_polish(model: &MeanFieldModel, start: StateQuad, opts: &FixedPointOptions) -> Option<StateQuad> {
    let limit = 1e3 * (scale_radius(model) + start.norm());
    let res_tol = 1e-8 * residual_scale(model);
    let mut s = Vector4::from(start.to_array());
    let f_of = |v: &Vector4<f64>| Vector4::from(rhs(model, &StateQuad::from_array((*v).into())).to_array());
    let mut f = f_of(&s);
    for _ in 0..opts.max_iter {
        let j = jacobian(model, &StateQuad::from_array(s.into()));
        let step = j.lu().solve(&(-f))?;
        let f_norm = f.norm();
        let mut t = 1.0;
        let (mut s_new, mut f_new) = (s + step, f_of(&(s + step)));
        while f_new.norm() > (1.0 - 1e-4 * t) * f_norm && t > 1.0 / 1024.0 {
            t *= 0.5;
            s_new = s + step * t;
            f_new = f_of(&s_new);
        }
        let moved = (s_new - s).norm();
        s = s_new;
        f = f_new;
        if !s.iter().all(|v| v.is_finite()) || s.norm() > limit {
            return None;
        }
        if moved <= opts.tol * (1.0 + s.norm()) && f.norm() <= res_tol * (1.0 + s.norm()) {
            return Some(StateQuad::from_array(s.into()));
        }
    }
    (f.norm() <= res_tol * (1.0 + s.norm())).then(|| StateQuad::from_array(s.into()))
}

fn start_grid(model: &MeanFieldModel, n: usize) -> Vec<StateQuad> {
    let r = scale_radius(model);
    let axis: Vec<f64> = (0..n).map(|k| if n == 1 { 0.0 } else { r * (2.0 * k as f64 / (n - 1) as f64 - 1.0) }).collect();
    let mut out = Vec::with_capacity(n.pow(4));
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                for &d in &axis {
                    out.push(StateQuad::new(a, b, c, d));
                }
            }
        }
    }
    out
}

/// Fixed point of the flow with the Kerr terms removed.
fn linear_solution(model: &MeanFieldModel) -> Option<StateQuad> {
    let det = model.drift_a * model.drift_b - model.coupling_ab * model.coupling_ba;
    if det.norm() == 0.0 {
        return None;
    }
    let alpha = (model.drive_a * model.drift_b + model.coupling_ab * model.drive_b) / det;
    let beta = (model.drift_a * model.drive_b + model.coupling_ba * model.drive_a) / det;
    let s = StateQuad::from_fields(alpha, beta);
    s.is_finite().then_some(s)
}

pub(crate) fn dedup(found: impl IntoIterator<Item = StateQuad>, tol: f64) -> Vec<StateQuad> {
    let mut unique: Vec<StateQuad> = Vec::new();
    for s in found {
        if !unique.iter().any(|u| u.distance(&s) < tol) {
            unique.push(s);
        }
    }
    unique
}

/// All fixed points reachable by Newton from `seeds`, the origin, the
/// Kerr-free solution and the deterministic multi-start grid, deduplicated and sorted by distance from
/// the origin.
pub fn find_fixed_points_seeded(model: &MeanFieldModel, opts: &FixedPointOptions, seeds: &[StateQuad]) -> Vec<FixedPointReport> {
    let mut starts = seeds.to_vec();
    starts.push(StateQuad::default());
    starts.extend(linear_solution(model));
    starts.extend(start_grid(model, opts.n_starts.max(1)));
    let found: Vec<Option<StateQuad>> = starts.par_iter().map(|s| newton_polish(model, *s, opts)).collect();
    let mut unique = dedup(found.into_iter().flatten(), opts.dedup_tol);
    unique.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let tol = opts.hyperbolic_tol.unwrap_or_else(|| model.hyperbolic_tol());
    unique.into_iter().map(|s| FixedPointReport::at(model, s, tol)).collect()
}

pub fn find_fixed_points(model: &MeanFieldModel, opts: &FixedPointOptions) -> Vec<FixedPointReport> {
    find_fixed_points_seeded(model, opts, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::StabilityClass;
    use num_complex::Complex64 as C64;

    #[test]
    fn linear_unforced_origin() {
        let m = MeanFieldModel {
            drift_a: C64::new(-1.0, -3.0),
            drift_b: C64::new(-2.0, 1.0),
            coupling_ab: C64::new(0.0, 0.0),
            coupling_ba: C64::new(0.0, 0.0),
            kerr_a: 0.0,
            kerr_b: 0.0,
            drive_a: C64::new(0.0, 0.0),
            drive_b: C64::new(0.0, 0.0),
        };
        let fps = find_fixed_points(&m, &FixedPointOptions { n_starts: 3, ..Default::default() });
        assert_eq!(fps.len(), 1);
        assert!(fps[0].state.norm() < 1e-12);
        assert_eq!(fps[0].class, StabilityClass::Attractor);
        let mut re: Vec<f64> = fps[0].eigenvalues.iter().map(|l| l.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 2.0).abs() < 1e-12 && (re[3] + 1.0).abs() < 1e-12);
    }
}
