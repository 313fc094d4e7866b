use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::fixed_points::{find_fixed_points_seeded, newton_polish, FixedPointOptions};
use super::{FixedPointReport, MeanFieldModel, StabilityClass, StateQuad};
use crate::error::{invalid, Result};
use crate::slh::ClockParams;

/// A mean-field model whose drive terms scale with `ε = √(ε²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveTemplate {
    pub base: MeanFieldModel,
    pub gain_a: C64,
    pub gain_b: C64,
}

impl DriveTemplate {
    /// Coherent-feedback clock; the drive enters mode `b` with gain `ε̄/ε`.
    pub fn from_params(p: &ClockParams) -> Self {
        let base = MeanFieldModel::from_params(&ClockParams { drive: 0.0, ..*p });
        Self { base, gain_a: C64::new(0.0, 0.0), gain_b: C64::new(p.drive_gain(), 0.0) }
    }

    pub fn model_at(&self, eps_sq: f64) -> MeanFieldModel {
        let eps = eps_sq.max(0.0).sqrt();
        self.base.with_drive(self.gain_a * eps, self.gain_b * eps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub fixed: FixedPointOptions,
    /// Bisection steps used to locate each class change between grid points.
    pub refine_steps: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { fixed: FixedPointOptions { n_starts: 5, ..Default::default() }, refine_steps: 30 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps_sq: f64,
    /// `(branch id, fixed point)`; ids persist along continuation.
    pub branches: Vec<(usize, FixedPointReport)>,
}

/// A change of stability class along one branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub branch_id: usize,
    pub eps_sq_before: f64,
    pub eps_sq_after: f64,
    /// Bisection estimate of the crossing, inside `[eps_sq_before, eps_sq_after]`.
    pub eps_sq: f64,
    pub from: StabilityClass,
    pub to: StabilityClass,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub points: Vec<SweepPoint>,
    pub transitions: Vec<Transition>,
}

pub const CSV_HEADER: &str = "eps_sq,branch_id,alpha_sq,beta_sq,class,re_l1,re_l2,re_l3,re_l4,im_l1,im_l2,im_l3,im_l4";

impl BifurcationDiagram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            for (id, fp) in &p.branches {
                let re: Vec<String> = fp.eigenvalues.iter().map(|l| l.re.to_string()).collect();
                let im: Vec<String> = fp.eigenvalues.iter().map(|l| l.im.to_string()).collect();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    p.eps_sq,
                    id,
                    fp.state.alpha().norm_sqr(),
                    fp.state.beta().norm_sqr(),
                    fp.class,
                    re.join(","),
                    im.join(",")
                ));
            }
        }
        out
    }
}

fn refine(template: &DriveTemplate, opts: &SweepOptions, tol: f64, (mut lo, mut s_lo, from): (f64, StateQuad, StabilityClass), mut hi: f64) -> f64 {
    for _ in 0..opts.refine_steps {
        let mid = 0.5 * (lo + hi);
        let model = template.model_at(mid);
        match newton_polish(&model, s_lo, &opts.fixed) {
            Some(s) if FixedPointReport::at(&model, s, tol).class == from => {
                lo = mid;
                s_lo = s;
            }
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

/// Fixed points and their stability on every `ε²` of `grid`, continuing
/// branches from one grid point to the next.
pub fn sweep_drive(template: &DriveTemplate, grid: &[f64], opts: &SweepOptions) -> Result<BifurcationDiagram> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("eps_sq_grid", "must be strictly increasing"));
    }
    if grid.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(invalid("eps_sq_grid", "entries must be finite and non-negative"));
    }
    let mut points: Vec<SweepPoint> = Vec::with_capacity(grid.len());
    let mut transitions = Vec::new();
    let mut next_id = 0;
    for &eps_sq in grid {
        let model = template.model_at(eps_sq);
        let tol = opts.fixed.hyperbolic_tol.unwrap_or_else(|| model.hyperbolic_tol());
        let prev: &[(usize, FixedPointReport)] = points.last().map(|p| p.branches.as_slice()).unwrap_or(&[]);
        let seeds: Vec<StateQuad> = prev.iter().map(|(_, fp)| fp.state).collect();
        let found = find_fixed_points_seeded(&model, &opts.fixed, &seeds);
        let mut taken = vec![false; found.len()];
        let mut branches = Vec::with_capacity(found.len());
        for (id, fp) in prev {
            let Some(cont) = newton_polish(&model, fp.state, &opts.fixed) else { continue };
            let hit = found
                .iter()
                .enumerate()
                .filter(|(k, f)| !taken[*k] && f.state.distance(&cont) < opts.fixed.dedup_tol.max(1e-6 * cont.norm()))
                .min_by(|a, b| a.1.state.distance(&cont).total_cmp(&b.1.state.distance(&cont)));
            if let Some((k, f)) = hit {
                taken[k] = true;
                branches.push((*id, *f));
            }
        }
        for (k, f) in found.iter().enumerate() {
            if !taken[k] {
                branches.push((next_id, *f));
                next_id += 1;
            }
        }
        branches.sort_by_key(|(id, _)| *id);
        if let Some(last) = points.last() {
            for (id, before) in &last.branches {
                if let Some((_, after)) = branches.iter().find(|(j, _)| j == id) {
                    if before.class != after.class {
                        let est = refine(template, opts, tol, (last.eps_sq, before.state, before.class), eps_sq);
                        transitions.push(Transition {
                            branch_id: *id,
                            eps_sq_before: last.eps_sq,
                            eps_sq_after: eps_sq,
                            eps_sq: est,
                            from: before.class,
                            to: after.class,
                        });
                    }
                }
            }
        }
        points.push(SweepPoint { eps_sq, branches });
    }
    Ok(BifurcationDiagram { points, transitions })
}
