use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{SlhTriple, MODE_A, MODE_B};
use crate::dynamics::MeanFieldModel;
use crate::error::{Error, Result};

/// Coherent-state flow of every mode of a triple:
/// `ż = linear·z − 2i·kerr∘|z|²∘z + drive`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeFlow {
    pub modes: Vec<String>,
    pub linear: DMatrix<C64>,
    pub kerr: Vec<f64>,
    pub drive: Vec<C64>,
}

impl ModeFlow {
    pub fn eval(&self, z: &[C64]) -> Vec<C64> {
        let i = C64::new(0.0, 1.0);
        (0..self.modes.len())
            .map(|m| {
                let lin: C64 = (0..z.len()).map(|n| self.linear[(m, n)] * z[n]).sum();
                lin - 2.0 * i * self.kerr[m] * z[m].norm_sqr() * z[m] + self.drive[m]
            })
            .collect()
    }
}

/// `ż_m = −i ∂H/∂z_m* − ½ [C†(C z + c)]_m` with `⟨a†a²⟩ → |α|²α`, where `C`
/// stacks the mode coefficients of the collapse operators and `c` their
/// constant parts.
pub fn mode_flow(g: &SlhTriple) -> ModeFlow {
    let n = g.modes().len();
    let ports = g.n_ports();
    let c = DMatrix::from_fn(ports, n, |r, m| g.collapse()[r].coeffs[m]);
    let scalars: Vec<C64> = g.collapse().iter().map(|op| op.scalar).collect();
    let minus_i = C64::new(0.0, -1.0);
    let h = g.hamiltonian();

    let damping = c.adjoint() * &c;
    let linear = DMatrix::from_fn(n, n, |m, k| minus_i * h.quad[(m, k)] - 0.5 * damping[(m, k)]);
    let drive = (0..n)
        .map(|m| {
            let leak: C64 = (0..ports).map(|r| c[(r, m)].conj() * scalars[r]).sum();
            minus_i * h.linear[m] - 0.5 * leak
        })
        .collect();
    ModeFlow { modes: g.modes().to_vec(), linear, kerr: h.kerr.clone(), drive }
}

/// Two-mode mean-field model of a network over modes `a` and `b`.
pub fn extract_mean_field(g: &SlhTriple) -> Result<MeanFieldModel> {
    let expected = vec![MODE_A.to_string(), MODE_B.to_string()];
    let (ia, ib) = match (g.mode_index(MODE_A), g.mode_index(MODE_B)) {
        (Some(ia), Some(ib)) if g.modes().len() == 2 => (ia, ib),
        _ => return Err(Error::ModeMismatch { expected, found: g.modes().to_vec() }),
    };
    let flow = mode_flow(g);
    Ok(MeanFieldModel {
        drift_a: flow.linear[(ia, ia)],
        drift_b: flow.linear[(ib, ib)],
        coupling_ab: -flow.linear[(ia, ib)],
        coupling_ba: -flow.linear[(ib, ia)],
        kerr_a: flow.kerr[ia],
        kerr_b: flow.kerr[ib],
        drive_a: -flow.drive[ia],
        drive_b: -flow.drive[ib],
    })
}
