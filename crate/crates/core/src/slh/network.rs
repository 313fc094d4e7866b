//! Elementary components and the two-resonator feedback clock network.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{concatenate, feedback_reduce, series, AffineModeOperator, HamiltonianPoly, SlhTriple};
use crate::error::{invalid, Result};

/// Label of the feedback resonator mode.
pub const MODE_A: &str = "a";
/// Label of the flux-tunable clock resonator mode.
pub const MODE_B: &str = "b";

/// Parameters of the coherent-feedback clock. All rates, detunings and Kerr
/// coefficients are angular frequencies (rad/s); `drive` is the drive
/// amplitude `ε` in √(photons/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockParams {
    pub kappa_a1: f64,
    pub kappa_a_int: f64,
    pub kappa_b1: f64,
    pub kappa_b2: f64,
    pub kappa_b_int: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub kerr_a: f64,
    pub kerr_b: f64,
    /// Insertion-loss amplitude of the circulator between B and A's input.
    pub eta1: f64,
    /// Insertion-loss amplitude of the circulator between A and B.
    pub eta2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub drive: f64,
}

impl ClockParams {
    /// Flux-tuned operating point of the measured device, with the drive
    /// switched off. Rates follow the `/2π` values 2.52, 2.52, 1.64, 3.21,
    /// 0.11 MHz; detunings 1.8 MHz; Kerr −0.01 and −0.03 MHz; `η₁² = 0.18`,
    /// `η₂² = 0.03`; `φ₁ = 0`, `φ₂ = 0.39π`.
    pub fn reference_device() -> Self {
        let mhz = 2.0 * std::f64::consts::PI * 1e6;
        Self {
            kappa_a1: 3.21 * mhz,
            kappa_a_int: 0.11 * mhz,
            kappa_b1: 2.52 * mhz,
            kappa_b2: 2.52 * mhz,
            kappa_b_int: 1.64 * mhz,
            delta_a: 1.8 * mhz,
            delta_b: 1.8 * mhz,
            kerr_a: -0.01 * mhz,
            kerr_b: -0.03 * mhz,
            eta1: 0.18f64.sqrt(),
            eta2: 0.03f64.sqrt(),
            phi1: 0.0,
            phi2: 0.39 * std::f64::consts::PI,
            drive: 0.0,
        }
    }

    pub fn with_drive_rate(mut self, photons_per_second: f64) -> Self {
        self.drive = photons_per_second.max(0.0).sqrt();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("kappa_a1", self.kappa_a1),
            ("kappa_a_int", self.kappa_a_int),
            ("kappa_b1", self.kappa_b1),
            ("kappa_b2", self.kappa_b2),
            ("kappa_b_int", self.kappa_b_int),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("rate must be finite and non-negative, got {v}")));
            }
        }
        for (name, v) in [("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("insertion loss must lie in [0, 1], got {v}")));
            }
        }
        let rest = [
            ("delta_a", self.delta_a),
            ("delta_b", self.delta_b),
            ("kerr_a", self.kerr_a),
            ("kerr_b", self.kerr_b),
            ("phi1", self.phi1),
            ("phi2", self.phi2),
            ("drive", self.drive),
        ];
        for (name, v) in rest {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    fn transmission(&self) -> (f64, f64) {
        ((1.0 - self.eta1 * self.eta1).sqrt(), (1.0 - self.eta2 * self.eta2).sqrt())
    }

    pub fn kappa_a(&self) -> f64 {
        self.kappa_a1 + self.kappa_a_int
    }

    /// Total decay rate of B including interference between its two ports.
    pub fn kappa_b(&self) -> f64 {
        let (t1, t2) = self.transmission();
        self.kappa_b1 + self.kappa_b2 + self.kappa_b_int + 2.0 * (self.kappa_b1 * self.kappa_b2).sqrt() * t1 * t2 * (self.phi1 + self.phi2).cos()
    }

    /// Detuning of B shifted by the feedback loop.
    pub fn delta_b_eff(&self) -> f64 {
        let (t1, t2) = self.transmission();
        self.delta_b + (self.kappa_b1 * self.kappa_b2).sqrt() * t1 * t2 * (self.phi1 + self.phi2).sin()
    }

    /// Coupling of B into A's equation of motion.
    pub fn g_a(&self) -> f64 {
        self.transmission().1 * (self.kappa_a1 * self.kappa_b2).sqrt()
    }

    /// Coupling of A into B's equation of motion.
    pub fn g_b(&self) -> f64 {
        self.transmission().0 * (self.kappa_a1 * self.kappa_b1).sqrt()
    }

    /// Drive reaching resonator B, `ε̄ = √(1−η₁²)·√κ_b1·ε`.
    pub fn drive_eff(&self) -> f64 {
        self.drive_gain() * self.drive
    }

    /// `ε̄/ε`.
    pub fn drive_gain(&self) -> f64 {
        self.transmission().0 * self.kappa_b1.sqrt()
    }
}

/// Elementary network components.
#[derive(Clone, Debug, PartialEq)]
pub enum Component {
    /// Coherent displacement of the incoming field.
    Drive {
        amplitude: C64,
    },
    /// One port of a resonator, optionally carrying the resonator Hamiltonian
    /// `kerr·m†²m² + detuning·m†m`.
    CavityPort {
        mode: String,
        kappa: f64,
        hamiltonian: Option<(f64, f64)>,
    },
    /// Unguided loss channel of a resonator.
    LossPort {
        mode: String,
        kappa: f64,
    },
    /// Two-port lossy element with amplitude ratio `eta` diverted.
    BeamSplitter {
        eta: f64,
    },
    Phase {
        phi: f64,
    },
    Pad,
}

fn single_mode(mode: &str, kappa: f64, hamiltonian: Option<(f64, f64)>) -> Result<SlhTriple> {
    if !(kappa >= 0.0) {
        return Err(invalid("kappa", format!("must be non-negative, got {kappa}")));
    }
    let mut h = HamiltonianPoly::zero(1);
    if let Some((kerr, detuning)) = hamiltonian {
        h.kerr[0] = kerr;
        h.quad[(0, 0)] = C64::new(detuning, 0.0);
    }
    SlhTriple::new(vec![mode.to_string()], DMatrix::identity(1, 1), vec![AffineModeOperator::mode(1, 0, C64::new(kappa.sqrt(), 0.0))], h)
}

pub fn make_component(kind: &Component) -> Result<SlhTriple> {
    match kind {
        Component::Drive { amplitude } => {
            SlhTriple::new(Vec::new(), DMatrix::identity(1, 1), vec![AffineModeOperator::constant(0, *amplitude)], HamiltonianPoly::zero(0))
        }
        Component::CavityPort { mode, kappa, hamiltonian } => single_mode(mode, *kappa, *hamiltonian),
        Component::LossPort { mode, kappa } => single_mode(mode, *kappa, None),
        Component::BeamSplitter { eta } => {
            if !(0.0..=1.0).contains(eta) {
                return Err(invalid("eta", format!("must lie in [0, 1], got {eta}")));
            }
            let t = (1.0 - eta * eta).sqrt();
            let s = DMatrix::from_row_slice(2, 2, &[C64::new(t, 0.0), C64::new(*eta, 0.0), C64::new(-eta, 0.0), C64::new(t, 0.0)]);
            SlhTriple::new(Vec::new(), s, vec![AffineModeOperator::zero(0); 2], HamiltonianPoly::zero(0))
        }
        Component::Phase { phi } => {
            SlhTriple::new(Vec::new(), DMatrix::from_element(1, 1, C64::from_polar(1.0, *phi)), vec![AffineModeOperator::zero(0)], HamiltonianPoly::zero(0))
        }
        Component::Pad => Ok(SlhTriple::identity(1)),
    }
}

fn concat_all(parts: &[SlhTriple]) -> SlhTriple {
    let mut it = parts.iter();
    let first = it.next().expect("at least one part").clone();
    it.fold(first, |acc, g| concatenate(&acc, g))
}

/// Assembles the clock: resonator A with its loss channel, phase `φ₁`, the
/// drive and circulator loss `η₁` on one side; both ports of resonator B, its
/// loss channel, phase `φ₂` and circulator loss `η₂` on the other; then closes
/// the A→B and B→A loops.
///
/// The five output rows are, in order: the `η₁` loss port, A's internal loss,
/// the field leaving B's driven port, the `η₂` loss port and B's internal
/// loss. Collapse operators keep their drive displacements; see
/// [`SlhTriple::absorb_displacements`].
pub fn build_clock_network(p: &ClockParams) -> Result<SlhTriple> {
    p.validate()?;
    let pad = make_component(&Component::Pad)?;
    let a1 = make_component(&Component::CavityPort { mode: MODE_A.into(), kappa: p.kappa_a1, hamiltonian: Some((p.kerr_a, p.delta_a)) })?;
    let a_int = make_component(&Component::LossPort { mode: MODE_A.into(), kappa: p.kappa_a_int })?;
    let b1 = make_component(&Component::CavityPort { mode: MODE_B.into(), kappa: p.kappa_b1, hamiltonian: Some((p.kerr_b, p.delta_b)) })?;
    let b2 = make_component(&Component::CavityPort { mode: MODE_B.into(), kappa: p.kappa_b2, hamiltonian: None })?;
    let b_int = make_component(&Component::LossPort { mode: MODE_B.into(), kappa: p.kappa_b_int })?;
    let bs1 = make_component(&Component::BeamSplitter { eta: p.eta1 })?;
    let bs2 = make_component(&Component::BeamSplitter { eta: p.eta2 })?;
    let ph1 = make_component(&Component::Phase { phi: p.phi1 })?;
    let ph2 = make_component(&Component::Phase { phi: p.phi2 })?;
    let drive = make_component(&Component::Drive { amplitude: C64::new(p.drive, 0.0) })?;

    let a_side = concat_all(&[a1, pad.clone(), a_int]);
    let a_chain = series(
        &concat_all(&[bs1, pad.clone()]),
        &series(&concat_all(&[drive, pad.clone(), pad.clone()]), &series(&concat_all(&[ph1, pad.clone(), pad.clone()]), &a_side)?)?,
    )?;

    let b_side = concat_all(&[b1, b2, pad.clone(), b_int]);
    let b_chain = series(&concat_all(&[pad.clone(), bs2, pad.clone()]), &series(&concat_all(&[pad.clone(), ph2, pad.clone(), pad]), &b_side)?)?;

    let open = concatenate(&a_chain, &b_chain);
    let closed_ab = feedback_reduce(&open, 0, 3)?;
    feedback_reduce(&closed_ab, 3, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_is_trivial() {
        let g = make_component(&Component::Pad).unwrap();
        assert_eq!(g.n_ports(), 1);
        assert_eq!(g.collapse()[0], AffineModeOperator::zero(0));
        assert_eq!(g.hamiltonian().n_modes(), 0);
    }

    #[test]
    fn transparent_beamsplitter() {
        let g = make_component(&Component::BeamSplitter { eta: 0.0 }).unwrap();
        assert_eq!(g.scattering(), &DMatrix::<C64>::identity(2, 2));
    }

    #[test]
    fn beamsplitter_is_unitary() {
        let g = make_component(&Component::BeamSplitter { eta: 0.37 }).unwrap();
        assert!(g.unitarity_error() < 1e-15);
    }

    #[test]
    fn cavity_port_carries_resonator_hamiltonian() {
        let g = make_component(&Component::CavityPort { mode: "b".into(), kappa: 9.0, hamiltonian: Some((-0.2, 1.5)) }).unwrap();
        assert_eq!(g.modes(), ["b".to_string()]);
        assert_eq!(g.collapse()[0].coeffs[0], C64::new(3.0, 0.0));
        assert_eq!(g.hamiltonian().kerr[0], -0.2);
        assert_eq!(g.hamiltonian().quad[(0, 0)], C64::new(1.5, 0.0));
    }

    #[test]
    fn component_validation() {
        assert!(make_component(&Component::BeamSplitter { eta: 1.2 }).is_err());
        assert!(make_component(&Component::LossPort { mode: "a".into(), kappa: -1.0 }).is_err());
    }

    #[test]
    fn clock_network_shape() {
        let g = build_clock_network(&ClockParams::reference_device().with_drive_rate(1e9)).unwrap();
        assert_eq!(g.n_ports(), 5);
        assert_eq!(g.modes(), [MODE_A.to_string(), MODE_B.to_string()]);
        assert!(g.unitarity_error() < 1e-10);
        assert!(g.hamiltonian().hermiticity_error() < 1e-6);
    }
}
