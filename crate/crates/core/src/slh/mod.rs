//! SLH triples for networks of bosonic modes.
//!
//! A triple `(S, L, H)` describes an open quantum network node by its
//! scattering matrix, its vector of collapse (coupling) operators and its
//! Hamiltonian. Only a closed subclass of triples is represented here:
//!
//! * `S` is a constant complex matrix,
//! * each collapse operator is affine-linear in the annihilation operators,
//!   `L_k = Σ_m C_km a_m + c_k`,
//! * the Hamiltonian is a Kerr + quadratic + linear polynomial,
//!   `H = Σ_m K_m a_m†² a_m² + Σ_mn Q_mn a_m† a_n + Σ_m (h_m a_m† + h_m* a_m)`.
//!
//! Series products, concatenation and feedback reduction all stay inside this
//! class (normal ordering of products of affine operators only produces
//! quadratic, linear and constant terms; constants are dropped).

mod mean_field;
mod network;

pub use mean_field::{extract_mean_field, mode_flow, ModeFlow};
pub use network::{build_clock_network, make_component, ClockParams, Component, MODE_A, MODE_B};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ALGEBRAIC_LOOP_TOL: f64 = 1e-9;

/// Kerr + quadratic + linear Hamiltonian over an ordered set of modes.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPoly {
    /// Coefficient of `a_m†² a_m²` (rad/s).
    pub kerr: Vec<f64>,
    /// Coefficient of `a_m† a_n` (rad/s). Hermitian.
    pub quad: DMatrix<C64>,
    /// Coefficient of `a_m†`; the conjugate term `h_m* a_m` is implied.
    pub linear: Vec<C64>,
}

impl HamiltonianPoly {
    pub fn zero(n_modes: usize) -> Self {
        Self { kerr: vec![0.0; n_modes], quad: DMatrix::zeros(n_modes, n_modes), linear: vec![C64::new(0.0, 0.0); n_modes] }
    }

    pub fn n_modes(&self) -> usize {
        self.kerr.len()
    }

    /// Largest deviation of `quad` from its conjugate transpose.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.n_modes();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.quad[(i, j)] - self.quad[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn added(&self, other: &HamiltonianPoly) -> HamiltonianPoly {
        HamiltonianPoly {
            kerr: self.kerr.iter().zip(&other.kerr).map(|(a, b)| a + b).collect(),
            quad: &self.quad + &other.quad,
            linear: self.linear.iter().zip(&other.linear).map(|(a, b)| a + b).collect(),
        }
    }

    fn reindexed(&self, map: &[usize], n_new: usize) -> HamiltonianPoly {
        let mut out = HamiltonianPoly::zero(n_new);
        for (i, &ni) in map.iter().enumerate() {
            out.kerr[ni] += self.kerr[i];
            out.linear[ni] += self.linear[i];
            for (j, &nj) in map.iter().enumerate() {
                out.quad[(ni, nj)] += self.quad[(i, j)];
            }
        }
        out
    }
}

/// Collapse operator of the form `Σ_m coeffs[m]·a_m + scalar`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineModeOperator {
    pub coeffs: Vec<C64>,
    pub scalar: C64,
}

impl AffineModeOperator {
    pub fn zero(n_modes: usize) -> Self {
        Self { coeffs: vec![C64::new(0.0, 0.0); n_modes], scalar: C64::new(0.0, 0.0) }
    }

    pub fn constant(n_modes: usize, value: C64) -> Self {
        Self { scalar: value, ..Self::zero(n_modes) }
    }

    pub fn mode(n_modes: usize, index: usize, coeff: C64) -> Self {
        let mut op = Self::zero(n_modes);
        op.coeffs[index] = coeff;
        op
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * factor).collect(), scalar: self.scalar * factor }
    }

    fn add_assign_scaled(&mut self, other: &Self, factor: C64) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * factor;
        }
        self.scalar += other.scalar * factor;
    }

    fn reindexed(&self, map: &[usize], n_new: usize) -> Self {
        let mut out = Self::constant(n_new, self.scalar);
        for (i, &ni) in map.iter().enumerate() {
            out.coeffs[ni] += self.coeffs[i];
        }
        out
    }

    /// Mean value for coherent amplitudes `z`.
    pub fn expectation(&self, z: &[C64]) -> C64 {
        self.coeffs.iter().zip(z).map(|(c, z)| c * z).sum::<C64>() + self.scalar
    }
}

/// Hermitian part `(1/2i)(Σ_j x_j† y_j − h.c.)` of a product of affine
/// operator vectors, normal ordered. The real constant is dropped.
fn imaginary_product(x: &[AffineModeOperator], y: &[AffineModeOperator], n_modes: usize) -> HamiltonianPoly {
    let mut h = HamiltonianPoly::zero(n_modes);
    let half_over_i = C64::new(0.0, -0.5);
    for (xj, yj) in x.iter().zip(y) {
        let (u, c) = (&xj.coeffs, xj.scalar);
        let (v, d) = (&yj.coeffs, yj.scalar);
        for m in 0..n_modes {
            for n in 0..n_modes {
                h.quad[(m, n)] += half_over_i * (u[m].conj() * v[n] - v[m].conj() * u[n]);
            }
            h.linear[m] += half_over_i * (d * u[m].conj() - c * v[m].conj());
        }
    }
    h
}

fn mat_vec(s: &DMatrix<C64>, l: &[AffineModeOperator], n_modes: usize) -> Vec<AffineModeOperator> {
    (0..s.nrows())
        .map(|i| {
            let mut acc = AffineModeOperator::zero(n_modes);
            for (j, lj) in l.iter().enumerate() {
                acc.add_assign_scaled(lj, s[(i, j)]);
            }
            acc
        })
        .collect()
}

/// An `n`-port network over labelled modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SlhTriple {
    modes: Vec<String>,
    s: DMatrix<C64>,
    l: Vec<AffineModeOperator>,
    h: HamiltonianPoly,
}

impl SlhTriple {
    pub fn new(modes: Vec<String>, s: DMatrix<C64>, l: Vec<AffineModeOperator>, h: HamiltonianPoly) -> Result<Self> {
        let n = l.len();
        if s.nrows() != n || s.ncols() != n {
            return Err(Error::PortMismatch { left: s.nrows(), right: n });
        }
        let m = modes.len();
        if h.n_modes() != m || h.quad.nrows() != m || h.linear.len() != m || l.iter().any(|op| op.coeffs.len() != m) {
            return Err(Error::InvalidParameter { name: "modes", reason: format!("coefficient vectors must all have length {m}") });
        }
        for (i, label) in modes.iter().enumerate() {
            if modes[..i].contains(label) {
                return Err(Error::InvalidParameter { name: "modes", reason: format!("duplicate label `{label}`") });
            }
        }
        Ok(Self { modes, s, l, h })
    }

    /// `n`-port identity with no modes.
    pub fn identity(n_ports: usize) -> Self {
        Self { modes: Vec::new(), s: DMatrix::identity(n_ports, n_ports), l: vec![AffineModeOperator::zero(0); n_ports], h: HamiltonianPoly::zero(0) }
    }

    pub fn n_ports(&self) -> usize {
        self.l.len()
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m == label)
    }

    pub fn scattering(&self) -> &DMatrix<C64> {
        &self.s
    }

    pub fn collapse(&self) -> &[AffineModeOperator] {
        &self.l
    }

    pub fn hamiltonian(&self) -> &HamiltonianPoly {
        &self.h
    }

    /// Largest entry of `S†S − I`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.n_ports();
        let p = self.s.adjoint() * &self.s - DMatrix::<C64>::identity(n, n);
        p.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Re-expresses the triple over `modes`, which must contain every label of `self`.
    fn embedded(&self, modes: &[String]) -> Self {
        let map: Vec<usize> = self.modes.iter().map(|m| modes.iter().position(|x| x == m).expect("mode set is a superset")).collect();
        let n_new = modes.len();
        Self { modes: modes.to_vec(), s: self.s.clone(), l: self.l.iter().map(|op| op.reindexed(&map, n_new)).collect(), h: self.h.reindexed(&map, n_new) }
    }

    /// Moves the constant parts of the collapse operators into the
    /// Hamiltonian. `D[L + c]ρ = D[L]ρ − i[(i/2)(c* L − c L†), ρ]`, so the
    /// master equation is unchanged.
    pub fn absorb_displacements(&self) -> Self {
        let mut h = self.h.clone();
        let mut l = self.l.clone();
        for op in &mut l {
            let c = op.scalar;
            for (m, coeff) in op.coeffs.iter().enumerate() {
                h.linear[m] += C64::new(0.0, -0.5) * c * coeff.conj();
            }
            op.scalar = C64::new(0.0, 0.0);
        }
        Self { modes: self.modes.clone(), s: self.s.clone(), l, h }
    }
}

fn union_modes(a: &[String], b: &[String]) -> Vec<String> {
    let mut out = a.to_vec();
    for m in b {
        if !out.contains(m) {
            out.push(m.clone());
        }
    }
    out
}

/// `G1 ⊞ G2`: block-diagonal scattering, stacked collapse operators, summed
/// Hamiltonians. Modes with equal labels are identified.
pub fn concatenate(g1: &SlhTriple, g2: &SlhTriple) -> SlhTriple {
    let modes = union_modes(&g1.modes, &g2.modes);
    let (a, b) = (g1.embedded(&modes), g2.embedded(&modes));
    let (n1, n2) = (a.n_ports(), b.n_ports());
    let mut s = DMatrix::zeros(n1 + n2, n1 + n2);
    s.view_mut((0, 0), (n1, n1)).copy_from(&a.s);
    s.view_mut((n1, n1), (n2, n2)).copy_from(&b.s);
    let mut l = a.l;
    l.extend(b.l);
    SlhTriple { modes, s, l, h: a.h.added(&b.h) }
}

/// `G2 ◁ G1`: the outputs of `g1` feed the inputs of `g2`.
pub fn series(g2: &SlhTriple, g1: &SlhTriple) -> Result<SlhTriple> {
    if g1.n_ports() != g2.n_ports() {
        return Err(Error::PortMismatch { left: g2.n_ports(), right: g1.n_ports() });
    }
    let modes = union_modes(&g1.modes, &g2.modes);
    let (a, b) = (g1.embedded(&modes), g2.embedded(&modes));
    let n_modes = modes.len();
    let s2l1 = mat_vec(&b.s, &a.l, n_modes);
    let l: Vec<AffineModeOperator> =
        b.l.iter()
            .zip(&s2l1)
            .map(|(l2, t)| {
                let mut out = l2.clone();
                out.add_assign_scaled(t, C64::new(1.0, 0.0));
                out
            })
            .collect();
    let h = a.h.added(&b.h).added(&imaginary_product(&b.l, &s2l1, n_modes));
    Ok(SlhTriple { modes, s: &b.s * &a.s, l, h })
}

/// Closes the loop from output `out_port` back into input `in_port`.
pub fn feedback_reduce(g: &SlhTriple, out_port: usize, in_port: usize) -> Result<SlhTriple> {
    let n = g.n_ports();
    for idx in [out_port, in_port] {
        if idx >= n {
            return Err(Error::PortOutOfRange { index: idx, ports: n });
        }
    }
    let (x, y) = (out_port, in_port);
    let one = C64::new(1.0, 0.0);
    let gap = (one - g.s[(x, y)]).norm();
    if gap <= ALGEBRAIC_LOOP_TOL {
        return Err(Error::AlgebraicLoop { out_port: x, in_port: y, gap });
    }
    let inv = one / (one - g.s[(x, y)]);
    let rows: Vec<usize> = (0..n).filter(|&i| i != x).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| j != y).collect();
    let n_modes = g.modes.len();

    let s = DMatrix::from_fn(n - 1, n - 1, |r, c| {
        let (i, j) = (rows[r], cols[c]);
        g.s[(i, j)] + g.s[(i, y)] * inv * g.s[(x, j)]
    });
    let l = rows
        .iter()
        .map(|&i| {
            let mut op = g.l[i].clone();
            op.add_assign_scaled(&g.l[x], g.s[(i, y)] * inv);
            op
        })
        .collect();

    // X = Σ_j conj(S_jy) L_j so that X† = Σ_j L_j† S_jy.
    let mut loop_in = AffineModeOperator::zero(n_modes);
    for (j, lj) in g.l.iter().enumerate() {
        loop_in.add_assign_scaled(lj, g.s[(j, y)].conj());
    }
    let loop_out = g.l[x].scaled(inv);
    let h = g.h.added(&imaginary_product(&[loop_in], &[loop_out], n_modes));
    Ok(SlhTriple { modes: g.modes.clone(), s, l, h })
}
