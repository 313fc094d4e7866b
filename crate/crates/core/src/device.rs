//! Circuit parameters to model parameters: junction-dressed frequencies,
//! coupling rates and Kerr coefficients, plus drive-power conversion.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Magnetic flux quantum `h/2e` (Wb).
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub hbar: f64,
    pub flux_quantum: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { hbar: HBAR, flux_quantum: FLUX_QUANTUM }
    }
}

impl Constants {
    /// Reduced flux quantum `Φ₀/2π`.
    pub fn reduced_flux_quantum(&self) -> f64 {
        self.flux_quantum / (2.0 * std::f64::consts::PI)
    }
}

/// Transmission-line resonators terminated by junctions. Resonator `a` has
/// a single junction; `b` has a SQUID whose inductance at zero flux is `lj_b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitGeometry {
    /// Inductance per length (H/m).
    pub l0: f64,
    /// Capacitance per length (F/m).
    pub c0: f64,
    /// Resonator lengths (m).
    pub d_a: f64,
    pub d_b: f64,
    /// Josephson inductances (H).
    pub lj_a: f64,
    pub lj_b: f64,
    /// Geometric coupling rates (rad/s).
    pub kappa0_a1: f64,
    pub kappa0_b1: f64,
    pub kappa0_b2: f64,
    /// Bare resonance frequencies (rad/s).
    pub omega0_a: f64,
    pub omega0_b: f64,
    #[serde(default)]
    pub constants: Constants,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resonator {
    A,
    B,
}

/// Participation ratios above this value make the small-γ formulas unreliable.
pub const GAMMA_WARN: f64 = 0.1;

impl CircuitGeometry {
    /// Checks positivity; returns warnings for large participation ratios.
    pub fn validate(&self) -> Result<Vec<String>> {
        let fields = [
            ("l0", self.l0),
            ("c0", self.c0),
            ("d_a", self.d_a),
            ("d_b", self.d_b),
            ("lj_a", self.lj_a),
            ("lj_b", self.lj_b),
            ("kappa0_a1", self.kappa0_a1),
            ("kappa0_b1", self.kappa0_b1),
            ("kappa0_b2", self.kappa0_b2),
            ("omega0_a", self.omega0_a),
            ("omega0_b", self.omega0_b),
            ("hbar", self.constants.hbar),
            ("flux_quantum", self.constants.flux_quantum),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        let mut warnings = Vec::new();
        for (name, g) in [("gamma_a", self.gamma_a()), ("gamma_b", self.gamma_b())] {
            if g > GAMMA_WARN {
                warnings.push(format!("{name} = {g:.4} exceeds {GAMMA_WARN}; small-participation formulas are approximate"));
            }
        }
        Ok(warnings)
    }

    /// `L_Ja/(L0·d_a)`.
    pub fn gamma_a(&self) -> f64 {
        self.lj_a / (self.l0 * self.d_a)
    }

    /// `L_Jb/(L0·d_b)` at zero flux.
    pub fn gamma_b(&self) -> f64 {
        self.lj_b / (self.l0 * self.d_b)
    }

    pub fn josephson_energy(&self, r: Resonator) -> f64 {
        let lj = match r {
            Resonator::A => self.lj_a,
            Resonator::B => self.lj_b,
        };
        self.constants.reduced_flux_quantum().powi(2) / lj
    }

    /// `√(ħ/(2ω⁰C0d))` for the given resonator.
    pub fn phi_zpf(&self, r: Resonator) -> f64 {
        let (w, d) = match r {
            Resonator::A => (self.omega0_a, self.d_a),
            Resonator::B => (self.omega0_b, self.d_b),
        };
        (self.constants.hbar / (2.0 * w * self.c0 * d)).sqrt()
    }
}

/// Reduced external flux `F = πΦ/Φ₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxPoint {
    f: f64,
}

impl FluxPoint {
    pub fn new(f: f64) -> Result<Self> {
        if !f.is_finite() || f.cos().abs() <= 1e-6 {
            return Err(invalid("flux", format!("F = {f} is at (or near) an odd multiple of π/2")));
        }
        Ok(Self { f })
    }

    pub fn zero() -> Self {
        Self { f: 0.0 }
    }

    pub fn value(&self) -> f64 {
        self.f
    }

    /// `1/|cos F|`, the flux enhancement of the SQUID inductance.
    fn enhancement(&self) -> f64 {
        1.0 / self.f.cos().abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub kappa_a1: f64,
    pub kappa_b1: f64,
    pub kappa_b2: f64,
}

pub fn effective_params(g: &CircuitGeometry, flux: FluxPoint) -> Result<EffectiveParams> {
    g.validate()?;
    let ga = g.gamma_a();
    let gb = g.gamma_b() * flux.enhancement();
    Ok(EffectiveParams {
        omega_a: g.omega0_a / (1.0 + ga),
        omega_b: g.omega0_b / (1.0 + gb),
        kappa_a1: g.kappa0_a1 / (1.0 + 4.0 * ga),
        kappa_b1: g.kappa0_b1 / (1.0 + 4.0 * gb),
        kappa_b2: g.kappa0_b2 / (1.0 + 4.0 * gb),
    })
}

/// Kerr coefficient of resonator `r` (rad/s) as a function of its Josephson
/// energy, with every other quantity taken from `g`.
fn kerr_for(g: &CircuitGeometry, r: Resonator, flux: FluxPoint, e_j: f64) -> f64 {
    let phi0 = g.constants.reduced_flux_quantum();
    let (prefactor, d, enhance) = match r {
        Resonator::A => (4.0, g.d_a, 1.0),
        Resonator::B => (2.0, g.d_b, flux.enhancement()),
    };
    let gamma = phi0 * phi0 / (e_j * g.l0 * d) * enhance;
    let ratio = (g.phi_zpf(r) / phi0).powi(4);
    -(e_j / (prefactor * g.constants.hbar)) * ratio * (std::f64::consts::PI / (2.0 * (1.0 + gamma))).cos()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerrCoefficients {
    pub kerr_a: f64,
    pub kerr_b: f64,
}

pub fn kerr_coefficients(g: &CircuitGeometry, flux: FluxPoint) -> Result<KerrCoefficients> {
    g.validate()?;
    Ok(KerrCoefficients {
        kerr_a: kerr_for(g, Resonator::A, flux, g.josephson_energy(Resonator::A)),
        kerr_b: kerr_for(g, Resonator::B, flux, g.josephson_energy(Resonator::B)),
    })
}

/// Josephson energy (J) that gives resonator `r` the Kerr coefficient
/// `target` (rad/s, negative). The junction inductance of `template` for
/// that resonator is ignored. `|K|` grows monotonically with `E_J` towards
/// a finite limit, so targets at or beyond the limit have no solution.
pub fn solve_josephson_energy(target: f64, template: &CircuitGeometry, r: Resonator, flux: FluxPoint) -> Result<f64> {
    if !(target < 0.0) {
        return Err(Error::NoRoot(format!("Kerr target must be negative, got {target}; K = 0 needs an infinite junction inductance")));
    }
    template.validate()?;
    let k = |ln_e: f64| kerr_for(template, r, flux, ln_e.exp());
    let phi0 = template.constants.reduced_flux_quantum();
    // Bracket E_J around the scale where γ ≈ 1.
    let d = match r {
        Resonator::A => template.d_a,
        Resonator::B => template.d_b,
    };
    let e_unit = phi0 * phi0 / (template.l0 * d);
    let (mut lo, mut hi) = (e_unit.ln() - 60.0, e_unit.ln() + 60.0);
    let (f_lo, f_hi) = (k(lo) - target, k(hi) - target);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoRoot(format!("|K| = {:e} rad/s is unreachable; the largest attainable is {:e}", target.abs(), k(hi).abs())));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if k(mid) - target > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let f = k(x) - target;
        if (f / target).abs() < 1e-14 {
            break;
        }
        let h = 1e-6;
        let slope = (k(x + h) - k(x - h)) / (2.0 * h);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - f / slope;
        x = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if k(x) - target > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    let e_j = x.exp();
    let residual = ((k(x) - target) / target).abs();
    if residual > 1e-10 {
        return Err(Error::NoRoot(format!("root polish stalled at relative residual {residual:e}")));
    }
    Ok(e_j)
}

/// Drive photon rate `ε²` (photons/s) for a power in dBm at angular frequency `omega`.
pub fn dbm_to_rate(p_dbm: f64, omega: f64) -> Result<f64> {
    dbm_to_rate_with(p_dbm, omega, HBAR)
}

pub fn dbm_to_rate_with(p_dbm: f64, omega: f64, hbar: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(invalid("omega", format!("must be positive, got {omega}")));
    }
    if !p_dbm.is_finite() {
        return Err(invalid("power_dbm", format!("must be finite, got {p_dbm}")));
    }
    Ok(10f64.powf((p_dbm - 30.0) / 10.0) / (hbar * omega))
}

pub fn rate_to_dbm(eps_sq: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(invalid("omega", format!("must be positive, got {omega}")));
    }
    if !(eps_sq > 0.0) {
        return Err(invalid("eps_sq", format!("must be positive, got {eps_sq}")));
    }
    Ok(10.0 * (HBAR * omega * eps_sq).log10() + 30.0)
}

/// `(γ_b, ω⁰_b)` from the resonance of the tunable resonator at zero flux
/// and at one flux point.
pub fn invert_flux_tuning(omega_b_zero: f64, omega_b_flux: f64, flux: FluxPoint) -> Result<(f64, f64)> {
    let e = flux.enhancement();
    let den = omega_b_flux * e - omega_b_zero;
    let gamma = (omega_b_zero - omega_b_flux) / den;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::NoRoot(format!(
            "frequencies {omega_b_zero:e} and {omega_b_flux:e} rad/s give no positive participation ratio at F = {}",
            flux.value()
        )));
    }
    Ok((gamma, omega_b_zero * (1.0 + gamma)))
}

/// Characterisation data of a device (angular frequencies and rates in rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceTargets {
    pub flux: f64,
    pub omega_a: f64,
    pub omega_b_zero: f64,
    pub omega_b_flux: f64,
    pub kerr_a: f64,
    pub kerr_b_flux: f64,
    pub kappa_a1: f64,
    pub kappa_b_zero: f64,
}

/// Line inductance and resonator lengths; the rest of the geometry is fitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineTemplate {
    pub l0: f64,
    pub d_a: f64,
    pub d_b: f64,
}

impl Default for LineTemplate {
    /// Coplanar line of 0.42 µH/m with a 7.8 mm feedback resonator and an
    /// 8 mm clock resonator.
    fn default() -> Self {
        Self { l0: 4.2e-7, d_a: 7.8e-3, d_b: 8e-3 }
    }
}

/// Geometry consistent with `targets` on the given line template. The
/// tunable resonator's participation ratio and bare frequency come from its
/// two measured resonances. Since every Kerr coefficient scales as `1/C0²`,
/// `C0` follows in closed form from the Kerr coefficient of `b` at the flux
/// point; `γ_a` is then solved from the Kerr coefficient of `a`.
pub fn fit_geometry(targets: &DeviceTargets, line: &LineTemplate) -> Result<CircuitGeometry> {
    let flux = FluxPoint::new(targets.flux)?;
    let (gamma_b, omega0_b) = invert_flux_tuning(targets.omega_b_zero, targets.omega_b_flux, flux)?;
    if !(targets.kerr_a < 0.0 && targets.kerr_b_flux < 0.0) {
        return Err(Error::NoRoot("Kerr targets must be negative".into()));
    }
    let build = |c0: f64, gamma_a: f64| CircuitGeometry {
        l0: line.l0,
        c0,
        d_a: line.d_a,
        d_b: line.d_b,
        lj_a: gamma_a * line.l0 * line.d_a,
        lj_b: gamma_b * line.l0 * line.d_b,
        kappa0_a1: targets.kappa_a1 * (1.0 + 4.0 * gamma_a),
        kappa0_b1: targets.kappa_b_zero * (1.0 + 4.0 * gamma_b),
        kappa0_b2: targets.kappa_b_zero * (1.0 + 4.0 * gamma_b),
        omega0_a: targets.omega_a * (1.0 + gamma_a),
        omega0_b,
        constants: Constants::default(),
    };
    let unit = kerr_coefficients(&build(1.0, 0.01), flux)?.kerr_b;
    let c0 = (unit / targets.kerr_b_flux).sqrt();
    let ka = |ln_g: f64| kerr_coefficients(&build(c0, ln_g.exp()), flux).map(|k| k.kerr_a).unwrap_or(f64::NAN);
    let ln_ga = bisect_log(|x| ka(x) - targets.kerr_a, (1e-9f64).ln(), (10.0f64).ln())
        .ok_or_else(|| Error::NoRoot("no participation ratio reproduces the Kerr coefficient of a".into()))?;
    Ok(build(c0, ln_ga.exp()))
}

/// Root of a monotone function on `[lo, hi]` by bisection.
fn bisect_log(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return None;
    }
    let rising = fhi > flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
