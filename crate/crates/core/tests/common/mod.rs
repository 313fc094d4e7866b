//! Hand-coded reference expressions for the clock network, written
//! independently of the library's composition code.

#![allow(dead_code)]

use cfclock::slh::ClockParams;
use num_complex::Complex64 as C64;
use rand::Rng;

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

pub fn i() -> C64 {
    C64::new(0.0, 1.0)
}

pub fn t1(p: &ClockParams) -> f64 {
    (1.0 - p.eta1 * p.eta1).sqrt()
}

pub fn t2(p: &ClockParams) -> f64 {
    (1.0 - p.eta2 * p.eta2).sqrt()
}

/// Coefficient of `a†b` in the clock Hamiltonian.
pub fn h_ab(p: &ClockParams) -> C64 {
    0.5 * i()
        * p.kappa_a1.sqrt()
        * ((p.kappa_b1 * (1.0 - p.eta1 * p.eta1)).sqrt() * C64::from_polar(1.0, -p.phi1)
            - (p.kappa_b2 * (1.0 - p.eta2 * p.eta2)).sqrt() * C64::from_polar(1.0, p.phi2))
}

pub fn delta_b_eff(p: &ClockParams) -> f64 {
    p.delta_b + (p.kappa_b1 * p.kappa_b2).sqrt() * t1(p) * t2(p) * (p.phi1 + p.phi2).sin()
}

pub fn kappa_a(p: &ClockParams) -> f64 {
    p.kappa_a1 + p.kappa_a_int
}

pub fn kappa_b(p: &ClockParams) -> f64 {
    p.kappa_b1 + p.kappa_b2 + p.kappa_b_int + 2.0 * (p.kappa_b1 * p.kappa_b2).sqrt() * t1(p) * t2(p) * (p.phi1 + p.phi2).cos()
}

pub fn g_a(p: &ClockParams) -> f64 {
    t2(p) * (p.kappa_a1 * p.kappa_b2).sqrt()
}

pub fn g_b(p: &ClockParams) -> f64 {
    t1(p) * (p.kappa_a1 * p.kappa_b1).sqrt()
}

pub fn eps_bar(p: &ClockParams) -> f64 {
    t1(p) * p.kappa_b1.sqrt() * p.drive
}

/// Mode coefficients `(a, b)` of the five collapse rows, drive excluded.
pub fn collapse_rows(p: &ClockParams) -> [[C64; 2]; 5] {
    let e = |x: f64| C64::from_polar(1.0, x);
    let zero = C64::new(0.0, 0.0);
    [
        [-p.eta1 * p.kappa_a1.sqrt() * e(p.phi1), -p.eta1 * p.kappa_b2.sqrt() * t2(p) * e(p.phi1 + p.phi2)],
        [C64::new(p.kappa_a_int.sqrt(), 0.0), zero],
        [p.kappa_a1.sqrt() * t1(p) * e(p.phi1), p.kappa_b1.sqrt() + p.kappa_b2.sqrt() * t1(p) * t2(p) * e(p.phi1 + p.phi2)],
        [zero, -p.eta2 * p.kappa_b2.sqrt() * e(p.phi2)],
        [zero, C64::new(p.kappa_b_int.sqrt(), 0.0)],
    ]
}

/// Complex mean-field flow `(α̇, β̇)`.
pub fn flow(p: &ClockParams, a: C64, b: C64) -> (C64, C64) {
    let da = -(i() * p.delta_a + kappa_a(p) / 2.0) * a - 2.0 * i() * p.kerr_a * a.norm_sqr() * a - g_a(p) * C64::from_polar(1.0, p.phi2) * b;
    let db = -(i() * delta_b_eff(p) + kappa_b(p) / 2.0) * b - 2.0 * i() * p.kerr_b * b.norm_sqr() * b - g_b(p) * C64::from_polar(1.0, p.phi1) * a - eps_bar(p);
    (da, db)
}

/// Quadrature flow `(ẋ_a, ẏ_a, ẋ_b, ẏ_b)` written out term by term.
pub fn quadrature_flow(p: &ClockParams, s: [f64; 4]) -> [f64; 4] {
    let [xa, ya, xb, yb] = s;
    let (ka, kb, ga, gb) = (kappa_a(p), kappa_b(p), g_a(p), g_b(p));
    let db = delta_b_eff(p);
    let (c2, s2, c1, s1) = (p.phi2.cos(), p.phi2.sin(), p.phi1.cos(), p.phi1.sin());
    [
        2.0 * p.kerr_a * ya.powi(3) + 2.0 * p.kerr_a * xa * xa * ya + p.delta_a * ya - ka / 2.0 * xa - ga * (c2 * xb - s2 * yb),
        -2.0 * p.kerr_a * xa.powi(3) - 2.0 * p.kerr_a * ya * ya * xa - p.delta_a * xa - ka / 2.0 * ya - ga * (s2 * xb + c2 * yb),
        2.0 * p.kerr_b * yb.powi(3) + 2.0 * p.kerr_b * xb * xb * yb + db * yb - kb / 2.0 * xb - gb * (c1 * xa - s1 * ya) - eps_bar(p),
        -2.0 * p.kerr_b * xb.powi(3) - 2.0 * p.kerr_b * yb * yb * xb - db * xb - kb / 2.0 * yb - gb * (s1 * xa + c1 * ya),
    ]
}

/// Parameters drawn over a broad physical range (rad/s, √(photons/s)).
pub fn random_params(rng: &mut impl Rng) -> ClockParams {
    let mhz = TAU * 1e6;
    ClockParams {
        kappa_a1: rng.random_range(0.5..6.0) * mhz,
        kappa_a_int: rng.random_range(0.0..1.0) * mhz,
        kappa_b1: rng.random_range(0.5..6.0) * mhz,
        kappa_b2: rng.random_range(0.5..6.0) * mhz,
        kappa_b_int: rng.random_range(0.0..3.0) * mhz,
        delta_a: rng.random_range(-5.0..5.0) * mhz,
        delta_b: rng.random_range(-5.0..5.0) * mhz,
        kerr_a: rng.random_range(-0.1..0.1) * mhz,
        kerr_b: rng.random_range(-0.1..0.1) * mhz,
        eta1: rng.random_range(0.0..0.9),
        eta2: rng.random_range(0.0..0.9),
        phi1: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        phi2: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        drive: rng.random_range(0.0..2e5),
    }
}

/// Largest coefficient deviation of `row` from `reference` after removing
/// one common phase, relative to the row's scale.
pub fn row_mismatch_modulo_phase(row: &[C64], reference: &[C64]) -> f64 {
    let scale = reference.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return row.iter().map(|c| c.norm()).fold(0.0, f64::max);
    }
    let k = (0..reference.len()).max_by(|&x, &y| reference[x].norm().total_cmp(&reference[y].norm())).unwrap();
    let ratio = row[k] / reference[k];
    if ratio.norm() == 0.0 {
        return f64::INFINITY;
    }
    let phase = ratio / ratio.norm();
    row.iter().zip(reference).map(|(r, q)| (r - q * phase).norm()).fold(0.0, f64::max) / scale
}

/// Record whose phase advances by 2π linearly between Wald-distributed tick
/// instants, read out as `1 + ½ sin θ`. Returns the record and the periods.
pub fn wald_tick_record(n_ticks: usize, mean_period: f64, accuracy: f64, rate: f64, seed: u64) -> (cfclock::analysis::IQRecord, Vec<f64>) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let ig = rand_distr::InverseGaussian::new(mean_period, accuracy * mean_period).unwrap();
    let periods: Vec<f64> = (0..n_ticks).map(|_| rng.sample(ig)).collect();
    let mut instants = vec![0.0];
    for p in &periods {
        instants.push(instants.last().unwrap() + p);
    }
    let n = (instants.last().unwrap() * rate) as usize;
    let mut k = 0;
    let samples = (0..n)
        .map(|j| {
            let t = j as f64 / rate;
            while instants[k + 1] <= t {
                k += 1;
            }
            let theta = TAU * (k as f64 + (t - instants[k]) / periods[k]);
            C64::new(1.0 + 0.5 * theta.sin(), 0.0)
        })
        .collect();
    (cfclock::analysis::IQRecord::new(rate, samples).unwrap(), periods)
}

/// Stationary complex Ornstein–Uhlenbeck records at `center` Hz with
/// Lorentzian FWHM `fwhm` Hz and unit variance, sampled exactly.
pub fn ou_records(n_records: usize, n: usize, rate: f64, center: f64, fwhm: f64, seed: u64) -> Vec<cfclock::analysis::IQRecord> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dt = 1.0 / rate;
    let step = C64::new(-TAU * fwhm / 2.0 * dt, TAU * center * dt).exp();
    let kick = (1.0 - step.norm_sqr()).sqrt() / 2f64.sqrt();
    let mut gauss = || C64::new(rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal)) / 2f64.sqrt();
    (0..n_records)
        .map(|_| {
            let mut z = gauss();
            let s = (0..n)
                .map(|_| {
                    let out = z;
                    z = step * z + kick * 2f64.sqrt() * gauss();
                    out
                })
                .collect();
            cfclock::analysis::IQRecord::new(rate, s).unwrap()
        })
        .collect()
}
