//! Acceptance criteria. Runs without the test harness and prints one line
//! per criterion; exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use cfclock::analysis::*;
use cfclock::device::*;
use cfclock::dynamics::*;
use cfclock::slh::{build_clock_network, extract_mean_field, ClockParams, MODE_A, MODE_B};
use cfclock::stochastic::*;
use common::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Largest mismatch of the composed network against the hand-coded one,
/// relative to the largest rate of `p`.
fn network_mismatch(p: &ClockParams) -> f64 {
    let g = build_clock_network(&ClockParams { drive: 0.0, ..*p }).unwrap();
    let (a, b) = (g.mode_index(MODE_A).unwrap(), g.mode_index(MODE_B).unwrap());
    let h = g.hamiltonian();
    let scale = p.kappa_a1.max(p.kappa_b1).max(p.kappa_b2).max(p.delta_a.abs()).max(p.delta_b.abs());
    let mut err: f64 = 0.0;
    err = err.max((h.kerr[a] - p.kerr_a).abs() / p.kerr_a.abs().max(1.0));
    err = err.max((h.kerr[b] - p.kerr_b).abs() / p.kerr_b.abs().max(1.0));
    err = err.max((h.quad[(a, a)] - p.delta_a).norm() / scale);
    err = err.max((h.quad[(b, b)] - delta_b_eff(p)).norm() / scale);
    err = err.max((h.quad[(a, b)] - h_ab(p)).norm() / scale);
    err = err.max((h.quad[(b, a)] - h_ab(p).conj()).norm() / scale);
    for (op, reference) in g.collapse().iter().zip(&collapse_rows(p)) {
        err = err.max(row_mismatch_modulo_phase(&[op.coeffs[a], op.coeffs[b]], reference));
    }
    let driven = build_clock_network(p).unwrap().absorb_displacements();
    let lin = &driven.hamiltonian().linear;
    let e = eps_bar(p).max(1.0);
    err.max(lin[a].norm() / e).max((lin[b] - C64::new(0.0, -eps_bar(p))).norm() / e)
}

fn slh_reproduction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut draws: Vec<ClockParams> = (0..100).map(|_| random_params(&mut rng)).collect();
    draws.push(ClockParams::reference_device().with_drive_rate(0.5e10));
    let worst = draws.iter().map(network_mismatch).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    ensure(worst < 1e-12, || format!("worst relative mismatch {worst:e}"))?;
    ensure(secs < 1.0, || format!("took {secs:.2} s"))?;
    Ok(format!("101 networks, worst mismatch {worst:.1e}, {secs:.3} s"))
}

fn mean_field_extraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_flow, mut worst_jac): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let m = extract_mean_field(&build_clock_network(&p).unwrap()).unwrap();
        for _ in 0..10 {
            let s = StateQuad::new(
                rng.random_range(-300.0..300.0),
                rng.random_range(-300.0..300.0),
                rng.random_range(-300.0..300.0),
                rng.random_range(-300.0..300.0),
            );
            let (da, db) = flow(&p, s.alpha(), s.beta());
            let (fa, fb) = m.flow(s.alpha(), s.beta());
            let scale = da.norm().max(db.norm()).max(1.0);
            worst_flow = worst_flow.max((fa - da).norm() / scale).max((fb - db).norm() / scale);
            let q = rhs(&m, &s).to_array();
            let oracle = quadrature_flow(&p, s.to_array());
            for k in 0..4 {
                worst_flow = worst_flow.max((q[k] - oracle[k]).abs() / scale);
            }
            let j = jacobian(&m, &s);
            let h = 1e-6 * s.norm().max(1.0);
            let mut fd = nalgebra::Matrix4::<f64>::zeros();
            for c in 0..4 {
                let (mut up, mut dn) = (s.to_array(), s.to_array());
                up[c] += h;
                dn[c] -= h;
                let (fu, fl) = (rhs(&m, &StateQuad::from_array(up)).to_array(), rhs(&m, &StateQuad::from_array(dn)).to_array());
                for r in 0..4 {
                    fd[(r, c)] = (fu[r] - fl[r]) / (2.0 * h);
                }
            }
            worst_jac = worst_jac.max((j - fd).norm() / j.norm());
        }
    }
    ensure(worst_flow < 1e-12, || format!("flow mismatch {worst_flow:e}"))?;
    ensure(worst_jac < 1e-5, || format!("Jacobian mismatch {worst_jac:e}"))?;
    Ok(format!("1000 states, flow {worst_flow:.1e}, Jacobian {worst_jac:.1e}"))
}

fn bifurcation_structure() -> Outcome {
    let start = Instant::now();
    let p = ClockParams::reference_device();
    let template = DriveTemplate::from_params(&p);
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05e10).collect();
    let d = sweep_drive(&template, &grid, &SweepOptions::default()).map_err(|e| e.to_string())?;
    let found: Vec<String> = d.transitions.iter().map(|t| format!("{:.4}e10 {}->{}", t.eps_sq / 1e10, t.from, t.to)).collect();
    let first = d.transitions.first().ok_or("no stability transitions")?;
    let eps_next = first.eps_sq_after;
    let model = template.model_at(eps_next);
    let traj = integrate(&model, StateQuad::default(), 300e-6, 1e-9, Method::Rk4).map_err(|e| e.to_string())?;
    let cycle = detect_limit_cycle(&traj, &LimitCycleOptions { transient: 200e-6, ..LimitCycleOptions::for_model(&model) });
    let secs = start.elapsed().as_secs_f64();
    let inside = |lo: f64, hi: f64| d.transitions.iter().any(|t| t.eps_sq >= lo && t.eps_sq <= hi);
    let detail = format!("transitions [{}]", found.join(", "));
    ensure(inside(0.10e10, 0.20e10), || format!("{detail}; none in [0.10, 0.20]e10"))?;
    ensure(inside(1.15e10, 1.35e10), || format!("{detail}; none in [1.15, 1.35]e10"))?;
    let c = cycle.ok_or_else(|| format!("{detail}; no limit cycle at {eps_next:e}"))?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{detail}; cycle at {:.2} MHz; {secs:.1} s", c.frequency / 1e6))
}

fn reduced_model_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let kappa = 1.0;
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 10 {
        let g = rng.random_range(1.05..3.0) * kappa / 2.0;
        let (ka, kb): (f64, f64) = (rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05));
        if (ka - kb).abs() < 0.005 {
            continue;
        }
        n += 1;
        let c = reduced_limit_cycle(g, kappa, ka, kb);
        let r = c.r_sq.sqrt();
        let s0 = StateQuad::from_fields(C64::new(0.6 * r, 0.0), C64::from_polar(0.8 * r, 2.0));
        let traj = integrate(&reduced_model(g, kappa, ka, kb), s0, 600.0, 2e-3, Method::Rk4).map_err(|e| e.to_string())?;
        let s = traj.last().unwrap();
        let (a, b) = (s.alpha(), s.beta());
        let sin_phi = (a.arg() - b.arg()).sin();
        worst = worst.max(rel(a.norm_sqr(), c.r_sq)).max(rel(b.norm_sqr(), c.r_sq)).max((sin_phi - c.sin_phi).abs() / c.sin_phi.abs());
    }
    ensure(worst < 0.01, || format!("worst relative deviation {worst:e}"))?;
    let mut decayed = 0;
    for _ in 0..10 {
        let g = rng.random_range(0.1..0.95) * kappa / 2.0;
        let (ka, kb): (f64, f64) = (rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05));
        let s0 = StateQuad::new(3.0, -1.0, 2.0, 4.0);
        let traj = integrate(&reduced_model(g, kappa, ka, kb), s0, 600.0, 2e-3, Method::Rk4).map_err(|e| e.to_string())?;
        if traj.last().unwrap().norm() < 1e-6 * s0.norm() {
            decayed += 1;
        }
    }
    ensure(decayed == 10, || format!("origin attracted {decayed} of 10 below threshold"))?;
    Ok(format!("10 cycles within {:.2}%, 10/10 decay below threshold", 100.0 * worst))
}

fn mbf_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let mut p = random_params(&mut rng);
        (p.eta1, p.eta2, p.phi1, p.phi2, p.drive) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let coherent = MeanFieldModel::from_params(&p);
        let mbf = mbf_mean_field(&p, 0.5, std::f64::consts::FRAC_PI_2);
        for _ in 0..20 {
            let s = StateQuad::new(
                rng.random_range(-300.0..300.0),
                rng.random_range(-300.0..300.0),
                rng.random_range(-300.0..300.0),
                rng.random_range(-300.0..300.0),
            );
            let (x, y) = (rhs(&coherent, &s).to_array(), rhs(&mbf, &s).to_array());
            let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for k in 0..4 {
                worst = worst.max((x[k] - y[k]).abs() / scale);
            }
        }
    }
    ensure(worst < 1e-12, || format!("worst mismatch {worst:e}"))?;
    Ok(format!("1000 states, worst mismatch {worst:.1e}"))
}

fn clock_statistics() -> Outcome {
    let start = Instant::now();
    let p = PhaseOscillatorParams { omega: TAU, mu: 1.0, sigma: 0.8 };
    let ticks = first_passage_ticks(&p, &SdeConfig::new(1e-4, 6, 10), 1000).map_err(|e| e.to_string())?;
    let mut all = TickSeries::default();
    ticks.iter().for_each(|t| all.extend(t));
    let ks = ks_test(&all.periods, |t| wald_cdf(t, p.mean_period(), p.wald_lambda()).unwrap());
    let fit = fit_wald(&all).map_err(|e| e.to_string())?;
    let n_emp = all.accuracy();

    let (f, width) = (1e6, 50e3);
    let q = PhaseOscillatorParams { omega: TAU * f, mu: 1.0, sigma: (TAU * width).sqrt() };
    let (rate, n) = (125e6, 48_000);
    let paths = simulate_phase(&q, &SdeConfig::new(1.0 / rate, 6, 100), (n - 1) as f64 / rate).map_err(|e| e.to_string())?;
    let recs: Vec<IQRecord> = paths.iter().map(|th| IQRecord::new(rate, th.iter().map(|x| C64::from_polar(1.0, *x)).collect()).unwrap()).collect();
    let lor = fit_lorentzian(&compute_esd(&recs, Window::Rectangular).map_err(|e| e.to_string())?, (0.5 * f, 1.5 * f)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();

    ensure(all.len() >= 10_000, || format!("only {} ticks", all.len()))?;
    ensure(ks.p_value > 0.01, || format!("KS p = {:.3}", ks.p_value))?;
    ensure(rel(n_emp, fit.accuracy) < 0.05, || format!("N {n_emp} vs fitted {}", fit.accuracy))?;
    ensure(rel(all.variance(), p.period_variance()) < 0.05, || format!("variance {} vs {}", all.variance(), p.period_variance()))?;
    ensure(rel(lor.fwhm, width) < 0.1, || format!("linewidth {} Hz vs {width} Hz", lor.fwhm))?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "{} ticks, KS p = {:.2}, N = {n_emp:.2} vs {:.2}, variance off {:.1}%, linewidth {:.1} kHz; {secs:.1} s",
        all.len(),
        ks.p_value,
        fit.accuracy,
        100.0 * rel(all.variance(), p.period_variance()),
        lor.fwhm / 1e3
    ))
}

fn noise_ordering() -> Outcome {
    let p = ClockParams::reference_device().with_drive_rate(0.3e10);
    let m = MeanFieldModel::from_params(&p);
    let warm = integrate(&m, StateQuad::default(), 100e-6, 1e-9, Method::Rk4).map_err(|e| e.to_string())?;
    let s0 = warm.last().unwrap();
    let readout = readout_operator(&p, READOUT_ROW).map_err(|e| e.to_string())?;
    let technical = 1e4;
    let lambda_fb = (1e4 / (p.kappa_a1 * p.kappa_b2)).sqrt();
    let with = DiffusionSpec::measurement_feedback(lambda_fb, p.kappa_a1, p.kappa_b2, technical);
    let without = DiffusionSpec { gamma: 0.0, technical };
    let variance = |d: &DiffusionSpec, seed: u64| -> Result<f64, String> {
        let tr = simulate_meanfield_sde(&m, d, &SdeConfig::new(1e-9, seed, 1), 100e-6, s0).map_err(|e| e.to_string())?;
        let rec = synthesize_heterodyne(&tr[0], &readout, &HeterodyneOptions { n_samples: 12_000, ..Default::default() }, 0, 0).map_err(|e| e.to_string())?;
        Ok(extract_ticks(&rec, &TickOptions::default()).map_err(|e| e.to_string())?.variance())
    };
    let mut wins = 0;
    for seed in 0..20 {
        if variance(&with, seed)? > variance(&without, seed)? {
            wins += 1;
        }
    }
    ensure(wins >= 18, || format!("noisier in {wins} of 20 runs"))?;
    Ok(format!("Γ = {:.0e}/s noisier in {wins} of 20 runs", with.gamma))
}

fn pipeline_closure() -> Outcome {
    let (rec, periods) = wald_tick_record(2000, 2e-6, 5.1, 125e6, 8);
    let ticks = extract_ticks(&rec, &TickOptions::default()).map_err(|e| e.to_string())?;
    let fit = fit_wald(&ticks).map_err(|e| e.to_string())?;
    ensure(rel(fit.accuracy, 5.1) < 0.1, || format!("recovered N = {:.3}", fit.accuracy))?;
    Ok(format!("{} ticks of {}, recovered N = {:.3}", ticks.len(), periods.len(), fit.accuracy))
}

fn lorentzian_recovery() -> Outcome {
    let width = 100e3;
    // Records span about 120 correlation times; at 4800 samples the periodogram is
    // biased wide by the record length.
    let recs = ou_records(100, 48_000, 125e6, 1e6, width, 9);
    let mut worst: f64 = 0.0;
    for r in &recs {
        let e = compute_esd(std::slice::from_ref(r), Window::Rectangular).map_err(|e| e.to_string())?;
        worst = worst.max(rel(e.energy(), r.energy()));
    }
    let fit = fit_lorentzian(&compute_esd(&recs, Window::Rectangular).map_err(|e| e.to_string())?, (0.0, 2e6)).map_err(|e| e.to_string())?;
    ensure(worst < 1e-6, || format!("Parseval off by {worst:e}"))?;
    ensure(rel(fit.fwhm, width) < 0.05, || format!("FWHM {:.2} kHz vs {:.0} kHz", fit.fwhm / 1e3, width / 1e3))?;
    Ok(format!("FWHM {:.2} kHz for {:.0} kHz, Parseval {worst:.1e}", fit.fwhm / 1e3, width / 1e3))
}

fn device_inversion() -> Outcome {
    let mhz = TAU * 1e6;
    let flux = FluxPoint::new(0.274 * std::f64::consts::PI).map_err(|e| e.to_string())?;
    let targets = DeviceTargets {
        flux: flux.value(),
        omega_a: 7406.0 * mhz,
        omega_b_zero: 7496.0 * mhz,
        omega_b_flux: 7405.3 * mhz,
        kerr_a: -0.01 * mhz,
        kerr_b_flux: -0.03 * mhz,
        kappa_a1: 3.20 * mhz,
        kappa_b_zero: 2.64 * mhz,
    };
    let design = fit_geometry(&targets, &LineTemplate::default()).map_err(|e| e.to_string())?;
    let (gamma_b, omega0_b) = invert_flux_tuning(targets.omega_b_zero, targets.omega_b_flux, flux).map_err(|e| e.to_string())?;
    let g = CircuitGeometry { lj_b: gamma_b * design.l0 * design.d_b, omega0_b, ..design };
    let (zero, at_f) = (effective_params(&g, FluxPoint::zero()).map_err(|e| e.to_string())?, effective_params(&g, flux).map_err(|e| e.to_string())?);
    let dw = ((zero.omega_b - targets.omega_b_zero).abs().max((at_f.omega_b - targets.omega_b_flux).abs())) / mhz;
    let kb = kerr_coefficients(&g, flux).map_err(|e| e.to_string())?.kerr_b / mhz;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let exact = (0..1000).all(|_| {
        let p = rng.random_range(-140.0..10.0);
        let w = rng.random_range(1e9..1e11);
        let r = dbm_to_rate(p, w).unwrap();
        (rate_to_dbm(r, w).unwrap() - p).abs() <= 1e-12 * p.abs().max(1.0) && (dbm_to_rate(rate_to_dbm(r, w).unwrap(), w).unwrap() / r - 1.0).abs() < 1e-13
    });
    ensure(dw < 0.1, || format!("ω_b off by {dw} MHz"))?;
    ensure(rel(kb, -0.03) < 0.2, || format!("K_b(F)/2π = {kb} MHz"))?;
    ensure(exact, || "dBm round trip is not exact".into())?;
    Ok(format!("γ_b = {gamma_b:.6}, ω_b off by {dw:.1e} MHz, K_b(F)/2π = {kb:.4} MHz"))
}

fn noisy_drive_crossover() -> Outcome {
    let opts = NoisyDriveOptions::new(ClockParams::reference_device(), 1e10);
    let report = noisy_drive_experiment(&[0.0, 100e3, 200e3, 300e3, 400e3], &opts).map_err(|e| e.to_string())?;
    let widths: Vec<String> = report
        .points
        .iter()
        .map(|p| {
            format!(
                "{:.0}k: drive {:.1} / sideband {:.1} kHz",
                p.deviation_hz / 1e3,
                p.drive_fwhm().unwrap_or(f64::NAN) / 1e3,
                p.sideband.map(|s| s.fwhm).unwrap_or(f64::NAN) / 1e3
            )
        })
        .collect();
    let detail = widths.join("; ");
    ensure(report.crossover_hz.is_some(), || format!("no crossover: {detail}"))?;
    ensure(report.drive_fwhm_monotone(), || format!("drive linewidth not monotone: {detail}"))?;
    Ok(format!("crossover at {:.0} kHz; {detail}", report.crossover_hz.unwrap() / 1e3))
}

type Check = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Check; 11] = [
        ("1 SLH reproduction", slh_reproduction),
        ("2 mean-field extraction", mean_field_extraction),
        ("3 bifurcation structure", bifurcation_structure),
        ("4 reduced model", reduced_model_closed_form),
        ("5 measurement-feedback equivalence", mbf_equivalence),
        ("6 clock statistics", clock_statistics),
        ("7 noise ordering", noise_ordering),
        ("8 pipeline closure", pipeline_closure),
        ("9 Lorentzian recovery", lorentzian_recovery),
        ("10 device inversion", device_inversion),
        ("noisy-drive crossover", noisy_drive_crossover),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                println!("criterion {name}: FAIL ({detail})");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        println!("{} criteria failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
}
