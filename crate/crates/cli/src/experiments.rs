use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use cfclock::analysis::*;
use cfclock::device::{effective_params, fit_geometry, kerr_coefficients, FluxPoint};
use cfclock::dynamics::*;
use cfclock::slh::{build_clock_network, extract_mean_field, ClockParams, MODE_A, MODE_B};
use cfclock::stochastic::{simulate_meanfield_sde, SdeConfig};
use cfclock::{hertz, Error, Result};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{schema, Experiment, IqFormat, RunConfig};
use crate::output::Output;

pub fn run(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    cfg.solver.validate()?;
    let p = cfg.params()?;
    match cfg.experiment {
        Experiment::Compose => compose(&p, out),
        Experiment::Stability => stability(cfg, &p, out),
        Experiment::Sweep => sweep(cfg, &p, out),
        Experiment::Simulate => simulate(cfg, &p, out),
        Experiment::Sde => sde(cfg, &p, out),
        Experiment::Ticks => ticks(cfg, &p, out),
        Experiment::Esd => esd(cfg, &p, out),
        Experiment::Device => device(cfg, out),
        Experiment::NoisyDrive => noisy_drive(cfg, &p, out),
    }
}

fn c(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn compose(p: &ClockParams, out: &mut Output) -> Result<()> {
    let g = build_clock_network(p)?;
    let (a, b) = (g.mode_index(MODE_A).expect("mode a"), g.mode_index(MODE_B).expect("mode b"));
    let h = g.absorb_displacements().hamiltonian().clone();
    let rows: Vec<_> = g
        .collapse()
        .iter()
        .enumerate()
        .map(|(k, op)| json!({ "row": k, "coeff_a": c(op.coeffs[a]), "coeff_b": c(op.coeffs[b]), "scalar": c(op.scalar) }))
        .collect();
    let s = g.scattering();
    let scattering: Vec<Vec<[f64; 2]>> = (0..s.nrows()).map(|i| (0..s.ncols()).map(|j| c(s[(i, j)])).collect()).collect();
    let doc = json!({
        "units": "Hamiltonian coefficients in rad/s, collapse coefficients in sqrt(rad/s)",
        "hamiltonian": {
            "detuning_a": h.quad[(a, a)].re,
            "detuning_b_effective": h.quad[(b, b)].re,
            "coupling_ab": c(h.quad[(a, b)]),
            "kerr_a": h.kerr[a],
            "kerr_b": h.kerr[b],
            "drive_a": c(h.linear[a]),
            "drive_b": c(h.linear[b]),
        },
        "collapse": rows,
        "readout_row": READOUT_ROW,
        "scattering": scattering,
        "unitarity_error": g.unitarity_error(),
        "mean_field": extract_mean_field(&g)?,
    });
    let mut csv = String::from("row,coeff_a_re,coeff_a_im,coeff_b_re,coeff_b_im,scalar_re,scalar_im\n");
    for (k, op) in g.collapse().iter().enumerate() {
        let (x, y, z) = (op.coeffs[a], op.coeffs[b], op.scalar);
        csv.push_str(&format!("{k},{},{},{},{},{},{}\n", x.re, x.im, y.re, y.im, z.re, z.im));
    }
    out.csv("collapse.csv", &csv)?;
    out.json("network.json", &doc)
}

fn fixed_options(cfg: &RunConfig) -> FixedPointOptions {
    FixedPointOptions { n_starts: cfg.solver.n_starts, tol: cfg.solver.newton_tol, ..Default::default() }
}

fn stability(cfg: &RunConfig, p: &ClockParams, out: &mut Output) -> Result<()> {
    let eps_sq = p.drive * p.drive;
    let d = sweep_drive(&DriveTemplate::from_params(p), &[eps_sq], &SweepOptions { fixed: fixed_options(cfg), refine_steps: 0 })?;
    out.csv("fixed_points.csv", &d.to_csv())?;
    let fps: Vec<_> = d.points[0].branches.iter().map(|(_, f)| f).collect();
    out.json("fixed_points.json", &json!({ "eps_sq_per_s": eps_sq, "fixed_points": fps }))
}

fn transient(cfg: &RunConfig, m: &MeanFieldModel) -> LimitCycleOptions {
    let base = LimitCycleOptions::for_model(m);
    let t = cfg.solver.transient_s.unwrap_or(base.transient.min(0.5 * cfg.solver.t_end_s));
    LimitCycleOptions { transient: t, ..base }
}

fn sweep(cfg: &RunConfig, p: &ClockParams, out: &mut Output) -> Result<()> {
    let block = cfg.sweep.as_ref().ok_or_else(|| schema("sweep", "block required"))?;
    let grid = block.grid()?;
    let template = DriveTemplate::from_params(p);
    let d = sweep_drive(&template, &grid, &SweepOptions { fixed: fixed_options(cfg), refine_steps: block.refine_steps })?;
    out.csv("bifurcation.csv", &d.to_csv())?;
    let cycles: Vec<(f64, Option<LimitCycleInfo>)> = if block.detect_cycles {
        grid.par_iter()
            .map(|&e| {
                let m = template.model_at(e);
                let traj = integrate(&m, StateQuad::default(), cfg.solver.t_end_s, cfg.solver.dt_s, cfg.solver.method())?;
                Ok((e, detect_limit_cycle(&traj, &transient(cfg, &m))))
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    if block.detect_cycles {
        let mut csv = String::from("eps_sq,period_s,frequency_hz,amplitude_a,amplitude_b\n");
        for (e, lc) in &cycles {
            match lc {
                Some(l) => csv.push_str(&format!("{e},{},{},{},{}\n", l.period, l.frequency, l.amplitude_a, l.amplitude_b)),
                None => csv.push_str(&format!("{e},,,,\n")),
            }
        }
        out.csv("cycles.csv", &csv)?;
    }
    let cycles_json: Vec<_> = cycles.iter().map(|(e, lc)| json!({ "eps_sq_per_s": e, "limit_cycle": lc })).collect();
    out.json("sweep.json", &json!({ "grid_points": grid.len(), "transitions": d.transitions, "cycles": cycles_json }))
}

fn initial(cfg: &RunConfig) -> StateQuad {
    StateQuad::from_array(cfg.simulate.unwrap_or_default().initial_quadratures_sqrt_photons)
}

fn trajectory_csv(traj: &Trajectory, path: Option<usize>, csv: &mut String) {
    for (t, s) in traj.t.iter().zip(&traj.states) {
        if let Some(k) = path {
            csv.push_str(&format!("{k},"));
        }
        csv.push_str(&format!("{t},{},{},{},{}\n", s.x_a, s.y_a, s.x_b, s.y_b));
    }
}

fn simulate(cfg: &RunConfig, p: &ClockParams, out: &mut Output) -> Result<()> {
    let m = MeanFieldModel::from_params(p);
    let traj = integrate(&m, initial(cfg), cfg.solver.t_end_s, cfg.solver.dt_s, cfg.solver.method())?;
    let mut csv = String::from("t_s,x_a,y_a,x_b,y_b\n");
    trajectory_csv(&traj, None, &mut csv);
    out.csv("trajectory.csv", &csv)?;
    let lc = detect_limit_cycle(&traj, &transient(cfg, &m));
    out.json("simulate.json", &json!({ "final_state": traj.last(), "limit_cycle": lc }))
}

fn sde_paths(cfg: &RunConfig, p: &ClockParams) -> Result<Vec<Trajectory>> {
    let m = MeanFieldModel::from_params(p);
    let d = cfg.noise.unwrap_or_default().diffusion(p)?;
    let sde = SdeConfig { record_every: cfg.solver.record_every, ..SdeConfig::new(cfg.solver.dt_s, cfg.rng.seed, cfg.rng.n_paths) };
    simulate_meanfield_sde(&m, &d, &sde, cfg.solver.t_end_s, initial(cfg))
}

fn sde(cfg: &RunConfig, p: &ClockParams, out: &mut Output) -> Result<()> {
    let paths = sde_paths(cfg, p)?;
    let mut csv = String::from("path,t_s,x_a,y_a,x_b,y_b\n");
    for (k, tr) in paths.iter().enumerate() {
        trajectory_csv(tr, Some(k), &mut csv);
    }
    out.csv("paths.csv", &csv)?;
    let d = cfg.noise.unwrap_or_default().diffusion(p)?;
    let finals: Vec<_> = paths.iter().map(|t| t.last()).collect();
    out.json("sde.json", &json!({ "diffusion": d, "n_paths": paths.len(), "final_states": finals }))
}

fn read_iq(path: &Path) -> Result<IQRecord> {
    let mut head = [0u8; 8];
    let is_binary = File::open(path)?.read_exact(&mut head).is_ok() && &head == IQ_MAGIC;
    let f = BufReader::new(File::open(path)?);
    if is_binary {
        IQRecord::read_binary(f)
    } else {
        IQRecord::read_csv(f)
    }
}

/// IQ files when given, otherwise one heterodyne record per simulated path.
fn records(cfg: &RunConfig, p: &ClockParams, files: &[std::path::PathBuf], out: &mut Output) -> Result<Vec<IQRecord>> {
    if !files.is_empty() {
        return files.iter().map(|f| read_iq(f)).collect();
    }
    let rec = cfg.record.unwrap_or_default();
    let readout = readout_operator(p, READOUT_ROW)?;
    let opts = HeterodyneOptions { sample_rate: rec.sample_rate_hz, n_samples: rec.n_samples, t_start: rec.t_start_s, noise_variance: rec.noise_variance };
    let paths = sde_paths(cfg, p)?;
    let recs: Vec<IQRecord> =
        paths.par_iter().enumerate().map(|(k, tr)| synthesize_heterodyne(tr, &readout, &opts, cfg.rng.seed, k as u64)).collect::<Result<_>>()?;
    if rec.write_records {
        for (k, r) in recs.iter().enumerate() {
            let mut buf = Vec::new();
            match rec.iq_format {
                IqFormat::Binary => {
                    r.write_binary(&mut buf)?;
                    out.raw(&format!("record_{k:04}.iq"), &buf)?;
                }
                IqFormat::Csv => {
                    r.write_csv(&mut buf)?;
                    out.raw(&format!("record_{k:04}.csv"), &buf)?;
                }
            }
        }
    }
    Ok(recs)
}

fn ticks(cfg: &RunConfig, p: &ClockParams, out: &mut Output) -> Result<()> {
    let block = cfg.ticks.clone().unwrap_or(crate::config::TicksConfig { iq_paths: Vec::new(), lp_cutoff_hz: 4e6, band: Band::Full });
    let recs = records(cfg, p, &block.iq_paths, out)?;
    let opts = TickOptions { lp_cutoff: block.lp_cutoff_hz, band: block.band };
    let per_record: Vec<TickSeries> = recs.par_iter().map(|r| extract_ticks(r, &opts)).collect::<Result<_>>()?;
    let mut all = TickSeries::default();
    per_record.iter().for_each(|t| all.extend(t));
    out.csv("ticks.csv", &all.to_csv())?;
    let fit = fit_wald(&all)?;
    let f = 1.0 / fit.alpha;
    out.json(
        "ticks.json",
        &json!({
            "n_records": recs.len(),
            "n_periods": all.len(),
            "mean_period_s": all.mean(),
            "period_variance_s2": all.variance(),
            "accuracy": all.accuracy(),
            "wald": fit,
            "beats_random_clock": fit.beats_random_clock(),
            "tick_frequency_hz": f,
            "linewidth_from_ticks_hz": linewidth_from_ticks(&fit, f),
        }),
    )
}

fn esd(cfg: &RunConfig, p: &ClockParams, out: &mut Output) -> Result<()> {
    let block = cfg.esd.clone().unwrap_or(crate::config::EsdConfig { iq_paths: Vec::new(), window: Window::Rectangular, fit_windows_hz: Vec::new() });
    let recs = records(cfg, p, &block.iq_paths, out)?;
    let e = compute_esd(&recs, block.window)?;
    out.csv("esd.csv", &e.to_csv())?;
    let fits: Vec<_> = block
        .fit_windows_hz
        .iter()
        .map(|w| match fit_lorentzian(&e, (w[0], w[1])) {
            Ok(f) => json!({ "window_hz": w, "fit": f }),
            Err(err) => json!({ "window_hz": w, "error": err.to_string() }),
        })
        .collect();
    let energies: Vec<f64> = recs.iter().map(|r| r.energy()).collect();
    out.json("esd.json", &json!({ "n_averages": e.n_averages, "bin_width_hz": e.df, "energy": e.energy(), "record_energies": energies, "fits": fits }))
}

fn device(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let block = cfg.device.as_ref().ok_or_else(|| schema("device", "block required"))?;
    let g = match (&block.geometry, &block.targets) {
        (Some(g), None) => g.to_geometry(),
        (None, Some(t)) => fit_geometry(&t.to_targets(), &block.line())?,
        _ => return Err(schema("device", "give exactly one of geometry and targets")),
    };
    let warnings = g.validate()?;
    if block.flux_grid_rad.is_empty() {
        return Err(schema("device.flux_grid_rad", "must not be empty"));
    }
    let mut csv = String::from("flux_rad,omega_b_hz,kappa_b1_hz,kappa_b2_hz,kerr_b_hz\n");
    let mut rows = Vec::new();
    for &f in &block.flux_grid_rad {
        let flux = FluxPoint::new(f)?;
        let e = effective_params(&g, flux)?;
        let k = kerr_coefficients(&g, flux)?;
        csv.push_str(&format!("{f},{},{},{},{}\n", hertz(e.omega_b), hertz(e.kappa_b1), hertz(e.kappa_b2), hertz(k.kerr_b)));
        rows.push(json!({ "flux_rad": f, "effective": e, "kerr": k }));
    }
    out.csv("device.csv", &csv)?;
    let zero = effective_params(&g, FluxPoint::zero())?;
    out.json(
        "device.json",
        &json!({
            "geometry": g,
            "gamma_a": g.gamma_a(),
            "gamma_b": g.gamma_b(),
            "warnings": warnings,
            "omega_a_hz": hertz(zero.omega_a),
            "kappa_a1_hz": hertz(zero.kappa_a1),
            "kerr_a_hz": hertz(kerr_coefficients(&g, FluxPoint::zero())?.kerr_a),
            "rows": rows,
        }),
    )
}

fn noisy_drive(cfg: &RunConfig, p: &ClockParams, out: &mut Output) -> Result<()> {
    let block = cfg.noisy_drive.as_ref().ok_or_else(|| schema("noisy_drive", "block required"))?;
    let rec = cfg.record.unwrap_or_default();
    let eps_sq = p.drive * p.drive;
    if !(eps_sq > 0.0) {
        return Err(schema("params", "noisy-drive needs a non-zero drive"));
    }
    let opts = NoisyDriveOptions {
        cutoff_hz: block.fm_cutoff_hz,
        technical_noise: block.technical_per_s,
        n_records: block.n_records,
        sample_rate: rec.sample_rate_hz,
        n_samples: rec.n_samples,
        substeps: block.substeps,
        warmup: block.warmup_s,
        settle: block.settle_s,
        seed: cfg.rng.seed,
        ..NoisyDriveOptions::new(ClockParams { drive: 0.0, ..*p }, eps_sq)
    };
    let report = noisy_drive_experiment(&block.fm_deviations_hz, &opts)?;
    let mut csv = String::from("deviation_hz,drive_fwhm_hz,sideband_fwhm_hz,transform_limited,sideband_narrower\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for pt in &report.points {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            pt.deviation_hz,
            opt(pt.drive_fwhm()),
            opt(pt.sideband.map(|s| s.fwhm)),
            pt.transform_limited,
            pt.sideband_narrower().map(|b| b.to_string()).unwrap_or_default()
        ));
    }
    out.csv("noisy_drive.csv", &csv)?;
    out.json("noisy_drive.json", &json!({ "report": report, "drive_fwhm_monotone": report.drive_fwhm_monotone() }))
}

/// Exit status for a failed run: 2 for invalid input, 3 for numeric failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } | Error::Format(_) | Error::PortMismatch { .. } | Error::PortOutOfRange { .. } => 2,
        _ => 3,
    }
}
