mod common;

use cfclock::analysis::*;
use cfclock::dynamics::{detect_limit_cycle, integrate, LimitCycleOptions, MeanFieldModel, Method, StateQuad};
use cfclock::slh::ClockParams;
use cfclock::stochastic::{first_passage_ticks, simulate_phase, PhaseOscillatorParams, SdeConfig};
use common::TAU;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn record_strategy() -> impl Strategy<Value = IQRecord> {
    (1e3f64..1e9, prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..300))
        .prop_map(|(rate, v)| IQRecord::new(rate, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

proptest! {
    #[test]
    fn parseval(rec in record_strategy(), hann in any::<bool>()) {
        let w = if hann { Window::Hann } else { Window::Rectangular };
        let esd = compute_esd(std::slice::from_ref(&rec), w).unwrap();
        if !hann {
            prop_assert!((esd.energy() - rec.energy()).abs() <= 1e-9 * rec.energy().max(1e-300));
        }
        prop_assert!(esd.esd.iter().all(|e| *e >= 0.0));
        prop_assert!(esd.freq.windows(2).all(|f| f[1] > f[0]));
    }

    #[test]
    fn binary_round_trip(rec in record_strategy()) {
        let mut buf = Vec::new();
        rec.write_binary(&mut buf).unwrap();
        prop_assert_eq!(&buf[..8], IQ_MAGIC);
        prop_assert_eq!(buf.len(), 8 + 8 + 8 + 16 * rec.len());
        prop_assert_eq!(IQRecord::read_binary(&buf[..]).unwrap(), rec);
    }

    #[test]
    fn csv_round_trip(rec in record_strategy()) {
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let back = IQRecord::read_csv(&buf[..]).unwrap();
        prop_assert_eq!(&back.samples, &rec.samples);
        prop_assert!((back.sample_rate / rec.sample_rate - 1.0).abs() < 1e-9);
    }
}

#[test]
fn bad_binary_is_rejected() {
    let mut buf = Vec::new();
    IQRecord::new(1e6, vec![C64::new(1.0, 2.0); 4]).unwrap().write_binary(&mut buf).unwrap();
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(IQRecord::read_binary(&bad[..]).is_err());
    assert!(IQRecord::read_binary(&buf[..buf.len() - 3]).is_err());
}

#[test]
fn mismatched_records() {
    let a = IQRecord::new(1e6, vec![C64::new(1.0, 0.0); 8]).unwrap();
    let b = IQRecord::new(1e6, vec![C64::new(1.0, 0.0); 9]).unwrap();
    let c = IQRecord::new(2e6, vec![C64::new(1.0, 0.0); 8]).unwrap();
    assert!(compute_esd(&[a.clone(), b], Window::Rectangular).is_err());
    assert!(compute_esd(&[a, c], Window::Rectangular).is_err());
    assert!(compute_esd(&[], Window::Rectangular).is_err());
}

#[test]
fn pure_tone_lands_in_its_bin() {
    let (rate, n) = (125e6, 4800);
    let f = 40.0 * rate / n as f64;
    let rec = IQRecord::new(rate, (0..n).map(|k| C64::from_polar(1.0, TAU * f * k as f64 / rate)).collect()).unwrap();
    let esd = compute_esd(std::slice::from_ref(&rec), Window::Rectangular).unwrap();
    let k = esd.bin_of(f);
    assert!((esd.esd[k] * esd.df / rec.energy() - 1.0).abs() < 1e-9);
}

#[test]
fn lorentzian_of_ou_records() {
    let recs = common::ou_records(100, 48_000, 125e6, 2e6, 80e3, 5);
    let esd = compute_esd(&recs, Window::Rectangular).unwrap();
    let fit = fit_lorentzian(&esd, (1e6, 3e6)).unwrap();
    assert!((fit.center - 2e6).abs() < 2e3);
    assert!((fit.fwhm / 80e3 - 1.0).abs() < 0.05, "{}", fit.fwhm);
    assert!(fit.stderr.iter().all(|s| s.is_finite()));
}

#[test]
fn lorentzian_rejects_flat_window() {
    let rec = IQRecord::new(1e6, vec![C64::new(0.0, 0.0); 64]).unwrap();
    let esd = compute_esd(&[rec], Window::Rectangular).unwrap();
    assert!(fit_lorentzian(&esd, (-1e5, 1e5)).is_err());
}

#[test]
fn wald_ticks_survive_the_filter() {
    let (rec, periods) = common::wald_tick_record(400, 2e-6, 5.1, 125e6, 1);
    let ticks = extract_ticks(&rec, &TickOptions::default()).unwrap();
    // Edges near the record ends fall inside the filter margin.
    assert!(ticks.len() + 3 >= periods.len() - 1 && ticks.len() < periods.len());
    let truth = TickSeries::new(periods);
    assert!((ticks.mean() / truth.mean() - 1.0).abs() < 0.02);
}

#[test]
fn wald_fit_of_exact_wald_sample() {
    let (_, periods) = common::wald_tick_record(20_000, 1.0, 5.1, 1.0, 2);
    let fit = fit_wald(&TickSeries::new(periods.clone())).unwrap();
    assert!((fit.accuracy / 5.1 - 1.0).abs() < 0.03);
    assert!(fit.r_squared > 0.95);
    let ks = cfclock::stochastic::ks_test(&periods, |t| cfclock::stochastic::wald_cdf(t, fit.alpha, fit.lambda).unwrap());
    assert!(ks.p_value > 0.01);
}

#[test]
fn first_passage_ticks_pass_ks() {
    let p = PhaseOscillatorParams { omega: TAU, mu: 1.0, sigma: 0.8 };
    let ticks = first_passage_ticks(&p, &SdeConfig::new(1e-4, 21, 4), 500).unwrap();
    let mut all = TickSeries::default();
    ticks.iter().for_each(|t| all.extend(t));
    let ks = cfclock::stochastic::ks_test(&all.periods, |t| cfclock::stochastic::wald_cdf(t, p.mean_period(), p.wald_lambda()).unwrap());
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn linewidth_relation() {
    // FWHM = 2π·f/N in Hz.
    let (f, n) = (3e6, 5.0);
    let alpha = 1.0 / f;
    let fit = WaldFit { alpha, lambda: n * alpha, accuracy: n, r_squared: 1.0, n: 100 };
    assert!((linewidth_from_ticks(&fit, f) / (TAU * f / n) - 1.0).abs() < 1e-12);
}

#[test]
fn tick_linewidth_matches_spectral_linewidth() {
    let (f, width) = (1e6, 50e3);
    let p = PhaseOscillatorParams { omega: TAU * f, mu: 1.0, sigma: (TAU * width).sqrt() };
    let ticks = first_passage_ticks(&p, &SdeConfig::new(1e-9, 3, 8), 500).unwrap();
    let mut all = TickSeries::default();
    ticks.iter().for_each(|t| all.extend(t));
    let from_ticks = linewidth_from_ticks(&fit_wald(&all).unwrap(), f);
    let rate = 125e6;
    let n = 48_000;
    let paths = simulate_phase(&p, &SdeConfig::new(1.0 / rate, 4, 60), (n - 1) as f64 / rate).unwrap();
    let recs: Vec<IQRecord> = paths.iter().map(|th| IQRecord::new(rate, th.iter().map(|x| C64::from_polar(1.0, *x)).collect()).unwrap()).collect();
    let fit = fit_lorentzian(&compute_esd(&recs, Window::Rectangular).unwrap(), (0.5e6, 1.5e6)).unwrap();
    assert!((from_ticks / fit.fwhm - 1.0).abs() < 0.15, "{from_ticks} vs {}", fit.fwhm);
}

#[test]
fn heterodyne_ticks_close_on_the_cycle_period() {
    let p = ClockParams::reference_device().with_drive_rate(0.3e10);
    let m = MeanFieldModel::from_params(&p);
    let traj = integrate(&m, StateQuad::default(), 150e-6, 1e-9, Method::Rk4).unwrap();
    let lc = detect_limit_cycle(&traj, &LimitCycleOptions { transient: 60e-6, ..LimitCycleOptions::for_model(&m) }).unwrap();
    let readout = readout_operator(&p, READOUT_ROW).unwrap();
    let opts = HeterodyneOptions { t_start: 100e-6, ..Default::default() };
    let rec = synthesize_heterodyne(&traj, &readout, &opts, 0, 0).unwrap();
    let ticks = extract_ticks(&rec, &TickOptions::default()).unwrap();
    assert!((ticks.mean() / lc.period - 1.0).abs() < 0.01, "{} vs {}", ticks.mean(), lc.period);
    let upper = extract_ticks(&rec, &TickOptions { band: Band::PositiveSideband, ..Default::default() });
    let lower = extract_ticks(&rec, &TickOptions { band: Band::NegativeSideband, ..Default::default() });
    assert!(upper.is_ok() || lower.is_ok());
}

#[test]
fn heterodyne_rejects_out_of_range_window() {
    let p = ClockParams::reference_device().with_drive_rate(0.3e10);
    let m = MeanFieldModel::from_params(&p);
    let traj = integrate(&m, StateQuad::default(), 10e-6, 1e-9, Method::Rk4).unwrap();
    let readout = readout_operator(&p, READOUT_ROW).unwrap();
    let opts = HeterodyneOptions { t_start: 5e-6, ..Default::default() };
    assert!(synthesize_heterodyne(&traj, &readout, &opts, 0, 0).is_err());
}

#[test]
fn heterodyne_noise_is_seeded() {
    let p = ClockParams::reference_device().with_drive_rate(0.3e10);
    let m = MeanFieldModel::from_params(&p);
    let traj = integrate(&m, StateQuad::default(), 50e-6, 1e-9, Method::Rk4).unwrap();
    let readout = readout_operator(&p, READOUT_ROW).unwrap();
    let opts = HeterodyneOptions { noise_variance: 1.0, ..Default::default() };
    let a = synthesize_heterodyne(&traj, &readout, &opts, 7, 0).unwrap();
    let b = synthesize_heterodyne(&traj, &readout, &opts, 7, 0).unwrap();
    let c = synthesize_heterodyne(&traj, &readout, &opts, 7, 1).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
