use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};

fn check(t: f64, alpha: f64, lambda: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(invalid("t", format!("must be positive, got {t}")));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    Ok(())
}

/// Inverse Gaussian density with mean `alpha` and shape `lambda`.
pub fn wald_pdf(t: f64, alpha: f64, lambda: f64) -> Result<f64> {
    check(t, alpha, lambda)?;
    Ok((lambda / (2.0 * std::f64::consts::PI)).sqrt() * t.powf(-1.5) * (-lambda * (t - alpha).powi(2) / (2.0 * alpha * alpha * t)).exp())
}

/// `ln Φ(−z)` for the standard normal CDF, accurate in the far tail.
fn ln_norm_sf(z: f64) -> f64 {
    if z < 30.0 {
        (0.5 * erfc(z / std::f64::consts::SQRT_2)).ln()
    } else {
        let z2 = z * z;
        -0.5 * z2 - (z * (2.0 * std::f64::consts::PI).sqrt()).ln() + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2)).ln()
    }
}

pub fn wald_cdf(t: f64, alpha: f64, lambda: f64) -> Result<f64> {
    check(t, alpha, lambda)?;
    let s = (lambda / t).sqrt();
    let first = 0.5 * erfc(-s * (t / alpha - 1.0) / std::f64::consts::SQRT_2);
    let second = (2.0 * lambda / alpha + ln_norm_sf(s * (t / alpha + 1.0))).exp();
    Ok((first + second).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample Kolmogorov–Smirnov test against `cdf`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / nf).abs().max(((i + 1) as f64 / nf - f).abs())
        })
        .fold(0.0, f64::max);
    let sq = nf.sqrt();
    let lam = (sq + 0.12 + 0.11 / sq) * statistic;
    let p_value = if lam < 1e-3 {
        1.0
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k * k) as f64 * lam * lam).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-16 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    };
    KsResult { statistic, p_value, n }
}
