use std::io::{BufRead, Read, Write};

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::slh::{build_clock_network, AffineModeOperator, ClockParams, MODE_A, MODE_B};
use crate::stochastic::path_rng;

pub const IQ_MAGIC: &[u8; 8] = b"CFCIQ001";

/// Uniformly sampled complex baseband record `s(t) = I(t) + iQ(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IQRecord {
    /// Hz.
    pub sample_rate: f64,
    pub samples: Vec<C64>,
}

impl IQRecord {
    pub fn new(sample_rate: f64, samples: Vec<C64>) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(invalid("sample_rate", format!("must be positive, got {sample_rate}")));
        }
        if samples.len() < 2 {
            return Err(Error::InsufficientData { needed: 2, got: samples.len() });
        }
        Ok(Self { sample_rate, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// `Σ|s|²·dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dt()
    }

    /// Magic, sample count (u64), sample rate (f64), then interleaved f64
    /// `I, Q`; all little-endian.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(IQ_MAGIC)?;
        w.write_all(&(self.samples.len() as u64).to_le_bytes())?;
        w.write_all(&self.sample_rate.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.samples.len());
        for z in &self.samples {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 24];
        r.read_exact(&mut head).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        if &head[..8] != IQ_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let n = u64::from_le_bytes(head[8..16].try_into().expect("8 bytes"));
        let rate = f64::from_le_bytes(head[16..24].try_into().expect("8 bytes"));
        let n = usize::try_from(n).map_err(|_| Error::Format("sample count overflows".into()))?;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 16 * n {
            return Err(Error::Format(format!("expected {} payload bytes, found {}", 16 * n, body.len())));
        }
        let samples = body
            .chunks_exact(16)
            .map(|c| C64::new(f64::from_le_bytes(c[..8].try_into().expect("8 bytes")), f64::from_le_bytes(c[8..].try_into().expect("8 bytes"))))
            .collect();
        Self::new(rate, samples).map_err(|e| Error::Format(e.to_string()))
    }

    /// Columns `t,I,Q` with `t` in seconds.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "t,I,Q")?;
        for (k, z) in self.samples.iter().enumerate() {
            writeln!(w, "{},{},{}", k as f64 / self.sample_rate, z.re, z.im)?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
        if header.trim() != "t,I,Q" {
            return Err(Error::Format(format!("unexpected header `{header}`")));
        }
        let (mut t, mut samples) = (Vec::new(), Vec::new());
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", k + 2)))?;
            if v.len() != 3 {
                return Err(Error::Format(format!("line {}: expected 3 columns", k + 2)));
            }
            t.push(v[0]);
            samples.push(C64::new(v[1], v[2]));
        }
        if t.len() < 2 {
            return Err(Error::Format("need at least two samples".into()));
        }
        let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
            return Err(Error::Format("time column is not uniformly sampled".into()));
        }
        Self::new(1.0 / dt, samples)
    }
}

/// Index of the collapse row that leaves the driven port of resonator B.
pub const READOUT_ROW: usize = 2;

/// Collapse row `row` of the clock network as an operator over `(a, b)`,
/// including its drive displacement.
pub fn readout_operator(p: &ClockParams, row: usize) -> Result<AffineModeOperator> {
    let g = build_clock_network(p)?;
    let op = g.collapse().get(row).ok_or(Error::PortOutOfRange { index: row, ports: g.n_ports() })?;
    let ia = g.mode_index(MODE_A).expect("clock has mode a");
    let ib = g.mode_index(MODE_B).expect("clock has mode b");
    Ok(AffineModeOperator { coeffs: vec![op.coeffs[ia], op.coeffs[ib]], scalar: op.scalar })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeterodyneOptions {
    /// Hz.
    pub sample_rate: f64,
    pub n_samples: usize,
    /// Trajectory time of the first sample (s).
    pub t_start: f64,
    /// Variance of the complex white noise added to each sample.
    pub noise_variance: f64,
}

impl Default for HeterodyneOptions {
    fn default() -> Self {
        Self { sample_rate: 125e6, n_samples: 4800, t_start: 0.0, noise_variance: 0.0 }
    }
}

/// Mean output field `⟨L⟩ = C_a α + C_b β + c` along the trajectory,
/// resampled at `sample_rate`, plus complex white Gaussian noise. `stream`
/// selects the noise stream for `seed`.
pub fn synthesize_heterodyne(traj: &Trajectory, readout: &AffineModeOperator, opts: &HeterodyneOptions, seed: u64, stream: u64) -> Result<IQRecord> {
    if readout.coeffs.len() != 2 {
        return Err(invalid("readout", "operator must act on the two modes (a, b)"));
    }
    if !(opts.noise_variance >= 0.0) {
        return Err(invalid("noise_variance", "must be non-negative"));
    }
    let (Some(&t0), Some(&t1)) = (traj.t.first(), traj.t.last()) else {
        return Err(Error::RecordMismatch("empty trajectory".into()));
    };
    let span = (opts.n_samples.max(1) - 1) as f64 / opts.sample_rate;
    let tol = 1e-9 * (t1 - t0).abs().max(span);
    if opts.t_start < t0 - tol || opts.t_start + span > t1 + tol {
        return Err(Error::RecordMismatch(format!(
            "trajectory covers [{t0:e}, {t1:e}] s but the record needs [{:e}, {:e}] s",
            opts.t_start,
            opts.t_start + span
        )));
    }
    let mut rng = path_rng(seed, stream);
    let amp = (opts.noise_variance / 2.0).sqrt();
    let samples = (0..opts.n_samples)
        .map(|k| {
            let s = traj.sample(opts.t_start + k as f64 / opts.sample_rate);
            let mut z = readout.expectation(&[s.alpha(), s.beta()]);
            if amp > 0.0 {
                let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                z += C64::new(amp * re, amp * im);
            }
            z
        })
        .collect();
    IQRecord::new(opts.sample_rate, samples)
}
