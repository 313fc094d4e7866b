//! Fixed-step RK4 and adaptive Dormand–Prince 5(4) with dense output.

use serde::{Deserialize, Serialize};

use super::{rhs, MeanFieldModel, StateQuad};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
    /// Dormand–Prince 5(4), sampled on the output grid by dense output.
    AdaptiveRk45 {
        atol: f64,
        rtol: f64,
    },
}

impl Method {
    /// Adaptive method with the default tolerances (1e−10 absolute, 1e−8 relative).
    pub fn adaptive() -> Self {
        Method::AdaptiveRk45 { atol: 1e-10, rtol: 1e-8 }
    }
}

/// States sampled on a uniform time grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<StateQuad>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> Option<StateQuad> {
        self.states.last().copied()
    }

    /// Linear interpolation at `t`; clamps outside the covered span.
    pub fn sample(&self, t: f64) -> StateQuad {
        let n = self.t.len();
        if n == 0 {
            return StateQuad::default();
        }
        if t <= self.t[0] {
            return self.states[0];
        }
        if t >= self.t[n - 1] {
            return self.states[n - 1];
        }
        let k = self.t.partition_point(|&x| x <= t).max(1) - 1;
        let w = (t - self.t[k]) / (self.t[k + 1] - self.t[k]);
        let (a, b) = (self.states[k].to_array(), self.states[k + 1].to_array());
        StateQuad::from_array(std::array::from_fn(|i| a[i] + w * (b[i] - a[i])))
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// One classical Runge–Kutta step.
pub fn rk4_step<const N: usize>(f: &impl Fn(f64, &[f64; N]) -> [f64; N], t: f64, y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = f(t, y);
    let k2 = f(t + h / 2.0, &axpy(y, h / 2.0, &[(1.0, &k1)]));
    let k3 = f(t + h / 2.0, &axpy(y, h / 2.0, &[(1.0, &k2)]));
    let k4 = f(t + h, &axpy(y, h, &[(1.0, &k3)]));
    axpy(y, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)])
}

fn output_grid(t0: f64, t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    if !(t_end >= t0) {
        return Err(invalid("t_end", format!("must not precede the start time, got {t_end}")));
    }
    let n = ((t_end - t0) / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| t0 + k as f64 * dt).collect())
}

/// Fixed-step RK4 from `t0` to `t_end`; returns samples every `dt`.
pub fn rk4<const N: usize>(f: impl Fn(f64, &[f64; N]) -> [f64; N], y0: [f64; N], t0: f64, t_end: f64, dt: f64) -> Result<(Vec<f64>, Vec<[f64; N]>)> {
    let t = output_grid(t0, t_end, dt)?;
    let mut ys = Vec::with_capacity(t.len());
    let mut y = y0;
    ys.push(y);
    for w in t.windows(2) {
        y = rk4_step(&f, w[0], &y, w[1] - w[0]);
        ys.push(y);
    }
    Ok((t, ys))
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Adaptive Dormand–Prince 5(4) from `t0` to `t_end`, sampled every `dt`
/// with the fourth-order continuous extension between accepted steps.
pub fn dopri45<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    t0: f64,
    t_end: f64,
    dt: f64,
    atol: f64,
    rtol: f64,
) -> Result<(Vec<f64>, Vec<[f64; N]>)> {
    let grid = output_grid(t0, t_end, dt)?;
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    let mut next = 1;
    let (mut t, mut y) = (t0, y0);
    let mut k1 = f(t, &y);
    let mut h = dt.min((t_end - t0).max(dt));
    while next < grid.len() {
        if t + h > t_end {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(dt) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let k2 = f(t + h / 5.0, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + 0.3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + 0.8 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + 8.0 / 9.0 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);
        let err_vec = axpy(&[0.0; N], h, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
        let err = (err_vec
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / N as f64)
            .sqrt();
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            let t_new = t + h;
            if next < grid.len() && grid[next] <= t_new + 1e-12 * dt {
                let r2: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
                let r3: [f64; N] = std::array::from_fn(|i| h * k1[i] - r2[i]);
                let r4: [f64; N] = std::array::from_fn(|i| r2[i] - h * k7[i] - r3[i]);
                let r5 = axpy(&[0.0; N], h, &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)]);
                while next < grid.len() && grid[next] <= t_new + 1e-12 * dt {
                    let th = ((grid[next] - t) / h).clamp(0.0, 1.0);
                    let th1 = 1.0 - th;
                    out.push(std::array::from_fn(|i| y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])))));
                    next += 1;
                }
            }
            t = t_new;
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok((grid, out))
}

/// Integrates the mean-field equations from `s0` at `t = 0` to `t_end`,
/// returning states every `dt`.
pub fn integrate(model: &MeanFieldModel, s0: StateQuad, t_end: f64, dt: f64, method: Method) -> Result<Trajectory> {
    let f = |_t: f64, y: &[f64; 4]| rhs(model, &StateQuad::from_array(*y)).to_array();
    let (t, ys) = match method {
        Method::Rk4 => rk4(f, s0.to_array(), 0.0, t_end, dt)?,
        Method::AdaptiveRk45 { atol, rtol } => dopri45(f, s0.to_array(), 0.0, t_end, dt, atol, rtol)?,
    };
    Ok(Trajectory { t, states: ys.into_iter().map(StateQuad::from_array).collect() })
}
