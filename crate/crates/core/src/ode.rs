//! Dormand-Prince 5(4) integration of `x'' = -f(t, x)` as a first-order
//! system, with step control and exact landing on requested output times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type State = [f64; 2];

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            max_steps: 5_000_000,
        }
    }
}

pub struct Dopri5<F> {
    rhs: F,
    opts: Options,
}

impl<F: Fn(f64, State) -> State> Dopri5<F> {
    pub fn new(rhs: F, opts: Options) -> Self {
        Self { rhs, opts }
    }

    /// One step of size `h`; returns the new state and the scaled error norm.
    pub fn step(&self, t: f64, y: State, h: f64) -> (State, f64) {
        let mut k = [[0.0; 2]; 7];
        k[0] = (self.rhs)(t, y);
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    ys[0] += h * a * kj[0];
                    ys[1] += h * a * kj[1];
                }
            }
            k[s] = (self.rhs)(t + C[s] * h, ys);
        }
        // the seventh stage is evaluated at the fifth-order solution
        let mut y1 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            y1[0] += h * A[6][j] * kj[0];
            y1[1] += h * A[6][j] * kj[1];
        }
        let mut acc = 0.0;
        for i in 0..2 {
            let err: f64 = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y1[i].abs());
            acc += (err / sc).powi(2);
        }
        (y1, (acc / 2.0).sqrt())
    }

    /// Integrates from `(t0, y0)` through the increasing output times
    /// `stops`, calling `on_step(t_a, y_a, t_b, y_b)` on every accepted step.
    pub fn integrate(
        &self,
        t0: f64,
        y0: State,
        stops: &[f64],
        mut on_step: impl FnMut(f64, State, f64, State),
    ) -> Result<Vec<State>> {
        let mut out = Vec::with_capacity(stops.len());
        let (mut t, mut y) = (t0, y0);
        let span = stops.last().map_or(0.0, |e| e - t0);
        let mut h = (1e-3 * (1.0 + t0.abs())).min(span.max(f64::MIN_POSITIVE));
        let mut steps = 0usize;
        for &target in stops {
            if target < t {
                return Err(Error::BadParam(format!(
                    "output times must increase: {target} after {t}"
                )));
            }
            while t < target {
                steps += 1;
                if steps > self.opts.max_steps {
                    return Err(Error::StepFailure(t));
                }
                let remaining = target - t;
                let clipped = h >= remaining;
                let h_try = if clipped { remaining } else { h };
                let (y1, err) = self.step(t, y, h_try);
                let err = if err.is_finite() && y1.iter().all(|v| v.is_finite()) {
                    err
                } else {
                    f64::INFINITY
                };
                if err <= 1.0 {
                    let t1 = if clipped { target } else { t + h_try };
                    on_step(t, y, t1, y1);
                    t = t1;
                    y = y1;
                    let fac = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h = if clipped { h.max(h_try * fac) } else { h_try * fac };
                } else {
                    let fac = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                    } else {
                        0.1
                    };
                    h = h_try * fac;
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::StepFailure(t));
                    }
                }
            }
            out.push(y);
        }
        Ok(out)
    }
}
