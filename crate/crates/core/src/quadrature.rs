//! Fixed Gauss-Legendre rules for mesh cells, adaptive Gauss-Kronrod for
//! finite intervals, and envelope-truncated integration of power-law tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Five-point Gauss-Legendre abscissae on [-1, 1].
pub const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];

pub const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Applies the five-point rule to `f` on `[a, b]`.
pub fn gauss5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GAUSS_NODES
        .iter()
        .zip(GAUSS_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Maps the reference Gauss nodes into `[a, b]`.
pub fn gauss5_points(a: f64, b: f64) -> [f64; 5] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GAUSS_NODES.map(|x| mid + half * x)
}

/// Relative and absolute targets for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadTolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-14,
        }
    }
}

/// A quadrature value with a bound on its error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn scale(self, s: f64) -> Self {
        Self {
            value: self.value * s,
            error: self.error * s.abs(),
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value - rhs.value,
            error: self.error + rhs.error,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

// QUADPACK qk15 error heuristic
fn qk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    resasc *= half.abs();
    resabs *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_PIECES: usize = 4000;

/// Globally adaptive Gauss-Kronrod (7/15) integration on a finite interval.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: QuadTolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::default());
    }
    let (value, error) = qk15(&f, a, b);
    if !value.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= MAX_PIECES {
            return Err(Error::QuadratureFailure(format!(
                "subdivision limit on [{a}, {b}], error {total_err:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure(format!(
                "interval collapsed near {mid}"
            )));
        }
        let (v1, e1) = qk15(&f, worst.a, mid);
        let (v2, e2) = qk15(&f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand near {mid}"
            )));
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed accumulated cancellation in the running totals
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Estimate { value, error })
}

/// Integrates on `[a, b]`, `0 < a < b`, in the variable `ln s`.
///
/// Power laws become exponentials, which Gauss-Kronrod handles over many
/// decades with a handful of panels.
pub fn integrate_log(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: QuadTolerance,
) -> Result<Estimate> {
    if !(a > 0.0 && b >= a) {
        return Err(Error::BadParam(format!(
            "log-scale quadrature needs 0 < a <= b, got [{a}, {b}]"
        )));
    }
    integrate(
        |x| {
            let s = x.exp();
            f(s) * s
        },
        a.ln(),
        b.ln(),
        tol,
    )
}

/// Integrates `f` over `[t, +inf)` given `|f(s)| <= scale * s^(-exponent)`.
///
/// The range is swept decade by decade; the sweep stops once the envelope
/// bound on the remainder falls below half the tolerance, and that bound is
/// added to the reported error.
pub fn improper_tail(
    f: impl Fn(f64) -> f64,
    t: f64,
    scale: f64,
    exponent: f64,
    tol: QuadTolerance,
) -> Result<Estimate> {
    if scale == 0.0 {
        return Ok(Estimate::default());
    }
    if !(exponent > 1.0) {
        return Err(Error::DivergentTail {
            weight: 0.0,
            exponent,
        });
    }
    if !(t > 0.0) {
        return Err(Error::BadParam(format!("tail start must be positive, got {t}")));
    }
    let remainder = |b: f64| scale * b.powf(1.0 - exponent) / (exponent - 1.0);
    let mut acc = Estimate::default();
    let mut a = t;
    loop {
        let b = a * 10.0;
        if !b.is_finite() || b > 1e300 {
            return Err(Error::QuadratureFailure(format!(
                "envelope remainder {:e} still above tolerance at s = {a:e}",
                remainder(a)
            )));
        }
        let seg_tol = QuadTolerance {
            rel: tol.rel,
            abs: 0.1 * tol.abs,
        };
        acc = acc + integrate_log(&f, a, b, seg_tol)?;
        let bound = remainder(b);
        if bound <= 0.5 * tol.abs.max(tol.rel * acc.value.abs()) {
            acc.error += bound;
            return Ok(acc);
        }
        a = b;
    }
}
