//! Grid functions on graded meshes over `[t0, T_max]` with analytic tails,
//! and the metrics under which the integral operators contract.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp;
use crate::io::fmt_f64;
use crate::quadrature::{self, gauss5, Estimate, QuadTolerance};

/// Default cap on the ratio of consecutive nodes.
pub const MAX_GRADING_RATIO: f64 = 1.25;

/// Relative tolerance for the tail to meet the last node value.
pub const STITCH_TOLERANCE: f64 = 1e-9;

/// Geometric mesh `t0 * r^i`, `i = 0..=n`, with `r = (T_max/t0)^(1/n)`.
pub fn make_grid(t0: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t0 >= 1.0 && t0.is_finite()) {
        return Err(Error::BadGrid(format!("t0 must be >= 1, got {t0}")));
    }
    if !(t_max > t0 && t_max.is_finite()) {
        return Err(Error::BadGrid(format!("T_max = {t_max} must exceed t0 = {t0}")));
    }
    if n == 0 {
        return Err(Error::BadGrid("need at least one cell".into()));
    }
    let r = (t_max / t0).powf(1.0 / n as f64);
    let mut nodes: Vec<f64> = (0..=n).map(|i| t0 * r.powi(i as i32)).collect();
    nodes[n] = t_max;
    for w in nodes.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::BadGrid(format!(
                "mesh too fine to resolve: {} cells on [{t0}, {t_max}]",
                n
            )));
        }
    }
    Ok(nodes)
}

/// Largest ratio of consecutive nodes.
pub fn grading_ratio(nodes: &[f64]) -> f64 {
    nodes.windows(2).map(|w| w[1] / w[0]).fold(1.0, f64::max)
}

/// Analytic model of a grid function beyond its last node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tail {
    Zero,
    Constant { value: f64 },
    /// `limit + coef * t^(-exponent)`
    PowerCorrection { limit: f64, coef: f64, exponent: f64 },
    /// `slope * t + intercept`
    LinearAffine { slope: f64, intercept: f64 },
}

impl Tail {
    /// The tail as a sum of power terms `(coefficient, power)`.
    pub fn terms(&self) -> Vec<(f64, f64)> {
        match *self {
            Tail::Zero => vec![],
            Tail::Constant { value } => vec![(value, 0.0)],
            Tail::PowerCorrection {
                limit,
                coef,
                exponent,
            } => vec![(limit, 0.0), (coef, -exponent)],
            Tail::LinearAffine { slope, intercept } => vec![(slope, 1.0), (intercept, 0.0)],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms().iter().map(|(c, e)| power_term(*c, *e, t)).sum()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.terms()
            .iter()
            .map(|(c, e)| power_term(c * e, e - 1.0, t))
            .sum()
    }

    /// `int_t^inf s^w tail(s) ds` in closed form.
    pub fn integral_from(&self, w: f64, t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (c, e) in self.terms() {
            if c == 0.0 {
                continue;
            }
            let p = w + e;
            if p >= -1.0 {
                return Err(Error::DivergentTail {
                    weight: w,
                    exponent: -e,
                });
            }
            acc += c * t.powf(p + 1.0) / -(p + 1.0);
        }
        Ok(acc)
    }

    /// The tail of the derivative.
    pub fn derivative_tail(&self) -> Tail {
        match *self {
            Tail::Zero | Tail::Constant { .. } => Tail::Zero,
            Tail::PowerCorrection { coef, exponent, .. } => Tail::PowerCorrection {
                limit: 0.0,
                coef: -coef * exponent,
                exponent: exponent + 1.0,
            },
            Tail::LinearAffine { slope, .. } => Tail::Constant { value: slope },
        }
    }

    /// A power-correction tail through `(t_max, value)` with given limit and
    /// decay exponent.
    pub fn fit_power(limit: f64, exponent: f64, t_max: f64, value: f64) -> Tail {
        let coef = (value - limit) * t_max.powf(exponent);
        if coef == 0.0 && limit == 0.0 {
            Tail::Zero
        } else {
            Tail::PowerCorrection {
                limit,
                coef,
                exponent,
            }
        }
    }

    /// A linear tail with given slope through `(t_max, value)`.
    pub fn fit_linear(slope: f64, t_max: f64, value: f64) -> Tail {
        Tail::LinearAffine {
            slope,
            intercept: value - slope * t_max,
        }
    }
}

fn power_term(c: f64, e: f64, t: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if e == 0.0 {
        c
    } else {
        c * t.powf(e)
    }
}

/// Merges two term lists into the terms of `a - b`.
fn difference_terms(a: &Tail, b: &Tail) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut add = |c: f64, e: f64| {
        if let Some(slot) = out.iter_mut().find(|(_, pe)| *pe == e) {
            slot.0 += c;
        } else {
            out.push((c, e));
        }
    };
    for (c, e) in a.terms() {
        add(c, e);
    }
    for (c, e) in b.terms() {
        add(-c, e);
    }
    out.retain(|(c, _)| *c != 0.0);
    out
}

/// `sup_{t >= t_max} |sum c t^e|`, sampled over twelve decades plus the limit.
fn tail_sup(terms: &[(f64, f64)], t_max: f64) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    if terms.iter().any(|(_, e)| *e > 0.0) {
        return f64::INFINITY;
    }
    let limit: f64 = terms.iter().filter(|(_, e)| *e == 0.0).map(|(c, _)| c).sum();
    let mut best = limit.abs();
    let samples = 240;
    for i in 0..=samples {
        let t = t_max * (12.0 * std::f64::consts::LN_10 * i as f64 / samples as f64).exp();
        let v: f64 = terms.iter().map(|(c, e)| power_term(*c, *e, t)).sum();
        best = best.max(v.abs());
    }
    best
}

/// `int_{t_max}^inf |sum c t^e| dt`.
fn tail_l1(terms: &[(f64, f64)], t_max: f64) -> Result<f64> {
    if terms.is_empty() {
        return Ok(0.0);
    }
    let e_max = terms.iter().map(|(_, e)| *e).fold(f64::NEG_INFINITY, f64::max);
    if e_max >= -1.0 {
        return Ok(f64::INFINITY);
    }
    if terms.len() == 1 {
        let (c, e) = terms[0];
        return Ok(c.abs() * t_max.powf(e + 1.0) / -(e + 1.0));
    }
    let scale: f64 = terms
        .iter()
        .map(|(c, e)| c.abs() * t_max.powf(e - e_max))
        .sum();
    let est = quadrature::improper_tail(
        |t| terms.iter().map(|(c, e)| power_term(*c, *e, t)).sum::<f64>().abs(),
        t_max,
        scale,
        -e_max,
        QuadTolerance::default(),
    )?;
    Ok(est.value + est.error)
}

fn check_samples(nodes: &[f64], values: &[f64]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::BadGrid("a grid function needs at least two nodes".into()));
    }
    if nodes.len() != values.len() {
        return Err(Error::BadGrid(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.iter().all(|t| t.is_finite()) {
        return Err(Error::BadGrid("nodes must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// A function sampled on a mesh, interpolated by monotone cubics between
/// nodes and continued by an analytic tail beyond the last node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord", into = "GridRecord")]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    tail: Tail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRecord {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// node derivatives; monotone cubic slopes are rebuilt when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<f64>>,
    pub tail: Tail,
}

impl TryFrom<GridRecord> for GridFunction {
    type Error = Error;
    fn try_from(r: GridRecord) -> Result<Self> {
        match r.slopes {
            Some(m) => GridFunction::with_slopes(r.nodes, r.values, m, r.tail),
            None => GridFunction::new(r.nodes, r.values, r.tail),
        }
    }
}

impl From<GridFunction> for GridRecord {
    fn from(g: GridFunction) -> Self {
        GridRecord {
            nodes: g.nodes,
            values: g.values,
            slopes: Some(g.slopes),
            tail: g.tail,
        }
    }
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, tail: Tail) -> Result<Self> {
        check_samples(&nodes, &values)?;
        let slopes = interp::pchip_slopes(&nodes, &values);
        Ok(Self {
            nodes,
            values,
            slopes,
            tail,
        })
    }

    /// Cubic Hermite interpolation with known node derivatives.
    pub fn with_slopes(nodes: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>, tail: Tail) -> Result<Self> {
        check_samples(&nodes, &values)?;
        if slopes.len() != nodes.len() {
            return Err(Error::BadGrid(format!(
                "{} nodes but {} slopes",
                nodes.len(),
                slopes.len()
            )));
        }
        Ok(Self {
            nodes,
            values,
            slopes,
            tail,
        })
    }


    pub fn from_fn(nodes: &[f64], f: impl Fn(f64) -> f64, tail: Tail) -> Result<Self> {
        let values = nodes.iter().map(|&t| f(t)).collect();
        Self::new(nodes.to_vec(), values, tail)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn t_start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().expect("at least two nodes")
    }

    pub fn last_value(&self) -> f64 {
        *self.values.last().expect("at least two nodes")
    }

    /// Index `i` of the cell `[n_i, n_{i+1}]` containing `t` (clamped).
    pub fn cell_of(&self, t: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Interpolant on cell `i` at `t`.
    pub fn eval_in_cell(&self, i: usize, t: f64) -> f64 {
        let h = self.nodes[i + 1] - self.nodes[i];
        let s = (t - self.nodes[i]) / h;
        interp::hermite(
            self.values[i],
            self.values[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
            h,
            s,
        )
    }

    /// Value at `t`; the first value is used left of the mesh.
    pub fn eval(&self, t: f64) -> f64 {
        if t > self.t_max() {
            return self.tail.eval(t);
        }
        if t <= self.nodes[0] {
            return self.values[0];
        }
        self.eval_in_cell(self.cell_of(t), t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t > self.t_max() {
            return self.tail.derivative(t);
        }
        let i = self.cell_of(t.max(self.nodes[0]));
        let h = self.nodes[i + 1] - self.nodes[i];
        let s = (t.max(self.nodes[0]) - self.nodes[i]) / h;
        interp::hermite_derivative(
            self.values[i],
            self.values[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
            h,
            s,
        )
    }

    /// Relative mismatch between the tail and the last node value.
    pub fn stitch_gap(&self) -> f64 {
        let v = self.last_value();
        (self.tail.eval(self.t_max()) - v).abs() / v.abs().max(1e-12)
    }

    pub fn is_stitched(&self) -> bool {
        self.stitch_gap() <= STITCH_TOLERANCE
    }

    /// Writes `t,value` rows.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in self.nodes.iter().zip(self.values.iter()) {
            writeln!(w, "{},{}", fmt_f64(*t), fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Distances on candidate functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Metric {
    /// `sup |f - g|`
    Sup,
    /// `sup t^exponent |f - g|`
    WeightedSup { exponent: f64 },
    /// `int |f - g| + zeta sup |f - g|`
    L1PlusZetaSup { zeta: f64 },
}

/// Metric distance over the nodes plus the tail discrepancy.
///
/// The `L1` part uses the trapezoid rule over the nodes.
pub fn distance(m: &Metric, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if f.nodes != g.nodes {
        return Err(Error::GridMismatch);
    }
    let t_max = f.t_max();
    let diff = difference_terms(&f.tail, &g.tail);
    let d: Vec<f64> = f
        .values
        .iter()
        .zip(g.values.iter())
        .map(|(a, b)| (a - b).abs())
        .collect();
    match *m {
        Metric::Sup => Ok(d.iter().cloned().fold(0.0, f64::max).max(tail_sup(&diff, t_max))),
        Metric::WeightedSup { exponent } => {
            let nodes = d
                .iter()
                .zip(f.nodes.iter())
                .map(|(x, t)| x * t.powf(exponent))
                .fold(0.0, f64::max);
            let weighted: Vec<(f64, f64)> = diff.iter().map(|(c, e)| (*c, e + exponent)).collect();
            Ok(nodes.max(tail_sup(&weighted, t_max)))
        }
        Metric::L1PlusZetaSup { zeta } => {
            if !(zeta > 0.0) {
                return Err(Error::BadParam(format!("zeta must be positive, got {zeta}")));
            }
            let l1: f64 = f
                .nodes
                .windows(2)
                .zip(d.windows(2))
                .map(|(t, x)| 0.5 * (t[1] - t[0]) * (x[0] + x[1]))
                .sum::<f64>()
                + tail_l1(&diff, t_max)?;
            let sup = d.iter().cloned().fold(0.0, f64::max).max(tail_sup(&diff, t_max));
            Ok(l1 + zeta * sup)
        }
    }
}

/// `int_T^inf t^w f(t) dt`: five-point Gauss on the interpolant over the
/// mesh part plus the closed-form integral of the tail model.
///
/// The reported error is the cellwise gap between Gauss and trapezoid sums,
/// a conservative estimate for smooth data.
pub fn integrate_tail_of(f: &GridFunction, weight_exponent: f64, t: f64) -> Result<Estimate> {
    let t_max = f.t_max();
    let w = weight_exponent;
    let mut est = Estimate::exact(f.tail.integral_from(w, t.max(t_max))?);
    if t >= t_max {
        return Ok(est);
    }
    let start = t.max(f.t_start());
    let first = f.cell_of(start);
    for i in first..f.nodes.len() - 1 {
        let a = if i == first { start } else { f.nodes[i] };
        let b = f.nodes[i + 1];
        let g = |s: f64| s.powf(w) * f.eval_in_cell(i, s);
        let gauss = gauss5(g, a, b);
        let trap = 0.5 * (b - a) * (g(a) + g(b));
        est.value += gauss;
        est.error += (gauss - trap).abs();
    }
    Ok(est)
}
