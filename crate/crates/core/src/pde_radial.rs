//! Radial sub/supersolutions for `Δu + f(x,u) + g(|x|) x·∇u = 0` on
//! `|x| > A` in dimension `n >= 3`, when `0 <= f(x,u) <= a(|x|) u` for
//! `u in [0, eps]`.
//!
//! With `|x| = beta(s) = (s/(n-2))^(1/(n-2))` and `u = h(s)/s`, the
//! supersolution comes from `h'' + q(s) h = 0` solved in the linear sandwich
//! scheme, and the subsolution from the explicit solution of
//! `h'' + k(s)(h' - h/s) = 0`.

use serde::{Deserialize, Serialize};

use crate::coefficients::{radial_beta, Coefficient, Nonlinearity, PullbackWeight};
use crate::criteria::{Params, ProblemInstance, Scheme};
use crate::error::{Error, Result};
use crate::fixpoint::{solve, ContractionCertificate, GridSpec, OperatorSpec, GATE_TOLERANCE};
use crate::funcspace::{GridFunction, Tail};
use crate::quadrature::{gauss5_points, GAUSS_WEIGHTS};
use crate::verify::{fd5, ProfileCheck};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialPdeInstance {
    /// space dimension
    pub n: u32,
    /// inner radius
    #[serde(rename = "A")]
    pub big_a: f64,
    /// bound `f(x,u) <= a(|x|) u`
    pub a: Coefficient,
    /// drift coefficient, possibly non-integrable
    pub g: Coefficient,
    pub eps: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub rho: f64,
    pub h0: f64,
    pub s0: f64,
}

/// `(s/(n-2))^(1/(n-2))`.
pub fn beta_map(n: u32, s: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::BadParam(format!("dimension must be at least 3, got {n}")));
    }
    if !(s > 0.0) {
        return Err(Error::BadParam(format!("s must be positive, got {s}")));
    }
    Ok(radial_beta(n, s))
}

/// Inverse of [`beta_map`]: `(n-2) r^(n-2)`.
pub fn beta_inverse(n: u32, r: f64) -> f64 {
    let m = f64::from(n - 2);
    m * r.powf(m)
}

impl RadialPdeInstance {
    /// Range checks on everything except `h0`, which only the subsolution uses.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParam(m));
        if self.n < 3 {
            return bad(format!("dimension must be at least 3, got {}", self.n));
        }
        if !(self.big_a > 0.0 && self.big_a.is_finite()) {
            return bad(format!("A must be positive, got {}", self.big_a));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.big_c > 0.0 && self.big_c < self.eps) {
            return bad(format!("C must lie in (0, eps = {}), got {}", self.eps, self.big_c));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho must lie in (0, 1), got {}", self.rho));
        }
        if !(self.s0 >= 1.0 && self.s0.is_finite()) {
            return bad(format!("s0 must be at least 1, got {}", self.s0));
        }
        let r0 = beta_map(self.n, self.s0)?;
        if !(r0 > self.big_a) {
            return bad(format!("beta(s0) = {r0} must exceed A = {}", self.big_a));
        }
        for (name, c) in [("a", &self.a), ("g", &self.g)] {
            if c.t_start() > r0 {
                return bad(format!(
                    "{name} must be defined from beta(s0) = {r0}, starts at {}",
                    c.t_start()
                ));
            }
        }
        self.a.weighted_tail(1.0, r0)?;
        Ok(())
    }

    pub fn check_h0(&self) -> Result<()> {
        let hi = self.s0 * self.rho * self.big_c;
        if self.h0 > 0.0 && self.h0 < hi {
            Ok(())
        } else {
            Err(Error::BadParam(format!(
                "h0 must lie in (0, s0 rho C = {hi}), got {}",
                self.h0
            )))
        }
    }

    /// `q(s) = beta beta' a(beta) / ((n-2) s)` on `[s0, +inf)`.
    pub fn potential(&self) -> Result<Coefficient> {
        Coefficient::pullback(&self.a, self.n, PullbackWeight::Potential, self.s0)
    }

    /// `k(s) = beta beta' g(beta)` on `[s0, +inf)`.
    pub fn drift(&self) -> Result<Coefficient> {
        Coefficient::pullback(&self.g, self.n, PullbackWeight::Drift, self.s0)
    }

    /// `(c, d) = (rho C, (1 - rho) C)`: then `c + d = C` and, as `h'`
    /// decreases to `c`, `rho C <= h'`.
    pub fn sandwich_params(&self) -> (f64, f64) {
        (self.rho * self.big_c, (1.0 - self.rho) * self.big_c)
    }

    /// The supersolution equation `h'' + q(s) h = 0` as a linear problem.
    pub fn supersolution_problem(&self) -> Result<ProblemInstance> {
        let (c, d) = self.sandwich_params();
        let params = Params {
            c: Some(c),
            d: Some(d),
            ..Params::default()
        };
        ProblemInstance::new(Nonlinearity::emden_fowler(1.0, self.potential()?)?, self.s0, params)
    }
}

pub fn transformed_q(inst: &RadialPdeInstance, s: f64) -> Result<f64> {
    inst.potential()?.eval(s)
}

pub fn drift_k(inst: &RadialPdeInstance, s: f64) -> Result<f64> {
    inst.drift()?.eval(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supersolution {
    pub h2: GridFunction,
    pub h2prime: GridFunction,
    pub certificate: ContractionCertificate,
    pub constants: std::collections::BTreeMap<String, f64>,
    pub checks: Vec<ProfileCheck>,
}

fn check(name: &str, worst: f64, passed: bool) -> ProfileCheck {
    ProfileCheck {
        name: name.into(),
        passed,
        value: worst,
    }
}

fn tol_of(v: f64) -> f64 {
    GATE_TOLERANCE * v.abs() + 1e-15
}

/// Solves for `h2` and checks `rho C <= h2' < h2/s <= C` at the nodes. The
/// middle inequality is strict at interior nodes unless `a` vanishes.
pub fn build_supersolution(
    inst: &RadialPdeInstance,
    grid: &GridSpec,
    tol: f64,
    max_iter: usize,
) -> Result<Supersolution> {
    inst.validate()?;
    let problem = inst.supersolution_problem()?;
    let spec = OperatorSpec::new(Scheme::SandwichLinear, problem)?;
    let sol = solve(&spec, grid, tol, max_iter)?;
    let nodes = sol.solution.nodes();
    let h = sol.solution.values();
    let hp: Vec<f64> = nodes.iter().map(|&s| sol.derivative.eval(s)).collect();
    let (rc, cc) = (inst.rho * inst.big_c, inst.big_c);

    let low = hp.iter().map(|&v| rc - tol_of(rc) - v).fold(0.0, f64::max);
    let high = nodes
        .iter()
        .zip(h)
        .map(|(&s, &v)| v / s - cc - tol_of(cc))
        .fold(0.0, f64::max);
    let zero_a = inst.potential()?.is_zero();
    let mut gap = f64::INFINITY;
    for i in 1..nodes.len() - 1 {
        gap = gap.min(h[i] / nodes[i] - hp[i]);
    }
    let strict_ok = if zero_a { gap >= -tol_of(cc) } else { gap > 0.0 };
    let checks = vec![
        check("rho C <= h2'", low, low == 0.0),
        check("h2' < h2/s at interior nodes", gap, strict_ok),
        check("h2/s <= C", high, high == 0.0),
    ];
    Ok(Supersolution {
        h2: sol.solution,
        h2prime: sol.derivative,
        certificate: sol.certificate,
        constants: sol.constants,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subsolution {
    pub h1: GridFunction,
    pub h1prime: GridFunction,
    /// max of `|h'' + k (h' - h/s)|` with five-point differences of `h1`
    pub residual: f64,
    pub checks: Vec<ProfileCheck>,
}

pub fn build_subsolution(inst: &RadialPdeInstance, nodes: &[f64]) -> Result<Subsolution> {
    inst.check_h0()?;
    build_subsolution_unchecked(inst, nodes)
}

/// `h1(s) = s (h0/s0 + int_{s0}^s H/τ² dτ)`, `H = -exp(-int_{s0}^τ k)`,
/// by five-point Gauss quadrature per cell, without the range check on `h0`.
pub fn build_subsolution_unchecked(inst: &RadialPdeInstance, nodes: &[f64]) -> Result<Subsolution> {
    inst.validate()?;
    if nodes.len() < 5 || nodes[0] != inst.s0 {
        return Err(Error::BadGrid(format!(
            "subsolution grid must start at s0 = {} with at least 5 nodes",
            inst.s0
        )));
    }
    let k = inst.drift()?;
    let n = nodes.len();
    // K(s_i) = int_{s0}^{s_i} k, I(s_i) = int_{s0}^{s_i} H/τ²
    let mut big_k = vec![0.0; n];
    let mut big_i = vec![0.0; n];
    for i in 0..n - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        big_k[i + 1] = big_k[i] + k.integral(0.0, a, b)?.value;
        let pts = gauss5_points(a, b);
        let mut cell = 0.0;
        for (j, &tau) in pts.iter().enumerate() {
            let kk = big_k[i] + k.integral(0.0, a, tau)?.value;
            cell += GAUSS_WEIGHTS[j] * -(-kk).exp() / (tau * tau);
        }
        big_i[i + 1] = big_i[i] + 0.5 * (b - a) * cell;
    }
    let ratio0 = inst.h0 / inst.s0;
    let mut h = Vec::with_capacity(n);
    let mut hp = Vec::with_capacity(n);
    let mut hpp = Vec::with_capacity(n);
    for i in 0..n {
        let s = nodes[i];
        let hh = -(-big_k[i]).exp();
        let v = s * (ratio0 + big_i[i]);
        // h' = h/s + H/s and h'' = H'/s = -k H/s
        h.push(v);
        hp.push(v / s + hh / s);
        hpp.push(-k.at(s) * hh / s);
    }
    let last = n - 1;
    let h1 = GridFunction::with_slopes(
        nodes.to_vec(),
        h.clone(),
        hp.clone(),
        Tail::fit_linear(hp[last], nodes[last], h[last]),
    )?;
    let h1prime = GridFunction::with_slopes(
        nodes.to_vec(),
        hp.clone(),
        hpp,
        Tail::Constant { value: hp[last] },
    )?;

    let mut residual: f64 = 0.0;
    for i in 2..n - 2 {
        let d1 = fd5(nodes, &h, i, 1);
        let d2 = fd5(nodes, &h, i, 2);
        residual = residual.max((d2 + k.at(nodes[i]) * (d1 - h[i] / nodes[i])).abs());
    }
    let lo = (inst.h0 - 1.0) / inst.s0;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let u = h[i] / nodes[i];
        worst = worst.max(lo - tol_of(lo) - u).max(u - ratio0 - tol_of(ratio0));
    }
    let checks = vec![check("(h0 - 1)/s0 <= h1/s <= h0/s0", worst, worst == 0.0)];
    Ok(Subsolution {
        h1,
        h1prime,
        residual,
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub r: f64,
    pub u1: f64,
    pub u2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPdeProfile {
    /// `(h0 - 1)/s0`
    pub lower: f64,
    /// `C`
    pub upper: f64,
    pub samples: Vec<RadialSample>,
    pub checks: Vec<ProfileCheck>,
}

/// Checks `h1 <= h2` node-wise and samples `u_i(r) = h_i(s)/s` at
/// `sample_count` log-spaced radii over `[beta(s0), beta(T_max)]`.
pub fn assemble_sandwich(
    inst: &RadialPdeInstance,
    h1: &GridFunction,
    h2: &GridFunction,
    sample_count: usize,
) -> Result<RadialPdeProfile> {
    if h1.nodes() != h2.nodes() {
        return Err(Error::GridMismatch);
    }
    let nodes = h1.nodes();
    for (i, &s) in nodes.iter().enumerate() {
        let (lower, upper) = (h1.values()[i] / s, h2.values()[i] / s);
        if lower > upper + 1e-12 * upper.abs() {
            return Err(Error::OrderingViolated { index: i, s, lower, upper });
        }
    }
    let r0 = beta_map(inst.n, nodes[0])?;
    let r1 = beta_map(inst.n, h1.t_max())?;
    let m = sample_count.max(2);
    let samples: Vec<RadialSample> = (0..m)
        .map(|j| {
            let r = if j == m - 1 {
                r1
            } else {
                r0 * (r1 / r0).powf(j as f64 / (m - 1) as f64)
            };
            let s = beta_inverse(inst.n, r).clamp(nodes[0], h1.t_max());
            RadialSample {
                r,
                u1: h1.eval(s) / s,
                u2: h2.eval(s) / s,
            }
        })
        .collect();
    let lower = (inst.h0 - 1.0) / inst.s0;
    let upper = inst.big_c;
    let below = samples.iter().map(|p| lower - tol_of(lower) - p.u1).fold(0.0, f64::max);
    let above = samples.iter().map(|p| p.u2 - upper - tol_of(upper)).fold(0.0, f64::max);
    let crossed = samples.iter().map(|p| p.u1 - p.u2).fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        check("u1 <= u2 at sampled r", crossed, crossed <= 1e-12),
        check("(h0 - 1)/s0 <= u1", below, below == 0.0),
        check("u2 <= C", above, above == 0.0),
    ];
    Ok(RadialPdeProfile {
        lower,
        upper,
        samples,
        checks,
    })
}

/// The whole construction, as emitted by the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPdeReport {
    pub instance: RadialPdeInstance,
    pub supersolution: Supersolution,
    pub subsolution: Subsolution,
    pub profile: RadialPdeProfile,
    pub passed: bool,
}

pub const H1_RESIDUAL_LIMIT: f64 = 1e-6;

pub fn run(
    inst: &RadialPdeInstance,
    grid: &GridSpec,
    tol: f64,
    max_iter: usize,
    sample_count: usize,
) -> Result<RadialPdeReport> {
    inst.validate()?;
    inst.check_h0()?;
    let sup = build_supersolution(inst, grid, tol, max_iter)?;
    let sub = build_subsolution(inst, sup.h2.nodes())?;
    let profile = assemble_sandwich(inst, &sub.h1, &sup.h2, sample_count)?;
    let passed = sup.checks.iter().chain(&sub.checks).chain(&profile.checks).all(|c| c.passed)
        && sub.residual <= H1_RESIDUAL_LIMIT;
    Ok(RadialPdeReport {
        instance: inst.clone(),
        supersolution: sup,
        subsolution: sub,
        profile,
        passed,
    })
}
