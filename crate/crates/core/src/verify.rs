//! Independent checks of computed solutions: finite-difference residuals,
//! the asymptotic claims of each scheme, derivative consistency, a
//! Runge-Kutta oracle, and the oscillation demonstration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coefficients::Nonlinearity;
use crate::criteria::{ProblemInstance, Scheme};
use crate::error::Result;
use crate::fixpoint::{ContractionCertificate, Operator, OperatorSpec, Solution, GATE_TOLERANCE};
use crate::funcspace::GridFunction;
use crate::ode::{Dopri5, Options, State};

/// Horizon of the flat-tolerance part of the RK comparison.
pub const RK_NEAR_HORIZON: f64 = 50.0;
pub const RK_TOLERANCE: f64 = 1e-6;
/// At least this many sign changes classify a trajectory as oscillatory.
pub const OSCILLATION_CROSSINGS: usize = 5;

/// A computed solution with the data needed to check it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub scheme: Scheme,
    pub instance: ProblemInstance,
    pub constants: BTreeMap<String, f64>,
    pub x: GridFunction,
    pub xprime: GridFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ContractionCertificate>,
}

impl SolutionProfile {
    pub fn from_solution(sol: &Solution, instance: &ProblemInstance) -> Self {
        Self {
            scheme: sol.scheme,
            instance: instance.clone(),
            constants: sol.constants.clone(),
            x: sol.solution.clone(),
            xprime: sol.derivative.clone(),
            certificate: Some(sol.certificate.clone()),
        }
    }

    fn f(&self, t: f64, x: f64) -> f64 {
        self.instance.nonlinearity.f(t, x)
    }
}

/// Finite-difference weights for the `m`-th derivative at `z` on the
/// stencil `x` (Fornberg's recursion).
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// Five-point derivative (order `m >= 1`) of node data at node `i`,
/// one-sided near the ends.
pub(crate) fn fd5(nodes: &[f64], values: &[f64], i: usize, m: usize) -> f64 {
    let n = nodes.len();
    let lo = i.saturating_sub(2).min(n.saturating_sub(5));
    let hi = (lo + 5).min(n);
    let w = fd_weights(nodes[i], &nodes[lo..hi], m);
    // the weights sum to zero, so differencing against the centre is exact for constants
    w.iter().zip(&values[lo..hi]).map(|(w, v)| w * (v - values[i])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub rms: f64,
    pub samples: usize,
    pub worst_t: f64,
}

/// `|x'' + f(t, x)|` with `x''` from centered five-point differences of the
/// node values, at about `sample_count` interior nodes.
pub fn residual(profile: &SolutionProfile, sample_count: usize) -> ResidualStats {
    let nodes = profile.x.nodes();
    let vals = profile.x.values();
    let n = nodes.len();
    let mut stats = ResidualStats {
        max: 0.0,
        rms: 0.0,
        samples: 0,
        worst_t: nodes[0],
    };
    if n < 5 {
        return stats;
    }
    let stride = ((n - 4) / sample_count.max(1)).max(1);
    let mut sq = 0.0;
    for i in (2..n - 2).step_by(stride) {
        let xpp = fd5(nodes, vals, i, 2);
        let r = (xpp + profile.f(nodes[i], vals[i])).abs();
        if r > stats.max || r.is_nan() {
            stats.max = r;
            stats.worst_t = nodes[i];
        }
        sq += r * r;
        stats.samples += 1;
    }
    stats.rms = (sq / stats.samples as f64).sqrt();
    stats
}

/// Largest gap between `xprime` and five-point differences of `x`.
pub fn check_derivative_consistency(profile: &SolutionProfile) -> f64 {
    let nodes = profile.x.nodes();
    let vals = profile.x.values();
    if nodes.len() < 5 {
        return f64::NAN;
    }
    (0..nodes.len())
        .map(|i| (fd5(nodes, vals, i, 1) - profile.xprime.eval(nodes[i])).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    pub name: String,
    pub passed: bool,
    /// worst violation for bounds, decade ratio for trends
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub checks: Vec<ProfileCheck>,
    pub passed: bool,
}

fn bound_check(name: &str, nodes: &[f64], vals: &[f64], bracket: &[(f64, f64)]) -> ProfileCheck {
    let mut worst: f64 = 0.0;
    for ((_, &v), &(lo, hi)) in nodes.iter().zip(vals).zip(bracket) {
        let tol = GATE_TOLERANCE * lo.abs().max(hi.abs()) + 1e-15;
        let excess = (lo - tol - v).max(v - hi - tol).max(0.0);
        worst = if excess.is_nan() { f64::NAN } else { worst.max(excess) };
    }
    ProfileCheck {
        name: name.into(),
        passed: worst == 0.0,
        value: worst,
    }
}

/// Finite-horizon stand-in for `g -> 0`: the maximum of `|g|` over the last
/// decade must be less than half its maximum over the decade before.
fn trend_check(name: &str, nodes: &[f64], g: impl Fn(usize) -> f64) -> ProfileCheck {
    let t_max = *nodes.last().unwrap();
    let r = (t_max / nodes[0]).sqrt().min(10.0);
    let mut last: f64 = 0.0;
    let mut prev: f64 = 0.0;
    for (i, &t) in nodes.iter().enumerate() {
        if t >= t_max / r {
            last = last.max(g(i).abs());
        } else if t >= t_max / (r * r) {
            prev = prev.max(g(i).abs());
        }
    }
    let ratio = if prev == 0.0 { 0.0 } else { last / prev };
    ProfileCheck {
        name: name.into(),
        passed: ratio < 0.5,
        value: ratio,
    }
}

/// The scheme's sandwich and decay claims at every node.
pub fn check_profiles(profile: &SolutionProfile) -> Result<ProfileReport> {
    let spec = OperatorSpec::forced(profile.scheme, profile.instance.clone())?;
    let op = Operator::new(spec.clone(), profile.x.nodes().to_vec())?;
    let nodes = profile.x.nodes();
    let x = profile.x.values();
    let xp: Vec<f64> = nodes.iter().map(|&t| profile.xprime.eval(t)).collect();
    let k = spec.constants();
    let mut checks = Vec::new();
    match profile.scheme {
        Scheme::BoundedLimit => {
            checks.push(bound_check("lower <= x <= limit", nodes, x, op.bracket()));
            checks.push(trend_check("t x' -> 0", nodes, |i| nodes[i] * xp[i]));
        }
        Scheme::DerivativeSpace => {
            let m = k["M"];
            checks.push(bound_check("0 <= x' <= beta", nodes, &xp, op.bracket()));
            let band = vec![(0.0, m); nodes.len()];
            checks.push(bound_check("0 <= x <= M", nodes, x, &band));
            checks.push(trend_check("M - x -> 0", nodes, |i| m - x[i]));
        }
        Scheme::LinearLike => {
            let (a, c_nu, nu) = (k["A"], k["c_nu"], k["nu"]);
            let x0 = [(k["x0"], k["x0"])];
            checks.push(bound_check("x(t0) = x0", &nodes[..1], &x[..1], &x0));
            checks.push(bound_check("A t <= x <= (A + c_nu) t", nodes, x, op.bracket()));
            if let Nonlinearity::EmdenFowler { lambda, q } = &profile.instance.nonlinearity {
                let stride = (nodes.len() / 400).max(1);
                let mut idx = Vec::new();
                let mut br = Vec::new();
                for i in (0..nodes.len()).step_by(stride) {
                    let w = q.weighted_tail(*lambda, nodes[i])?.value;
                    idx.push(i);
                    br.push((a.powf(*lambda) * w, (a + c_nu).powf(*lambda) * w));
                }
                let sub_t: Vec<f64> = idx.iter().map(|&i| nodes[i]).collect();
                let sub_v: Vec<f64> = idx.iter().map(|&i| xp[i] - a).collect();
                checks.push(bound_check("alpha <= x' - A <= beta", &sub_t, &sub_v, &br));
            }
            checks.push(trend_check("t^nu (x' - A) -> 0", nodes, |i| {
                nodes[i].powf(nu) * (xp[i] - a)
            }));
        }
        Scheme::WronskianWeighted => {
            let (a, b, eps) = (k["a"], k["b"], k["eps"]);
            let v: Vec<f64> = (0..nodes.len())
                .map(|i| xp[i] - (x[i] - b) / nodes[i])
                .collect();
            checks.push(bound_check(
                "alpha <= t^c ((x - b)/t - x') <= beta",
                nodes,
                &v,
                op.bracket(),
            ));
            let band: Vec<(f64, f64)> = nodes.iter().map(|&t| (a * t, (a + eps) * t)).collect();
            checks.push(bound_check("a t <= x <= (a + eps) t", nodes, x, &band));
        }
        Scheme::SandwichLinear => {
            let (c, d) = (k["c"], k["d"]);
            checks.push(bound_check("c t <= x <= (c + d) t", nodes, x, op.bracket()));
            let n = nodes.len();
            let mut worst = f64::INFINITY;
            for i in 1..n - 1 {
                worst = worst.min(x[i] / nodes[i] - xp[i]);
            }
            checks.push(ProfileCheck {
                name: "x' < x/t at interior nodes".into(),
                passed: worst > 0.0,
                value: worst,
            });
            let band = vec![(c - d, c + d); n];
            checks.push(bound_check("c - d <= x' <= c + d", nodes, &xp, &band));
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ProfileReport { checks, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RkReport {
    pub t_end: f64,
    pub rtol: f64,
    /// over all nodes up to `t_end`
    pub max_deviation: f64,
    /// over nodes up to the near horizon
    pub max_deviation_near: f64,
    /// largest deviation relative to the growth envelope
    pub envelope_ratio: f64,
    pub agrees: bool,
}

/// Integrates forward from the profile's initial data and compares with the
/// profile at its nodes up to `t_end` (default: the last node).
///
/// Errors in the initial data grow like `(1 + t - t0)` times the exponential
/// of `int (s - t0) L(s) ds`, `L` the Lipschitz modulus along the profile;
/// the deviation is judged against `RK_TOLERANCE` times that envelope.
pub fn rk_crosscheck(profile: &SolutionProfile, rtol: f64, t_end: Option<f64>) -> Result<RkReport> {
    let nl = &profile.instance.nonlinearity;
    let nodes = profile.x.nodes();
    let t0 = nodes[0];
    let t_end = t_end.unwrap_or(profile.x.t_max()).min(profile.x.t_max());
    let stops: Vec<f64> = nodes.iter().cloned().filter(|&t| t > t0 && t <= t_end).collect();
    let y0 = [profile.x.values()[0], profile.xprime.eval(t0)];
    let opts = Options {
        rtol,
        atol: 1e-3 * rtol,
        ..Options::default()
    };
    let ode = Dopri5::new(|t, y: State| [y[1], -nl.f(t, y[0])], opts);
    let ys = ode.integrate(t0, y0, &stops, |_, _, _, _| {})?;
    let mut report = RkReport {
        t_end,
        rtol,
        max_deviation: 0.0,
        max_deviation_near: 0.0,
        envelope_ratio: 0.0,
        agrees: true,
    };
    let mut growth = 0.0;
    let mut prev = (t0, 0.0);
    for (k, (&t, y)) in stops.iter().zip(&ys).enumerate() {
        let i = k + 1;
        let x = profile.x.values()[i];
        let g = (t - t0) * nl.lipschitz(t, x.abs());
        growth += 0.5 * (t - prev.0) * (g + prev.1);
        prev = (t, g);
        let dev = (y[0] - x).abs();
        report.max_deviation = report.max_deviation.max(dev);
        if t <= RK_NEAR_HORIZON {
            report.max_deviation_near = report.max_deviation_near.max(dev);
        }
        let env = RK_TOLERANCE * (1.0 + t - t0) * f64::exp(growth);
        report.envelope_ratio = report.envelope_ratio.max(dev / env);
    }
    report.agrees = report.max_deviation_near <= RK_TOLERANCE && report.envelope_ratio <= 1.0;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub t0: f64,
    pub t_end: f64,
    pub x0: f64,
    pub v0: f64,
    pub crossings: Vec<f64>,
    pub count: usize,
    pub oscillatory: bool,
    /// `(t, x, x')` at accepted steps
    #[serde(skip)]
    pub trajectory: Vec<[f64; 3]>,
}

/// Integrates from `(x0, v0)` at `t0` to `t_end` and locates the sign
/// changes of `x` to within `1e-8` by bisection with single steps.
pub fn oscillation_demo(
    nl: &Nonlinearity,
    t0: f64,
    t_end: f64,
    x0: f64,
    v0: f64,
) -> Result<OscillationReport> {
    let ode = Dopri5::new(|t, y: State| [y[1], -nl.f(t, y[0])], Options::default());
    let mut crossings = Vec::new();
    let mut trajectory = vec![[t0, x0, v0]];
    ode.integrate(t0, [x0, v0], &[t_end], |ta, ya, tb, yb| {
        trajectory.push([tb, yb[0], yb[1]]);
        if ya[0] == 0.0 || ya[0].signum() == yb[0].signum() {
            return;
        }
        if yb[0] == 0.0 {
            crossings.push(tb);
            return;
        }
        let (mut lo, mut hi, mut ylo) = (ta, tb, ya);
        while hi - lo > 1e-8 {
            let mid = 0.5 * (lo + hi);
            let (ym, _) = ode.step(lo, ylo, mid - lo);
            if ym[0].signum() == ylo[0].signum() {
                lo = mid;
                ylo = ym;
            } else {
                hi = mid;
            }
        }
        crossings.push(0.5 * (lo + hi));
    })?;
    let count = crossings.len();
    Ok(OscillationReport {
        t0,
        t_end,
        x0,
        v0,
        crossings,
        count,
        oscillatory: count >= OSCILLATION_CROSSINGS,
        trajectory,
    })
}

/// All checks of a solved profile, as embedded in solve reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub residual: ResidualStats,
    pub derivative_consistency: f64,
    pub profiles: ProfileReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rk: Option<RkReport>,
}

/// Bound on the pointwise residual and on the `x'` mismatch for a profile to
/// count as verified.
pub const RESIDUAL_LIMIT: f64 = 1e-6;

impl Verification {
    pub fn passed(&self) -> bool {
        self.profiles.passed
            && self.residual.max <= RESIDUAL_LIMIT
            && self.derivative_consistency <= RESIDUAL_LIMIT
            && self.rk.is_none_or(|r| r.agrees)
    }
}

pub fn verify_profile(profile: &SolutionProfile, rk_rtol: Option<f64>) -> Result<Verification> {
    Ok(Verification {
        residual: residual(profile, 2000),
        derivative_consistency: check_derivative_consistency(profile),
        profiles: check_profiles(profile)?,
        rk: rk_rtol.map(|r| rk_crosscheck(profile, r, None)).transpose()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_matches_uniform_stencil() {
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let want = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let w = fd_weights(1.0, &[1.0, 1.1, 1.3, 1.6, 2.0], 1);
        let d: f64 = w.iter().zip([1.0f64, 1.1, 1.3, 1.6, 2.0]).map(|(w, x)| w * x.powi(4)).sum();
        assert!((d - 4.0).abs() < 1e-10);
    }
}
