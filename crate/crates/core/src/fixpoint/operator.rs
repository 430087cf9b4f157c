use crate::coefficients::{signed_pow, Coefficient, Envelope, Nonlinearity};
use crate::criteria::Scheme;
use crate::error::{Error, Result};
use crate::funcspace::{GridFunction, Tail};
use crate::interp::{hermite_integral, hermite_partial_integral};
use crate::quadrature::{gauss5, improper_tail, QuadTolerance};

use super::mesh::Mesh;
use super::{OperatorSpec, Setup, GATE_TOLERANCE};

const TAIL_REL_TOL: f64 = 1e-12;

/// One operator application: the new iterate together with the solution
/// and its derivative reconstructed from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub iterate: GridFunction,
    pub x: GridFunction,
    pub xprime: GridFunction,
}

/// A scheme's integral operator discretized on a fixed mesh.
///
/// The coefficient is cached at the nodes and at the Gauss points of every
/// cell; iterates are cubic Hermite interpolants whose node slopes are the
/// exact derivatives of the operator output.
#[derive(Debug, Clone)]
pub struct Operator {
    spec: OperatorSpec,
    mesh: Mesh,
    coef_nodes: Vec<f64>,
    coef_pts: Vec<[f64; 5]>,
    env: Envelope,
    bracket: Vec<(f64, f64)>,
}

fn coefficient(nl: &Nonlinearity) -> &Coefficient {
    match nl {
        Nonlinearity::EmdenFowler { q, .. } => q,
        Nonlinearity::GeneralLipschitz { k, .. } => k,
    }
}

impl Operator {
    pub fn new(spec: OperatorSpec, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::BadGrid("operator mesh must be strictly increasing".into()));
        }
        let t0 = spec.instance.t0;
        if (nodes[0] - t0).abs() > 1e-12 * t0.abs().max(1.0) {
            return Err(Error::BadGrid(format!(
                "mesh starts at {} but t0 = {t0}",
                nodes[0]
            )));
        }
        let mesh = Mesh::new(nodes);
        let coef = coefficient(&spec.instance.nonlinearity);
        let coef_nodes = mesh.nodes.iter().map(|&t| coef.at(t)).collect();
        let coef_pts = mesh.map(|_, _, s| coef.at(s));
        let env = coef.envelope();
        let mut op = Self {
            spec,
            mesh,
            coef_nodes,
            coef_pts,
            env,
            bracket: vec![],
        };
        op.bracket = op.build_bracket()?;
        Ok(op)
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[f64] {
        &self.mesh.nodes
    }

    /// Node-wise bounds of the candidate set used by the gate.
    pub fn bracket(&self) -> &[(f64, f64)] {
        &self.bracket
    }

    fn lambda(&self) -> Option<f64> {
        self.spec.instance.nonlinearity.lambda()
    }

    fn build_bracket(&self) -> Result<Vec<(f64, f64)>> {
        let nodes = &self.mesh.nodes;
        let tmax = self.mesh.t_max();
        Ok(match self.spec.setup {
            Setup::Bounded { limit, lower } => vec![(lower, limit); nodes.len()],
            Setup::Derivative { m, .. } => {
                let coef = coefficient(&self.spec.instance.nonlinearity);
                let factor = self.lambda().map_or(m, |l| m.powf(l));
                let b = self.mesh.backward(&self.coef_pts);
                let tol = QuadTolerance {
                    rel: TAIL_REL_TOL,
                    abs: 0.0,
                };
                let tail = coef.weighted_tail_with(0.0, tmax, tol)?.value;
                b.iter().map(|v| (0.0, factor * (v + tail))).collect()
            }
            Setup::LinearLike { a, c_nu, .. } => {
                nodes.iter().map(|&t| (a * t, (a + c_nu) * t)).collect()
            }
            Setup::Wronskian { a, c, eps, .. } => {
                let l = self.lambda().unwrap_or(1.0);
                let g = self.mesh.map(|i, j, s| s.powf(l + c) * self.coef_pts[i][j]);
                let fwd = self.mesh.forward(&g);
                let factor = (a + eps).powf(l);
                nodes
                    .iter()
                    .zip(fwd.iter())
                    .map(|(&t, v)| (-factor * t.powf(-c) * v, 0.0))
                    .collect()
            }
            Setup::Sandwich { c, d } => nodes.iter().map(|&t| (c * t, (c + d) * t)).collect(),
        })
    }

    /// Range of the solution value at `s` used for clamping.
    fn x_range(&self, s: f64) -> (f64, f64) {
        match self.spec.setup {
            Setup::Bounded { limit, lower } => (lower, limit),
            Setup::Derivative { m, .. } => (0.0, m),
            Setup::LinearLike { a, c_nu, .. } => (a * s, (a + c_nu) * s),
            Setup::Wronskian { a, eps, .. } => (a * s, (a + eps) * s),
            Setup::Sandwich { c, d } => (c * s, (c + d) * s),
        }
    }

    /// `|x(s)| <= X s^e` on the candidate set.
    fn x_bound(&self) -> (f64, f64) {
        match self.spec.setup {
            Setup::Bounded { limit, lower } => (limit.abs().max(lower.abs()), 0.0),
            Setup::Derivative { m, .. } => (m, 0.0),
            Setup::LinearLike { a, c_nu, .. } => (a + c_nu, 1.0),
            Setup::Wronskian { a, eps, .. } => (a + eps, 1.0),
            Setup::Sandwich { c, d } => (c + d, 1.0),
        }
    }

    fn clamp(&self, gated: bool, s: f64, x: f64) -> f64 {
        if gated {
            let (lo, hi) = self.x_range(s);
            x.clamp(lo, hi)
        } else {
            x
        }
    }

    fn f_pt(&self, i: usize, j: usize, x: f64) -> f64 {
        match &self.spec.instance.nonlinearity {
            Nonlinearity::EmdenFowler { lambda, .. } => self.coef_pts[i][j] * signed_pow(x, *lambda),
            nl => nl.f(self.mesh.pts[i][j], x),
        }
    }

    fn f_node(&self, i: usize, x: f64) -> f64 {
        match &self.spec.instance.nonlinearity {
            Nonlinearity::EmdenFowler { lambda, .. } => self.coef_nodes[i] * signed_pow(x, *lambda),
            nl => nl.f(self.mesh.nodes[i], x),
        }
    }

    /// `int_{T_max}^inf s^k f(s, x(s)) ds` with the envelope implied by the
    /// candidate set.
    fn tail_f(&self, k: f64, x_of: impl Fn(f64) -> f64) -> Result<f64> {
        if self.env.scale == 0.0 {
            return Ok(0.0);
        }
        let (xs, xe) = self.x_bound();
        let (scale, exponent) = match self.lambda() {
            Some(l) => (self.env.scale * xs.powf(l), self.env.exponent - l * xe - k),
            None => (self.env.scale * xs, self.env.exponent - xe - k),
        };
        let nl = &self.spec.instance.nonlinearity;
        let tmax = self.mesh.t_max();
        // absolute target relative to the envelope's own remainder
        let size = if exponent > 1.0 {
            scale * tmax.powf(1.0 - exponent) / (exponent - 1.0)
        } else {
            0.0
        };
        let tol = QuadTolerance {
            rel: TAIL_REL_TOL,
            abs: TAIL_REL_TOL * size,
        };
        let est = improper_tail(|s| s.powf(k) * nl.f(s, x_of(s)), tmax, scale, exponent, tol)?;
        Ok(est.value)
    }

    /// Decay exponent `p - shift` of an output tail.
    fn decay(&self, shift: f64) -> Result<f64> {
        if self.env.scale == 0.0 {
            return Ok(1.0);
        }
        let e = self.env.exponent - shift;
        if e > 0.0 {
            Ok(e)
        } else {
            Err(Error::DivergentTail {
                weight: shift - 1.0,
                exponent: self.env.exponent,
            })
        }
    }

    /// The scheme's starting function, inside the candidate set.
    pub fn initial(&self) -> GridFunction {
        let nodes = self.mesh.nodes.clone();
        let n = nodes.len();
        let g = match self.spec.setup {
            Setup::Bounded { limit, lower } => {
                let mid = 0.5 * (limit + lower);
                GridFunction::with_slopes(nodes, vec![mid; n], vec![0.0; n], Tail::Constant { value: mid })
            }
            Setup::Derivative { .. } | Setup::Wronskian { .. } => {
                GridFunction::with_slopes(nodes, vec![0.0; n], vec![0.0; n], Tail::Zero)
            }
            Setup::LinearLike { a, .. } => {
                let vals = nodes.iter().map(|t| a * t).collect();
                GridFunction::with_slopes(
                    nodes,
                    vals,
                    vec![a; n],
                    Tail::LinearAffine {
                        slope: a,
                        intercept: 0.0,
                    },
                )
            }
            Setup::Sandwich { c, .. } => {
                let vals = nodes.iter().map(|t| c * t).collect();
                GridFunction::with_slopes(
                    nodes,
                    vals,
                    vec![c; n],
                    Tail::LinearAffine {
                        slope: c,
                        intercept: 0.0,
                    },
                )
            }
        };
        g.expect("mesh validated at construction")
    }

    /// Checks the candidate-set bounds at every node.
    pub fn check_candidate(&self, u: &GridFunction) -> Result<()> {
        if u.nodes() != self.mesh.nodes.as_slice() {
            return Err(Error::GridMismatch);
        }
        if let Setup::LinearLike { x0, .. } = self.spec.setup {
            let v = u.values()[0];
            if (v - x0).abs() > GATE_TOLERANCE * x0.abs().max(1.0) {
                return Err(Error::CandidateOutOfSet {
                    t: self.mesh.nodes[0],
                    value: v,
                    lower: x0,
                    upper: x0,
                });
            }
        }
        for ((&t, &v), &(lo, hi)) in self.mesh.nodes.iter().zip(u.values()).zip(&self.bracket) {
            let tol = GATE_TOLERANCE * lo.abs().max(hi.abs()) + 1e-15;
            if !(v >= lo - tol && v <= hi + tol) {
                return Err(Error::CandidateOutOfSet {
                    t,
                    value: v,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    /// Gated application: the input must lie in the candidate set, and
    /// solution values are clamped into the set's range inside integrals.
    pub fn apply(&self, u: &GridFunction) -> Result<Image> {
        self.check_candidate(u)?;
        self.run(u, true)
    }

    /// Raw application without gate or clamping.
    pub fn evaluate(&self, u: &GridFunction) -> Result<Image> {
        if u.nodes() != self.mesh.nodes.as_slice() {
            return Err(Error::GridMismatch);
        }
        self.run(u, false)
    }

    /// The grid function on which the scheme's metric is measured.
    pub fn measured<'a>(&self, img: &'a Image) -> &'a GridFunction {
        match self.spec.scheme {
            Scheme::LinearLike => &img.xprime,
            _ => &img.iterate,
        }
    }

    /// The measured function of a starting iterate.
    pub fn measured_input(&self, u: &GridFunction) -> Result<GridFunction> {
        match self.spec.scheme {
            Scheme::LinearLike => GridFunction::new(
                u.nodes().to_vec(),
                u.slopes().to_vec(),
                u.tail().derivative_tail(),
            ),
            _ => Ok(u.clone()),
        }
    }

    fn run(&self, u: &GridFunction, gated: bool) -> Result<Image> {
        match self.spec.setup {
            Setup::Bounded { limit, .. } => self.bounded(u, gated, limit),
            Setup::Derivative { m, .. } => self.derivative(u, gated, m),
            Setup::LinearLike { a, x0, .. } => self.linear_like(u, gated, a, x0),
            Setup::Wronskian { a, b, .. } => self.wronskian(u, gated, a, b),
            Setup::Sandwich { c, .. } => self.sandwich(u, gated, c),
        }
    }

    fn grid(&self, values: Vec<f64>, slopes: Vec<f64>, tail: Tail) -> Result<GridFunction> {
        GridFunction::with_slopes(self.mesh.nodes.clone(), values, slopes, tail)
    }

    /// `x'' = -f(t, x)` at the nodes.
    fn second_derivative(&self, u: &GridFunction, gated: bool) -> Vec<f64> {
        self.mesh
            .nodes
            .iter()
            .zip(u.values())
            .enumerate()
            .map(|(i, (&t, &x))| -self.f_node(i, self.clamp(gated, t, x)))
            .collect()
    }

    // T(u)(t) = L - int_t^inf (s - t) f(s, u(s)) ds
    fn bounded(&self, u: &GridFunction, gated: bool, limit: f64) -> Result<Image> {
        let ug = self.mesh.sample(u);
        let fg = self.mesh.map(|i, j, s| self.f_pt(i, j, self.clamp(gated, s, ug[i][j])));
        let sfg = self.mesh.map(|i, j, s| s * fg[i][j]);
        let b0 = self.mesh.backward(&fg);
        let b1 = self.mesh.backward(&sfg);
        let tail = u.tail();
        let xt = |s: f64| self.clamp(gated, s, tail.eval(s));
        let i0 = self.tail_f(0.0, xt)?;
        let i1 = self.tail_f(1.0, xt)?;
        let nodes = &self.mesh.nodes;
        let vals: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, &t)| limit - ((b1[i] + i1) - t * (b0[i] + i0)))
            .collect();
        let d: Vec<f64> = b0.iter().map(|b| b + i0).collect();
        let tmax = self.mesh.t_max();
        let x_tail = Tail::fit_power(limit, self.decay(2.0)?, tmax, *vals.last().unwrap());
        let d_tail = Tail::fit_power(0.0, self.decay(1.0)?, tmax, *d.last().unwrap());
        let x = self.grid(vals, d.clone(), x_tail)?;
        let xprime = self.grid(d, self.second_derivative(u, gated), d_tail)?;
        Ok(Image {
            iterate: x.clone(),
            x,
            xprime,
        })
    }

    // T(v)(t) = int_t^inf f(s, M - int_s^inf v) ds
    fn derivative(&self, v: &GridFunction, gated: bool, m: f64) -> Result<Image> {
        let tmax = self.mesh.t_max();
        let vt = v.tail();
        let big_v = backward_hermite(v, vt.integral_from(0.0, tmax)?);
        let nodes = &self.mesh.nodes;
        let (vals, sl) = (v.values(), v.slopes());
        let xg = self.mesh.map(|i, _, s| {
            let h = nodes[i + 1] - nodes[i];
            let part = hermite_partial_integral(vals[i], vals[i + 1], sl[i], sl[i + 1], h, (s - nodes[i]) / h);
            self.clamp(gated, s, m - (big_v[i] - part))
        });
        let fg = self.mesh.map(|i, j, _| self.f_pt(i, j, xg[i][j]));
        let b0 = self.mesh.backward(&fg);
        let i0 = self.tail_f(0.0, |s| {
            let tail_v = vt.integral_from(0.0, s).unwrap_or(f64::NAN);
            self.clamp(gated, s, m - tail_v)
        })?;
        let t_vals: Vec<f64> = b0.iter().map(|b| b + i0).collect();
        let t_slopes: Vec<f64> = (0..nodes.len())
            .map(|i| -self.f_node(i, self.clamp(gated, nodes[i], m - big_v[i])))
            .collect();
        let e = self.decay(1.0)?;
        let t_tail = Tail::fit_power(0.0, e, tmax, *t_vals.last().unwrap());
        let iterate = self.grid(t_vals.clone(), t_slopes, t_tail)?;
        let w = backward_hermite(&iterate, t_tail.integral_from(0.0, tmax)?);
        let x_vals: Vec<f64> = w.iter().map(|w| m - w).collect();
        let x_tail = Tail::fit_power(m, self.decay(2.0)?, tmax, *x_vals.last().unwrap());
        let x = self.grid(x_vals, t_vals, x_tail)?;
        Ok(Image {
            xprime: iterate.clone(),
            iterate,
            x,
        })
    }

    // T(u)(t) = x0 + A (t - t0) + int_{t0}^t int_s^inf f(tau, u(tau)) dtau ds,
    // with the double integral rewritten as t G(t) - t0 G(t0) + int_{t0}^t s F
    fn linear_like(&self, u: &GridFunction, gated: bool, a: f64, x0: f64) -> Result<Image> {
        let ug = self.mesh.sample(u);
        let fg = self.mesh.map(|i, j, s| self.f_pt(i, j, self.clamp(gated, s, ug[i][j])));
        let sfg = self.mesh.map(|i, j, s| s * fg[i][j]);
        let b0 = self.mesh.backward(&fg);
        let j1 = self.mesh.forward(&sfg);
        let tail = u.tail();
        let i0 = self.tail_f(0.0, |s| self.clamp(gated, s, tail.eval(s)))?;
        let nodes = &self.mesh.nodes;
        let t0 = nodes[0];
        let g: Vec<f64> = b0.iter().map(|b| b + i0).collect();
        let vals: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, &t)| x0 + a * (t - t0) + t * g[i] - t0 * g[0] + j1[i])
            .collect();
        let d: Vec<f64> = g.iter().map(|g| a + g).collect();
        let tmax = self.mesh.t_max();
        let lambda = self.lambda().unwrap_or(1.0);
        let x_tail = Tail::fit_linear(a, tmax, *vals.last().unwrap());
        let d_tail = Tail::fit_power(a, self.decay(lambda + 1.0)?, tmax, *d.last().unwrap());
        let x = self.grid(vals, d.clone(), x_tail)?;
        let xprime = self.grid(d, self.second_derivative(u, gated), d_tail)?;
        Ok(Image {
            iterate: x.clone(),
            x,
            xprime,
        })
    }

    /// `R(s) = int_s^inf v(tau) / tau dtau` at the nodes.
    fn r_nodes(&self, v: &GridFunction) -> Result<Vec<f64>> {
        let nodes = &self.mesh.nodes;
        let n = nodes.len();
        let mut r = vec![0.0; n];
        r[n - 1] = v.tail().integral_from(-1.0, self.mesh.t_max())?;
        for i in (0..n - 1).rev() {
            r[i] = r[i + 1] + gauss5(|s| v.eval_in_cell(i, s) / s, nodes[i], nodes[i + 1]);
        }
        Ok(r)
    }

    /// The solution `x(t) = a t + b - t int_t^inf v(tau)/tau dtau` and its
    /// derivative `a - R + v` for a weighted-Wronskian iterate `v`.
    pub fn wronskian_reconstruct(&self, v: &GridFunction) -> Result<(GridFunction, GridFunction)> {
        let Setup::Wronskian { a, b, .. } = self.spec.setup else {
            return Err(Error::NotApplicable(
                "reconstruction needs the weighted Wronskian scheme".into(),
            ));
        };
        let r = self.r_nodes(v)?;
        let nodes = &self.mesh.nodes;
        let x: Vec<f64> = nodes.iter().zip(&r).map(|(t, r)| a * t + b - t * r).collect();
        let xp: Vec<f64> = r.iter().zip(v.values()).map(|(r, v)| a - r + v).collect();
        // x'' = v / t + v'
        let xpp: Vec<f64> = nodes
            .iter()
            .zip(v.values().iter().zip(v.slopes()))
            .map(|(t, (v, dv))| v / t + dv)
            .collect();
        let tmax = self.mesh.t_max();
        let e = match v.tail() {
            Tail::PowerCorrection { exponent, .. } => exponent,
            _ => 1.0,
        };
        let x_tail = Tail::fit_linear(a, tmax, *x.last().unwrap());
        let xp_tail = Tail::fit_power(a, e, tmax, *xp.last().unwrap());
        Ok((self.grid(x, xp.clone(), x_tail)?, self.grid(xp, xpp, xp_tail)?))
    }

    // T(v)(t) = -(1/t) int_{t0}^t s f(s, a s + b - s R(s)) ds
    fn wronskian(&self, v: &GridFunction, gated: bool, a: f64, b: f64) -> Result<Image> {
        let nodes = &self.mesh.nodes;
        let r = self.r_nodes(v)?;
        let xg = self.mesh.map(|i, _, s| {
            let rs = r[i + 1] + gauss5(|tau| v.eval_in_cell(i, tau) / tau, s, nodes[i + 1]);
            self.clamp(gated, s, a * s + b - s * rs)
        });
        let fg = self.mesh.map(|i, j, s| s * self.f_pt(i, j, xg[i][j]));
        let k = self.mesh.forward(&fg);
        let vals: Vec<f64> = nodes.iter().zip(&k).map(|(t, k)| -k / t).collect();
        let slopes: Vec<f64> = (0..nodes.len())
            .map(|i| {
                let t = nodes[i];
                let x = self.clamp(gated, t, a * t + b - t * r[i]);
                k[i] / (t * t) - self.f_node(i, x)
            })
            .collect();
        let lambda = self.lambda().unwrap_or(1.0);
        let e = self.decay(lambda + 1.0)?.min(1.0);
        let tail = Tail::fit_power(0.0, e, self.mesh.t_max(), *vals.last().unwrap());
        let iterate = self.grid(vals, slopes, tail)?;
        let (x, xprime) = self.wronskian_reconstruct(&iterate)?;
        Ok(Image { iterate, x, xprime })
    }

    // T(u)(t) = t { c + int_t^inf s^-2 int_{t0}^s tau f(tau, u) dtau ds }
    //         = c t + J(t) + t int_t^inf f(s, u(s)) ds
    fn sandwich(&self, u: &GridFunction, gated: bool, c: f64) -> Result<Image> {
        let ug = self.mesh.sample(u);
        let fg = self.mesh.map(|i, j, s| self.f_pt(i, j, self.clamp(gated, s, ug[i][j])));
        let sfg = self.mesh.map(|i, j, s| s * fg[i][j]);
        let b0 = self.mesh.backward(&fg);
        let j = self.mesh.forward(&sfg);
        let tail = u.tail();
        let i0 = self.tail_f(0.0, |s| self.clamp(gated, s, tail.eval(s)))?;
        let nodes = &self.mesh.nodes;
        let g: Vec<f64> = b0.iter().map(|b| b + i0).collect();
        let vals: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, &t)| c * t + j[i] + t * g[i])
            .collect();
        let d: Vec<f64> = g.iter().map(|g| c + g).collect();
        let tmax = self.mesh.t_max();
        let lambda = self.lambda().unwrap_or(1.0);
        let x_tail = Tail::fit_linear(c, tmax, *vals.last().unwrap());
        let d_tail = Tail::fit_power(c, self.decay(lambda + 1.0)?, tmax, *d.last().unwrap());
        let x = self.grid(vals, d.clone(), x_tail)?;
        let xprime = self.grid(d, self.second_derivative(u, gated), d_tail)?;
        Ok(Image {
            iterate: x.clone(),
            x,
            xprime,
        })
    }
}

/// `out[i] = int_{n_i}^inf g` from the Hermite cells and a given tail value.
fn backward_hermite(g: &GridFunction, tail: f64) -> Vec<f64> {
    let (t, v, m) = (g.nodes(), g.values(), g.slopes());
    let n = t.len();
    let mut out = vec![0.0; n];
    out[n - 1] = tail;
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] + hermite_integral(v[i], v[i + 1], m[i], m[i + 1], t[i + 1] - t[i]);
    }
    out
}
