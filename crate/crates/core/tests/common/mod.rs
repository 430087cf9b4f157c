#![allow(dead_code)]

use asympt_core::coefficients::{Coefficient, Envelope, Nonlinearity};
use asympt_core::criteria::{Params, ProblemInstance};
use asympt_core::expr::Expr;
use asympt_core::funcspace::{make_grid, GridFunction, Tail};

pub fn ef(lambda: f64, q: Coefficient, t0: f64, params: Params) -> ProblemInstance {
    ProblemInstance::new(Nonlinearity::emden_fowler(lambda, q).unwrap(), t0, params).unwrap()
}

pub fn power(mu: f64, p: f64) -> Coefficient {
    Coefficient::power_decay(mu, p).unwrap()
}

/// `q = 2 delta t^-3 (1 - delta/t)^-3`, for which `x = 1 - delta/t` solves
/// `x'' + q x^3 = 0`.
pub fn manufactured_q(delta: f64) -> Coefficient {
    let src = format!("2*{delta}*t^-3*(1-{delta}/t)^-3");
    let env = Envelope {
        scale: 2.0 * delta * (1.0 - delta).powi(-3),
        exponent: 3.0,
    };
    Coefficient::scaled_expr(1.0, Expr::parse(&src).unwrap(), env, 1.0).unwrap()
}

pub fn grid(t0: f64, t_max: f64, n: usize) -> Vec<f64> {
    make_grid(t0, t_max, n).unwrap()
}

pub fn func(nodes: &[f64], f: impl Fn(f64) -> f64, tail: Tail) -> GridFunction {
    GridFunction::from_fn(nodes, f, tail).unwrap()
}

pub fn max_rel_err(g: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
    g.nodes()
        .iter()
        .zip(g.values())
        .map(|(&t, &v)| (v - exact(t)).abs() / exact(t).abs().max(1e-300))
        .fold(0.0, f64::max)
}

pub fn max_abs_err(g: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
    g.nodes()
        .iter()
        .zip(g.values())
        .map(|(&t, &v)| (v - exact(t)).abs())
        .fold(0.0, f64::max)
}

use asympt_core::criteria::Scheme;

/// Regression instance for each scheme, with the coefficient scale `mu`.
/// Criteria pass for `mu` up to about the values in `MU_MAX`.
pub fn scheme_instance(scheme: Scheme, mu: f64) -> ProblemInstance {
    match scheme {
        Scheme::BoundedLimit => ef(3.0, power(mu, 4.0), 1.0, Params { c: Some(1.0), ..Params::default() }),
        Scheme::DerivativeSpace => ef(3.0, power(mu, 4.0), 1.0, Params { m: Some(1.0), ..Params::default() }),
        Scheme::LinearLike => ef(
            2.0,
            power(mu, 4.0),
            1.0,
            Params {
                big_a: Some(0.5),
                nu: Some(0.5),
                ..Params::default()
            },
        ),
        Scheme::WronskianWeighted => ef(
            3.0,
            power(mu, 6.0),
            1.0,
            Params {
                a: Some(1.0),
                b: Some(0.0),
                c_exp: Some(1.0),
                eps: Some(0.5),
                ..Params::default()
            },
        ),
        Scheme::SandwichLinear => ef(
            3.0,
            power(mu, 5.0),
            1.0,
            Params {
                c: Some(1.0),
                d: Some(0.5),
                ..Params::default()
            },
        ),
    }
}

pub fn mu_max(scheme: Scheme) -> f64 {
    match scheme {
        Scheme::BoundedLimit => 0.5,
        Scheme::DerivativeSpace => 0.3,
        Scheme::LinearLike => 0.12,
        Scheme::WronskianWeighted => 0.12,
        Scheme::SandwichLinear => 0.12,
    }
}

use asympt_core::fixpoint::Operator;

/// A member of the scheme's candidate set, `theta` in `[0, 1]` choosing the
/// position inside the bracket and `wiggle` adding a log-periodic variation.
pub fn candidate(op: &Operator, mu: f64, theta: f64, wiggle: f64, phase: f64) -> GridFunction {
    let nodes = op.nodes().to_vec();
    let th = |t: f64| (theta + wiggle * (2.0 * t.ln() + phase).sin()).clamp(0.0, 1.0);
    let br = op.bracket();
    let t_max = *nodes.last().unwrap();
    match op.spec().scheme {
        Scheme::BoundedLimit => {
            let v: Vec<f64> = nodes.iter().zip(br).map(|(&t, (lo, hi))| lo + th(t) * (hi - lo)).collect();
            let last = *v.last().unwrap();
            GridFunction::new(nodes, v, Tail::Constant { value: last }).unwrap()
        }
        Scheme::DerivativeSpace => {
            let v = nodes.iter().zip(br).map(|(&t, (_, hi))| th(t) * hi).collect();
            GridFunction::new(nodes, v, Tail::Zero).unwrap()
        }
        Scheme::WronskianWeighted => {
            let v = nodes.iter().zip(br).map(|(&t, (lo, _))| th(t) * lo).collect();
            GridFunction::new(nodes, v, Tail::Zero).unwrap()
        }
        Scheme::SandwichLinear => {
            let v: Vec<f64> = nodes.iter().zip(br).map(|(&t, (lo, hi))| lo + th(t) * (hi - lo)).collect();
            let last = *v.last().unwrap();
            GridFunction::new(nodes, v, Tail::fit_linear(last / t_max, t_max, last)).unwrap()
        }
        Scheme::LinearLike => {
            // u' - A = k W(t) with W(t) = int_t^inf s^2 q = mu / t, k between
            // A^2 and (A + c_nu)^2
            let (a, c_nu) = (0.5, 2.0 * mu);
            let k = a * a + theta * ((a + c_nu).powi(2) - a * a);
            let v = nodes.iter().map(|&t| a * t + k * mu * t.ln()).collect();
            let s = nodes.iter().map(|&t| a + k * mu / t).collect();
            let last = a * t_max + k * mu * t_max.ln();
            GridFunction::with_slopes(nodes, v, s, Tail::fit_linear(a, t_max, last)).unwrap()
        }
    }
}
