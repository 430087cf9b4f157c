//! Nonnegative coefficients `q(t)` on `[t_start, +inf)` with controlled
//! weighted tails `int_T^inf s^k q(s) ds`, and the nonlinearities built on
//! them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quadrature::{self, Estimate, QuadTolerance};

/// Power-law bound `q(t) <= scale * t^(-exponent)` on the whole domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub scale: f64,
    pub exponent: f64,
}

impl Envelope {
    pub fn at(&self, t: f64) -> f64 {
        self.scale * t.powf(-self.exponent)
    }
}

/// How a coefficient given in the radial variable `r` is pulled back to `s`
/// under `r = beta(s) = (s/(n-2))^(1/(n-2))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PullbackWeight {
    /// `beta * beta' * a(beta) / ((n-2) s)`
    Potential,
    /// `beta * beta' * g(beta)`
    Drift,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    PowerDecay {
        mu: f64,
        p: f64,
    },
    ExpDecay {
        mu: f64,
        gamma: f64,
    },
    ScaledExpr {
        scale: f64,
        expr: Expr,
    },
    Pullback {
        n: u32,
        base: Box<Coefficient>,
        weight: PullbackWeight,
    },
}

/// A nonnegative continuous coefficient with a power-law envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientSpec", into = "CoefficientSpec")]
pub struct Coefficient {
    t_start: f64,
    kind: Kind,
    envelope: Envelope,
    exact_envelope: bool,
}

/// `(s/(n-2))^(1/(n-2))`; callers validate `n >= 3`, `s > 0`.
pub(crate) fn radial_beta(n: u32, s: f64) -> f64 {
    let m = f64::from(n - 2);
    (s / m).powf(1.0 / m)
}

fn exp_envelope(mu: f64, gamma: f64, t_start: f64, exponent: f64) -> Envelope {
    let m = t_start.max(exponent / gamma);
    Envelope {
        scale: mu * m.powf(exponent) * (-gamma * m).exp(),
        exponent,
    }
}

const EXP_ENVELOPE_EXPONENT: f64 = 4.0;

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParam(format!("{name} must be finite, got {v}")))
    }
}

impl Coefficient {
    /// `mu * t^(-p)` on `[1, +inf)`.
    pub fn power_decay(mu: f64, p: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_finite("p", p)?;
        if mu < 0.0 {
            return Err(Error::BadParam(format!("power decay needs mu >= 0, got {mu}")));
        }
        if p < 0.0 {
            return Err(Error::BadParam(format!("power decay needs p >= 0, got {p}")));
        }
        Ok(Self {
            t_start: 1.0,
            kind: Kind::PowerDecay { mu, p },
            envelope: Envelope {
                scale: mu,
                exponent: p,
            },
            exact_envelope: true,
        })
    }

    /// `mu * exp(-gamma t)` on `[1, +inf)`.
    pub fn exp_decay(mu: f64, gamma: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_finite("gamma", gamma)?;
        if mu < 0.0 || gamma <= 0.0 {
            return Err(Error::BadParam(format!(
                "exp decay needs mu >= 0 and gamma > 0, got ({mu}, {gamma})"
            )));
        }
        Ok(Self {
            t_start: 1.0,
            kind: Kind::ExpDecay { mu, gamma },
            envelope: exp_envelope(mu, gamma, 1.0, EXP_ENVELOPE_EXPONENT),
            exact_envelope: true,
        })
    }

    pub fn zero() -> Self {
        Self::power_decay(0.0, 2.0).expect("valid constants")
    }

    /// `scale * expr(t)` with a declared envelope, checked by sampling.
    pub fn scaled_expr(scale: f64, expr: Expr, envelope: Envelope, t_start: f64) -> Result<Self> {
        check_finite("scale", scale)?;
        check_finite("envelope scale", envelope.scale)?;
        check_finite("envelope exponent", envelope.exponent)?;
        if scale < 0.0 || envelope.scale < 0.0 {
            return Err(Error::BadParam(
                "expression scale and envelope scale must be nonnegative".into(),
            ));
        }
        if expr.uses_u() {
            return Err(Error::BadParam(format!(
                "coefficient expression '{expr}' may only depend on t"
            )));
        }
        let c = Self {
            t_start: 1.0,
            kind: Kind::ScaledExpr { scale, expr },
            envelope,
            exact_envelope: false,
        }
        .starting_at(t_start)?;
        Ok(c)
    }

    /// Pulls a radial coefficient back to the `s` variable; the result lives
    /// on `[s0, +inf)` and requires `beta(s0) >= base.t_start()`.
    pub fn pullback(base: &Coefficient, n: u32, weight: PullbackWeight, s0: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::BadParam(format!("dimension must be at least 3, got {n}")));
        }
        if !(s0 > 0.0) {
            return Err(Error::BadParam(format!("s0 must be positive, got {s0}")));
        }
        let r0 = radial_beta(n, s0);
        if r0 < base.t_start {
            return Err(Error::Domain {
                t: r0,
                t_start: base.t_start,
            });
        }
        let m = f64::from(n - 2);
        let p = base.envelope.exponent;
        let (pre, exponent) = match weight {
            PullbackWeight::Potential => (-2.0 - (2.0 - p) / m, 2.0 + (p - 2.0) / m),
            PullbackWeight::Drift => (-1.0 - (2.0 - p) / m, 1.0 + (p - 2.0) / m),
        };
        let envelope = Envelope {
            scale: base.envelope.scale * m.powf(pre),
            exponent,
        };
        if let Kind::PowerDecay { .. } = base.kind {
            // a power law pulls back to a power law
            return Ok(Self {
                t_start: s0,
                kind: Kind::PowerDecay {
                    mu: envelope.scale,
                    p: exponent,
                },
                envelope,
                exact_envelope: true,
            });
        }
        Ok(Self {
            t_start: s0,
            kind: Kind::Pullback {
                n,
                base: Box::new(base.clone()),
                weight,
            },
            envelope,
            exact_envelope: base.exact_envelope,
        })
    }

    /// Moves the left endpoint of the domain.
    pub fn starting_at(mut self, t_start: f64) -> Result<Self> {
        if !(t_start > 0.0 && t_start.is_finite()) {
            return Err(Error::BadParam(format!(
                "domain start must be positive and finite, got {t_start}"
            )));
        }
        if let Kind::Pullback { n, ref base, .. } = self.kind {
            let r0 = radial_beta(n, t_start);
            if r0 < base.t_start {
                return Err(Error::Domain {
                    t: r0,
                    t_start: base.t_start,
                });
            }
        }
        self.t_start = t_start;
        if let Kind::ExpDecay { mu, gamma } = self.kind {
            self.envelope = exp_envelope(mu, gamma, t_start, EXP_ENVELOPE_EXPONENT);
        }
        if let Kind::ScaledExpr { .. } = self.kind {
            self.check_envelope(1000)?;
        }
        Ok(self)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    /// True when the envelope exponent is the true decay rate (built-in kinds).
    pub fn envelope_is_exact(&self) -> bool {
        self.exact_envelope
    }

    /// True when the coefficient vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.envelope.scale == 0.0
    }

    /// Multiplies the coefficient by `s >= 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::BadParam(format!("scale factor must be nonnegative, got {s}")));
        }
        let mut c = self.clone();
        c.envelope.scale *= s;
        c.kind = match c.kind {
            Kind::PowerDecay { mu, p } => Kind::PowerDecay { mu: mu * s, p },
            Kind::ExpDecay { mu, gamma } => Kind::ExpDecay { mu: mu * s, gamma },
            Kind::ScaledExpr { scale, expr } => Kind::ScaledExpr {
                scale: scale * s,
                expr,
            },
            Kind::Pullback { n, base, weight } => Kind::Pullback {
                n,
                base: Box::new(base.scaled(s)?),
                weight,
            },
        };
        Ok(c)
    }

    /// Raw value without domain or sign checks.
    pub fn at(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::PowerDecay { mu, p } => {
                if *mu == 0.0 {
                    0.0
                } else {
                    mu * t.powf(-p)
                }
            }
            Kind::ExpDecay { mu, gamma } => mu * (-gamma * t).exp(),
            Kind::ScaledExpr { scale, expr } => {
                if *scale == 0.0 {
                    0.0
                } else {
                    scale * expr.eval(t, 0.0)
                }
            }
            Kind::Pullback { n, base, weight } => {
                let m = f64::from(n - 2);
                let r = radial_beta(*n, t);
                let b = base.at(r);
                match weight {
                    PullbackWeight::Potential => r * r * b / (m * m * t * t),
                    PullbackWeight::Drift => r * r * b / (m * t),
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= self.t_start) {
            return Err(Error::Domain {
                t,
                t_start: self.t_start,
            });
        }
        let v = self.at(t);
        if v < 0.0 || v.is_nan() {
            return Err(Error::NegativeCoefficient { t, value: v });
        }
        Ok(v)
    }

    /// Checks `0 <= q(t) <= envelope(t)` at log-spaced points over six decades.
    pub fn check_envelope(&self, samples: usize) -> Result<()> {
        let n = samples.max(2);
        let span = 6.0 * std::f64::consts::LN_10;
        for i in 0..n {
            let t = self.t_start * (span * i as f64 / (n - 1) as f64).exp();
            let v = self.eval(t)?;
            let bound = self.envelope.at(t);
            if v > bound * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::BadParam(format!(
                    "envelope violated at t = {t}: q = {v:e} > {bound:e}"
                )));
            }
        }
        Ok(())
    }

    fn domain(&self, t: f64) -> Result<()> {
        if t >= self.t_start {
            Ok(())
        } else {
            Err(Error::Domain {
                t,
                t_start: self.t_start,
            })
        }
    }

    /// `int_T^inf s^k q(s) ds` with the default tolerance.
    pub fn weighted_tail(&self, k: f64, t: f64) -> Result<Estimate> {
        self.weighted_tail_with(k, t, QuadTolerance::default())
    }

    pub fn weighted_tail_with(&self, k: f64, t: f64, tol: QuadTolerance) -> Result<Estimate> {
        self.domain(t)?;
        if self.is_zero() {
            return Ok(Estimate::default());
        }
        match self.kind {
            Kind::PowerDecay { mu, p } => {
                if p <= k + 1.0 {
                    return Err(Error::DivergentTail {
                        weight: k,
                        exponent: p,
                    });
                }
                Ok(Estimate::exact(mu * t.powf(k - p + 1.0) / (p - k - 1.0)))
            }
            Kind::ExpDecay { mu, gamma } => {
                if k >= 0.0 && k.fract() == 0.0 && k <= 64.0 {
                    return Ok(Estimate::exact(mu * exp_moment_tail(k as u32, gamma, t)));
                }
                let env = exp_envelope(mu, gamma, t, k + 3.0);
                quadrature::improper_tail(
                    |s| s.powf(k) * self.at(s),
                    t,
                    env.scale,
                    3.0,
                    tol,
                )
            }
            _ => {
                let env = self.envelope;
                if env.exponent <= k + 1.0 {
                    return Err(Error::DivergentTail {
                        weight: k,
                        exponent: env.exponent,
                    });
                }
                quadrature::improper_tail(
                    |s| s.powf(k) * self.at(s),
                    t,
                    env.scale,
                    env.exponent - k,
                    tol,
                )
            }
        }
    }

    /// `int_T^inf (s - T) q(s) ds`.
    pub fn double_tail(&self, t: f64) -> Result<Estimate> {
        self.domain(t)?;
        if self.is_zero() {
            return Ok(Estimate::default());
        }
        if let Kind::PowerDecay { mu, p } = self.kind {
            if p <= 2.0 {
                return Err(Error::DivergentTail {
                    weight: 1.0,
                    exponent: p,
                });
            }
            return Ok(Estimate::exact(mu * t.powf(2.0 - p) / ((p - 1.0) * (p - 2.0))));
        }
        let w1 = self.weighted_tail(1.0, t)?;
        let w0 = self.weighted_tail(0.0, t)?;
        Ok(w1 - w0.scale(t))
    }

    /// `int_a^b s^k q(s) ds` over a finite range inside the domain.
    pub fn integral(&self, k: f64, a: f64, b: f64) -> Result<Estimate> {
        self.domain(a)?;
        if b < a {
            return Err(Error::BadParam(format!("integral bounds reversed: [{a}, {b}]")));
        }
        if self.is_zero() || a == b {
            return Ok(Estimate::default());
        }
        match self.kind {
            Kind::PowerDecay { mu, p } => {
                let e = k - p + 1.0;
                let v = if e == 0.0 {
                    mu * (b / a).ln()
                } else {
                    mu * (b.powf(e) - a.powf(e)) / e
                };
                Ok(Estimate::exact(v))
            }
            Kind::ExpDecay { mu, gamma } if k >= 0.0 && k.fract() == 0.0 && k <= 64.0 => {
                let ki = k as u32;
                Ok(Estimate::exact(
                    mu * (exp_moment_tail(ki, gamma, a) - exp_moment_tail(ki, gamma, b)),
                ))
            }
            _ => quadrature::integrate_log(|s| s.powf(k) * self.at(s), a, b, QuadTolerance::default()),
        }
    }
}

/// `int_T^inf s^k e^(-gamma s) ds` for integer `k`, by the finite sum
/// `e^(-gamma T) sum_j k!/j! T^j / gamma^(k-j+1)`.
fn exp_moment_tail(k: u32, gamma: f64, t: f64) -> f64 {
    let mut term = t.powi(k as i32) / gamma;
    let mut sum = term;
    for j in (1..=k).rev() {
        term *= f64::from(j) / (t * gamma);
        sum += term;
    }
    sum * (-gamma * t).exp()
}

fn one() -> f64 {
    1.0
}

/// Serialized form of a [`Coefficient`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    PowerDecay {
        mu: f64,
        p: f64,
        #[serde(default = "one")]
        t_start: f64,
    },
    ExpDecay {
        mu: f64,
        gamma: f64,
        #[serde(default = "one")]
        t_start: f64,
    },
    Expr {
        expr: Expr,
        #[serde(default = "one")]
        scale: f64,
        envelope: Envelope,
        #[serde(default = "one")]
        t_start: f64,
    },
    Pullback {
        n: u32,
        base: Box<CoefficientSpec>,
        weight: PullbackWeight,
        t_start: f64,
    },
}

impl TryFrom<CoefficientSpec> for Coefficient {
    type Error = Error;
    fn try_from(spec: CoefficientSpec) -> Result<Self> {
        match spec {
            CoefficientSpec::PowerDecay { mu, p, t_start } => {
                Coefficient::power_decay(mu, p)?.starting_at(t_start)
            }
            CoefficientSpec::ExpDecay { mu, gamma, t_start } => {
                Coefficient::exp_decay(mu, gamma)?.starting_at(t_start)
            }
            CoefficientSpec::Expr {
                expr,
                scale,
                envelope,
                t_start,
            } => Coefficient::scaled_expr(scale, expr, envelope, t_start),
            CoefficientSpec::Pullback {
                n,
                base,
                weight,
                t_start,
            } => Coefficient::pullback(&Coefficient::try_from(*base)?, n, weight, t_start),
        }
    }
}

impl From<Coefficient> for CoefficientSpec {
    fn from(c: Coefficient) -> Self {
        let t_start = c.t_start;
        match c.kind {
            Kind::PowerDecay { mu, p } => CoefficientSpec::PowerDecay { mu, p, t_start },
            Kind::ExpDecay { mu, gamma } => CoefficientSpec::ExpDecay { mu, gamma, t_start },
            Kind::ScaledExpr { scale, expr } => CoefficientSpec::Expr {
                expr,
                scale,
                envelope: c.envelope,
                t_start,
            },
            Kind::Pullback { n, base, weight } => CoefficientSpec::Pullback {
                n,
                base: Box::new((*base).into()),
                weight,
                t_start,
            },
        }
    }
}

/// `|x|^(lambda-1) x`.
pub fn signed_pow(x: f64, lambda: f64) -> f64 {
    if lambda == 1.0 {
        x
    } else if lambda == 2.0 {
        x.abs() * x
    } else if lambda == 3.0 {
        x * x * x
    } else {
        x.abs().powf(lambda - 1.0) * x
    }
}

/// The nonlinearity `f(t, x)` of `x'' + f(t, x) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    /// `q(t) |x|^(lambda-1) x`
    EmdenFowler { lambda: f64, q: Coefficient },
    /// User expression `f(t, u)` with `|f(t,u2) - f(t,u1)| <= k(t) |u2 - u1|`.
    GeneralLipschitz { f: Expr, k: Coefficient },
}

impl Nonlinearity {
    pub fn emden_fowler(lambda: f64, q: Coefficient) -> Result<Self> {
        let nl = Nonlinearity::EmdenFowler { lambda, q };
        nl.validate()?;
        Ok(nl)
    }

    pub fn general(f: Expr, k: Coefficient) -> Result<Self> {
        let nl = Nonlinearity::GeneralLipschitz { f, k };
        nl.validate()?;
        Ok(nl)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Nonlinearity::EmdenFowler { lambda, .. } => {
                if !(*lambda >= 1.0 && lambda.is_finite()) {
                    return Err(Error::BadParam(format!("lambda must be >= 1, got {lambda}")));
                }
            }
            Nonlinearity::GeneralLipschitz { f, k } => {
                let t = k.t_start();
                if !f.eval(t, 0.0).is_finite() {
                    return Err(Error::BadParam(format!("f({t}, 0) is not finite")));
                }
            }
        }
        Ok(())
    }

    pub fn t_start(&self) -> f64 {
        match self {
            Nonlinearity::EmdenFowler { q, .. } => q.t_start(),
            Nonlinearity::GeneralLipschitz { k, .. } => k.t_start(),
        }
    }

    pub fn f(&self, t: f64, x: f64) -> f64 {
        match self {
            Nonlinearity::EmdenFowler { lambda, q } => q.at(t) * signed_pow(x, *lambda),
            Nonlinearity::GeneralLipschitz { f, .. } => f.eval(t, x),
        }
    }

    /// Lipschitz modulus in `x` on `|x| <= umax`.
    pub fn lipschitz(&self, t: f64, umax: f64) -> f64 {
        match self {
            Nonlinearity::EmdenFowler { lambda, q } => {
                lambda * q.at(t) * umax.abs().powf(lambda - 1.0)
            }
            Nonlinearity::GeneralLipschitz { k, .. } => k.at(t),
        }
    }

    /// The coefficient `k` bounding the Lipschitz modulus on `[0, m]`.
    pub fn modulus(&self, m: f64) -> Result<Coefficient> {
        match self {
            Nonlinearity::EmdenFowler { lambda, q } => q.scaled(lambda * m.abs().powf(lambda - 1.0)),
            Nonlinearity::GeneralLipschitz { k, .. } => Ok(k.clone()),
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Nonlinearity::EmdenFowler { lambda, .. } => Some(*lambda),
            Nonlinearity::GeneralLipschitz { .. } => None,
        }
    }

    /// Samples `f(t, 0) = 0`, `f >= 0` and the Lipschitz bound on `[0, m]`.
    ///
    /// A sampling check, not a proof.
    pub fn check_on_band(&self, m: f64, samples: usize) -> Result<()> {
        let t0 = self.t_start();
        let n = samples.max(2);
        for i in 0..n {
            let t = t0 * (6.0 * std::f64::consts::LN_10 * i as f64 / (n - 1) as f64).exp();
            let f0 = self.f(t, 0.0);
            if f0.abs() > 1e-300 {
                return Err(Error::BadParam(format!("f({t}, 0) = {f0:e} is not zero")));
            }
            let l = self.lipschitz(t, m);
            for j in 1..=16 {
                let u = m * j as f64 / 16.0;
                let fu = self.f(t, u);
                if !(fu >= 0.0) {
                    return Err(Error::BadParam(format!("f({t}, {u}) = {fu:e} is negative")));
                }
                let lhs = (fu - self.f(t, u - m / 16.0)).abs();
                if lhs > l * (m / 16.0) * (1.0 + 1e-9) + 1e-300 {
                    return Err(Error::BadParam(format!(
                        "Lipschitz bound k({t}) = {l:e} violated near u = {u}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn eval_examples() {
        let q = Coefficient::power_decay(0.5, 4.0).unwrap();
        assert_eq!(q.eval(2.0).unwrap(), 0.03125);
        let z = Coefficient::power_decay(0.0, 4.0).unwrap();
        assert_eq!(z.eval(7.0).unwrap(), 0.0);
        let e = Coefficient::exp_decay(1.0, 1.0).unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn weighted_tail_examples() {
        let q = Coefficient::power_decay(0.5, 4.0).unwrap();
        assert_eq!(q.weighted_tail(1.0, 1.0).unwrap().value, 0.25);
        let q = Coefficient::power_decay(0.1, 5.0).unwrap();
        let w = q.weighted_tail(3.0, 1.0).unwrap();
        assert!(close(w.value, 0.1, 1e-15));
        assert_eq!(w.error, 0.0);
        assert!(matches!(
            q.weighted_tail(4.0, 1.0),
            Err(Error::DivergentTail { .. })
        ));
    }

    #[test]
    fn double_tail_examples() {
        // int_1^inf (s-1) 0.5 s^-4 ds = 0.5 (1/2 - 1/3) = 1/12
        let q = Coefficient::power_decay(0.5, 4.0).unwrap();
        assert!(close(q.double_tail(1.0).unwrap().value, 1.0 / 12.0, 1e-15));
        let z = Coefficient::power_decay(0.0, 4.0).unwrap();
        assert_eq!(z.double_tail(3.0).unwrap().value, 0.0);
        let e = Coefficient::exp_decay(1.0, 1.0).unwrap();
        assert!(close(e.double_tail(1.0).unwrap().value, (-1f64).exp(), 1e-14));
    }

    #[test]
    fn expression_tail_matches_closed_form() {
        let expr = Expr::parse("t^-4").unwrap();
        let env = Envelope {
            scale: 0.5,
            exponent: 4.0,
        };
        let q = Coefficient::scaled_expr(0.5, expr, env, 1.0).unwrap();
        let w = q.weighted_tail(1.0, 1.0).unwrap();
        assert!((w.value - 0.25).abs() <= w.error + 1e-12);
        assert!(w.error < 1e-9);
    }

    #[test]
    fn expression_envelope_is_checked() {
        let expr = Expr::parse("t^-2").unwrap();
        let env = Envelope {
            scale: 1.0,
            exponent: 3.0,
        };
        assert!(Coefficient::scaled_expr(1.0, expr, env, 1.0).is_err());
        let neg = Expr::parse("-t^-4").unwrap();
        let env = Envelope {
            scale: 1.0,
            exponent: 4.0,
        };
        assert!(matches!(
            Coefficient::scaled_expr(1.0, neg, env, 1.0),
            Err(Error::NegativeCoefficient { .. })
        ));
    }

    #[test]
    fn exp_moments() {
        // int_2^inf s^2 e^-s ds = e^-2 (4 + 4 + 2)
        let v = exp_moment_tail(2, 1.0, 2.0);
        assert!(close(v, 10.0 * (-2f64).exp(), 1e-15));
        let e = Coefficient::exp_decay(1.0, 1.0).unwrap();
        let frac = e.weighted_tail(1.5, 1.0).unwrap();
        let lo = e.weighted_tail(1.0, 1.0).unwrap().value;
        let hi = e.weighted_tail(2.0, 1.0).unwrap().value;
        assert!(frac.value > lo && frac.value < hi);
    }

    #[test]
    fn pullback_of_power_law() {
        let a = Coefficient::power_decay(0.05, 4.0).unwrap();
        let q3 = Coefficient::pullback(&a, 3, PullbackWeight::Potential, 1.0).unwrap();
        assert!(close(q3.at(2.5), 0.05 * 2.5f64.powi(-4), 1e-14));
        let q4 = Coefficient::pullback(&a, 4, PullbackWeight::Potential, 2.0).unwrap();
        // direct substitution: beta^2 a(beta) / (4 s^2) with beta^2 = s/2
        let s = 3.0;
        let want = (s / 2.0) * 0.05 * (s / 2.0f64).powi(-2) / (4.0 * s * s);
        assert!(close(q4.at(s), want, 1e-14));
        let g = Coefficient::power_decay(1.0, 1.0).unwrap();
        let k = Coefficient::pullback(&g, 3, PullbackWeight::Drift, 1.0).unwrap();
        assert!(close(k.at(9.0), 1.0, 1e-15));
    }

    #[test]
    fn serde_round_trip() {
        let json = r#"{"kind":"expr","expr":"t^-4","scale":0.5,"envelope":{"scale":0.5,"exponent":4.0}}"#;
        let c: Coefficient = serde_json::from_str(json).unwrap();
        let back: Coefficient = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
        let bad = r#"{"kind":"power_decay","mu":1.0,"p":4.0,"colour":3}"#;
        assert!(serde_json::from_str::<Coefficient>(bad).is_err());
    }

    #[test]
    fn signed_power_is_odd() {
        for &l in &[1.0, 1.5, 2.0, 3.0, 4.25] {
            for &x in &[0.0, 0.3, 1.7] {
                assert_eq!(signed_pow(-x, l), -signed_pow(x, l));
            }
        }
    }

    #[test]
    fn general_band_check() {
        let f = Expr::parse("t^-4 * u").unwrap();
        let k = Coefficient::power_decay(1.0, 4.0).unwrap();
        let nl = Nonlinearity::general(f, k).unwrap();
        nl.check_on_band(1.0, 50).unwrap();
        let f = Expr::parse("2 * t^-4 * u").unwrap();
        let k = Coefficient::power_decay(1.0, 4.0).unwrap();
        let nl = Nonlinearity::general(f, k).unwrap();
        assert!(nl.check_on_band(1.0, 50).is_err());
    }
}
