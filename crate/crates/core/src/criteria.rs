//! Hypothesis constants of the existence theorems and their verdicts.
//!
//! Each check returns a [`CheckEntry`] listing every inequality it tested.
//! Strict inequalities pass only with a relative margin of `1e-9` plus the
//! quadrature error of the quantities involved; anything inside the margin is
//! reported as inconclusive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coefficients::{Coefficient, Nonlinearity};
use crate::error::{Error, Result};
use crate::quadrature::{self, Estimate, QuadTolerance};

/// Relative strictness margin for `<` comparisons.
pub const STRICT_MARGIN: f64 = 1e-9;

/// The contraction schemes, one per existence theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    BoundedLimit,
    DerivativeSpace,
    LinearLike,
    WronskianWeighted,
    SandwichLinear,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::BoundedLimit,
        Scheme::DerivativeSpace,
        Scheme::LinearLike,
        Scheme::WronskianWeighted,
        Scheme::SandwichLinear,
    ];
}

macro_rules! params {
    ($( $(#[$meta:meta])* $field:ident : $ty:ty ),* $(,)?) => {
        /// Scalar parameters of the theorems; each check reads the ones it needs.
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct Params {
            $(
                $(#[$meta])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }
    };
}

params! {
    /// limit value of bounded solutions, or the slope floor of sandwich ones
    c: f64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "A")]
    big_a: f64,
    x0: f64,
    nu: f64,
    a: f64,
    b: f64,
    c_exp: f64,
    d: f64,
    eps: f64,
    zeta: f64,
    rho: f64,
    #[serde(rename = "C")]
    big_c: f64,
    h0: f64,
    s0: f64,
    n: u32,
    p: f64,
}

/// A nonlinearity, a left endpoint and the theorem parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    pub nonlinearity: Nonlinearity,
    pub t0: f64,
    #[serde(default)]
    pub params: Params,
}

impl ProblemInstance {
    pub fn new(nonlinearity: Nonlinearity, t0: f64, params: Params) -> Result<Self> {
        let inst = Self {
            nonlinearity,
            t0,
            params,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        self.nonlinearity.validate()?;
        let ts = self.nonlinearity.t_start();
        if !(self.t0 >= ts && self.t0.is_finite()) {
            return Err(Error::Domain {
                t: self.t0,
                t_start: ts,
            });
        }
        Ok(())
    }

    pub(crate) fn emden_fowler(&self) -> Result<(f64, &Coefficient)> {
        match &self.nonlinearity {
            Nonlinearity::EmdenFowler { lambda, q } => Ok((*lambda, q)),
            Nonlinearity::GeneralLipschitz { .. } => Err(Error::NotApplicable(
                "this check needs an Emden-Fowler nonlinearity".into(),
            )),
        }
    }

    fn require_t0_at_least_one(&self) -> Result<()> {
        if self.t0 >= 1.0 {
            Ok(())
        } else {
            Err(Error::BadParam(format!("t0 must be >= 1, got {}", self.t0)))
        }
    }
}

pub(crate) fn need(v: Option<f64>, name: &str) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(Error::BadParam(format!("parameter {name} is not finite: {x}"))),
        None => Err(Error::BadParam(format!("missing parameter {name}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    fn combine(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }
}

/// One tested inequality `value < threshold` (or `<=` when not strict).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub margin: f64,
    pub strict: bool,
    pub verdict: Verdict,
}

impl Condition {
    /// `value < threshold`, with `err` the combined uncertainty.
    pub fn less(name: &str, value: f64, threshold: f64, err: f64) -> Self {
        let margin = STRICT_MARGIN * threshold.abs() + err;
        let verdict = if value < threshold - margin {
            Verdict::Pass
        } else if value >= threshold + margin {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        Self {
            name: name.to_string(),
            value,
            threshold,
            margin,
            strict: true,
            verdict,
        }
    }

    /// `value <= threshold`; only the uncertainty is used as margin.
    pub fn at_most(name: &str, value: f64, threshold: f64, err: f64) -> Self {
        let verdict = if value + err <= threshold {
            Verdict::Pass
        } else if value - err > threshold {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        Self {
            name: name.to_string(),
            value,
            threshold,
            margin: err,
            strict: false,
            verdict,
        }
    }
}

/// The verdict of one theorem on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    /// headline constant and its threshold
    pub value: f64,
    pub threshold: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub conditions: Vec<Condition>,
    pub constants: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckEntry {
    fn new(name: &str, scheme: Option<Scheme>, headline: usize, conditions: Vec<Condition>) -> Self {
        let h = &conditions[headline];
        let verdict = conditions
            .iter()
            .fold(Verdict::Pass, |v, c| v.combine(c.verdict));
        Self {
            name: name.to_string(),
            scheme,
            value: h.value,
            threshold: h.threshold,
            margin: h.margin,
            verdict,
            conditions,
            constants: BTreeMap::new(),
            note: None,
        }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.constants.insert(key.to_string(), v);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }

    /// The contraction constant of the associated scheme.
    pub fn kappa(&self) -> Option<f64> {
        self.constant("kappa")
    }

    /// The first failing or inconclusive condition, for error reports.
    pub fn worst(&self) -> &Condition {
        self.conditions
            .iter()
            .find(|c| c.verdict == Verdict::Fail)
            .or_else(|| {
                self.conditions
                    .iter()
                    .find(|c| c.verdict == Verdict::Inconclusive)
            })
            .unwrap_or(&self.conditions[0])
    }

    pub fn to_error(&self) -> Error {
        let c = self.worst();
        Error::CriteriaFail {
            name: format!("{}: {}", self.name, c.name),
            value: c.value,
            threshold: c.threshold,
        }
    }
}

/// Largest change of `f` when its argument moves by `dx`.
fn sensitivity(f: impl Fn(f64) -> f64, x: f64, dx: f64) -> f64 {
    if dx == 0.0 {
        return 0.0;
    }
    let f0 = f(x);
    (f(x + dx) - f0).abs().max((f(x - dx) - f0).abs())
}

/// Atkinson's constant `eta = lambda int_{t0}^inf t q(t) dt < 1`.
///
/// A divergent tail is returned as an error; in that case every solution
/// oscillates.
pub fn check_atkinson(inst: &ProblemInstance) -> Result<CheckEntry> {
    let (lambda, q) = inst.emden_fowler()?;
    let i1 = q.weighted_tail(1.0, inst.t0)?;
    let eta = lambda * i1.value;
    let cond = Condition::less("eta < 1", eta, 1.0, lambda * i1.error);
    Ok(CheckEntry::new("atkinson", None, 0, vec![cond])
        .with("eta", eta)
        .with("integral_t_q", i1.value))
}

/// The exponent `p > 1` with `int t q < 1/lambda <= (p-1)/p < 1`.
pub fn select_p(inst: &ProblemInstance) -> Result<f64> {
    let (lambda, q) = inst.emden_fowler()?;
    let i1 = q.weighted_tail(1.0, inst.t0)?;
    select_p_from(lambda, i1)
}

fn select_p_from(lambda: f64, i1: Estimate) -> Result<f64> {
    let bound = 1.0 / lambda;
    if !(i1.value + i1.error < bound * (1.0 - STRICT_MARGIN)) {
        return Err(Error::NotApplicable(format!(
            "int t q = {} is not below 1/lambda = {bound}",
            i1.value
        )));
    }
    if lambda > 1.0 {
        Ok(lambda / (lambda - 1.0))
    } else {
        Ok(1.0 / (1.0 - i1.value * (1.0 + 1e-6)))
    }
}

/// Bounded solutions `x -> c` with `c/p <= x <= c`; contraction constant
/// `eta`. Needs `c in (0, 1]`.
pub fn check_theorem5(inst: &ProblemInstance) -> Result<CheckEntry> {
    let (lambda, q) = inst.emden_fowler()?;
    let c = need(inst.params.c, "c")?;
    let i1 = q.weighted_tail(1.0, inst.t0)?;
    let eta = lambda * i1.value;
    let mut conds = vec![
        Condition::less("eta < 1", eta, 1.0, lambda * i1.error),
        Condition::less("-c < 0", -c, 0.0, 0.0),
        Condition::at_most("c <= 1", c, 1.0, 0.0),
    ];
    let p_auto = select_p_from(lambda, i1).unwrap_or(f64::NAN);
    let p = match inst.params.p {
        Some(p) => {
            // a pinned p must still satisfy the chain
            let floor = if lambda > 1.0 { 1.0 / lambda } else { i1.value };
            conds.push(Condition::at_most(
                "1/lambda <= (p-1)/p",
                floor,
                (p - 1.0) / p,
                0.0,
            ));
            conds.push(Condition::less("(p-1)/p < 1", (p - 1.0) / p, 1.0, 0.0));
            conds.push(Condition::less(
                "int t q < (p-1)/p",
                i1.value,
                (p - 1.0) / p,
                i1.error,
            ));
            p
        }
        None => p_auto,
    };
    Ok(CheckEntry::new("theorem5", Some(Scheme::BoundedLimit), 0, conds)
        .with("eta", eta)
        .with("kappa", eta)
        .with("p", p)
        .with("p_auto", p_auto)
        .with("c", c)
        .with("lower", c / p))
}

/// `int_{t0}^inf (t - t0) f(t, M) dt` for the general nonlinearity.
fn general_double_tail_at(inst: &ProblemInstance, k: &Coefficient, m: f64) -> Result<Estimate> {
    let env = k.envelope();
    if env.scale == 0.0 {
        return Ok(Estimate::default());
    }
    if env.exponent <= 2.0 {
        return Err(Error::DivergentTail {
            weight: 1.0,
            exponent: env.exponent,
        });
    }
    let t0 = inst.t0;
    let nl = &inst.nonlinearity;
    quadrature::improper_tail(
        |t| (t - t0) * nl.f(t, m),
        t0,
        env.scale * m.abs(),
        env.exponent - 1.0,
        QuadTolerance::default(),
    )
}

/// `eta = int (t - t0) k < 1` and the worst-case bound
/// `int (t - t0) f(t, M) dt <= M` on `X_M = {0 <= u <= M}`.
pub fn check_dube_mingarelli(inst: &ProblemInstance, k: &Coefficient, m: f64) -> Result<CheckEntry> {
    if !(m > 0.0) {
        return Err(Error::BadParam(format!("M must be positive, got {m}")));
    }
    let eta = k.double_tail(inst.t0)?;
    let side = match &inst.nonlinearity {
        Nonlinearity::EmdenFowler { lambda, q } => q.double_tail(inst.t0)?.scale(m.powf(*lambda)),
        Nonlinearity::GeneralLipschitz { .. } => general_double_tail_at(inst, k, m)?,
    };
    let conds = vec![
        Condition::less("eta < 1", eta.value, 1.0, eta.error),
        Condition::at_most("int (t-t0) f(t,M) <= M", side.value, m, side.error),
    ];
    Ok(
        CheckEntry::new("dube_mingarelli", Some(Scheme::BoundedLimit), 0, conds)
            .with("eta", eta.value)
            .with("kappa", eta.value)
            .with("M", m)
            .with("worst_case_integral", side.value),
    )
}

/// The `chi` of the derivative-space theorem:
/// `zeta int k1 + int (t-t0) k1 + int k2 + (1/zeta) int (t-t0) k2 < 1`.
///
/// With `zeta = None` the minimizing `zeta` is used; when `k2` vanishes the
/// infimum is not attained and `zeta = min(1/2, (1 - eta) / (2 int k1))` is
/// taken instead.
pub fn check_theorem6(
    inst: &ProblemInstance,
    k1: &Coefficient,
    k2: &Coefficient,
    zeta: Option<f64>,
) -> Result<CheckEntry> {
    if let Some(z) = zeta {
        if !(z > 0.0) {
            return Err(Error::BadParam(format!("zeta must be positive, got {z}")));
        }
    }
    let t0 = inst.t0;
    let i_k1 = k1.weighted_tail(0.0, t0)?;
    let eta1 = k1.double_tail(t0)?;
    let i_k2 = k2.weighted_tail(0.0, t0)?;
    let eta2 = k2.double_tail(t0)?;
    let chi_of = |z: f64| z * i_k1.value + eta1.value + i_k2.value + eta2.value / z;
    let err_of = |z: f64| z * i_k1.error + eta1.error + i_k2.error + eta2.error / z;
    let zeta_auto = if i_k1.value > 0.0 && eta2.value > 0.0 {
        (eta2.value / i_k1.value).sqrt()
    } else if eta2.value > 0.0 {
        // k1 vanishes: chi decreases in zeta, any large value will do
        1e6
    } else if i_k1.value > 0.0 {
        (0.5f64).min((1.0 - eta1.value).max(0.0) / (2.0 * i_k1.value)).max(1e-12)
    } else {
        0.5
    };
    let z = zeta.unwrap_or(zeta_auto);
    let chi = chi_of(z);
    let conds = vec![Condition::less("chi < 1", chi, 1.0, err_of(z))];
    Ok(CheckEntry::new("theorem6", Some(Scheme::DerivativeSpace), 0, conds)
        .with("chi", chi)
        .with("kappa", chi)
        .with("zeta", z)
        .with("zeta_auto", zeta_auto)
        .with("chi_auto", chi_of(zeta_auto))
        .with("int_k1", i_k1.value)
        .with("int_t_k1", eta1.value)
        .with("int_k2", i_k2.value)
        .with("int_t_k2", eta2.value))
}

/// The derivative-space corollary: `k1 = k` the modulus on `[0, M]`,
/// `k2 = 0`, brackets `0 <= x' <= g` with `int g <= M`.
pub fn check_cor7(inst: &ProblemInstance) -> Result<CheckEntry> {
    let m = need(inst.params.m, "M")?;
    let k = inst.nonlinearity.modulus(m)?;
    let dm = check_dube_mingarelli(inst, &k, m)?;
    let t6 = check_theorem6(inst, &k, &Coefficient::zero(), inst.params.zeta)?;
    // int_{t0}^inf g where g(t) bounds int_t^inf f(s, u) ds on X_M
    let int_g = match &inst.nonlinearity {
        Nonlinearity::EmdenFowler { lambda, q } => q.double_tail(inst.t0)?.scale(m.powf(*lambda)),
        Nonlinearity::GeneralLipschitz { .. } => k.double_tail(inst.t0)?.scale(m),
    };
    let mut conds = vec![t6.conditions[0].clone()];
    conds.push(dm.conditions[0].clone());
    conds.push(Condition::at_most("int g <= M", int_g.value, m, int_g.error));
    let mut e = CheckEntry::new("corollary7", Some(Scheme::DerivativeSpace), 0, conds);
    e.constants = t6.constants;
    Ok(e.with("eta", dm.constants["eta"]).with("M", m).with("int_g", int_g.value))
}

/// Linear-like solutions `x = A t + o(t^(1-nu))`:
/// `lambda c_nu (A + c_nu)^(lambda-1) < 1 - nu` and
/// `int t^lambda q < c_nu / (A + c_nu)^lambda`.
pub fn check_cor9(inst: &ProblemInstance) -> Result<CheckEntry> {
    let (lambda, q) = inst.emden_fowler()?;
    inst.require_t0_at_least_one()?;
    let nu = need(inst.params.nu, "nu")?;
    let a = need(inst.params.big_a, "A")?;
    if !(0.0..1.0).contains(&nu) {
        return Err(Error::BadParam(format!("nu must lie in [0, 1), got {nu}")));
    }
    if !(a > 0.0) {
        return Err(Error::BadParam(format!("A must be positive, got {a}")));
    }
    let c_nu = q.weighted_tail(lambda + nu, inst.t0)?;
    let j = q.weighted_tail(lambda, inst.t0)?;
    let first = |c: f64| lambda * c * (a + c).powf(lambda - 1.0);
    let second = |c: f64| c / (a + c).powf(lambda);
    let varpi = lambda * (a + c_nu.value).powf(lambda - 1.0) * j.value / (1.0 - nu);
    let varpi_err = lambda * (a + c_nu.value).powf(lambda - 1.0) * j.error / (1.0 - nu)
        + sensitivity(
            |c| lambda * (a + c).powf(lambda - 1.0) * j.value / (1.0 - nu),
            c_nu.value,
            c_nu.error,
        );
    let conds = vec![
        Condition::less("varpi < 1", varpi, 1.0, varpi_err),
        Condition::less(
            "lambda c_nu (A + c_nu)^(lambda-1) < 1 - nu",
            first(c_nu.value),
            1.0 - nu,
            sensitivity(first, c_nu.value, c_nu.error),
        ),
        Condition::less(
            "int t^lambda q < c_nu / (A + c_nu)^lambda",
            j.value,
            second(c_nu.value),
            j.error + sensitivity(second, c_nu.value, c_nu.error),
        ),
    ];
    let mut e = CheckEntry::new("corollary9", Some(Scheme::LinearLike), 0, conds)
        .with("c_nu", c_nu.value)
        .with("varpi", varpi)
        .with("kappa", varpi)
        .with("int_t_lambda_q", j.value)
        .with("A", a)
        .with("nu", nu)
        .with("x0", a * inst.t0);
    if let Some(x0) = inst.params.x0 {
        if (x0 - a * inst.t0).abs() > 1e-12 * x0.abs().max(1.0) {
            e.note = Some(format!(
                "x0 = {x0} ignored: the corollary fixes x0 = A t0 = {}",
                a * inst.t0
            ));
        }
    }
    Ok(e)
}

/// The simpler sufficient pair
/// `lambda int t^(lambda + (2 - 1/lambda) nu) q < 1 - nu` and
/// `(A + 1)^lambda < t0^nu`.
pub fn check_cor9_claim(inst: &ProblemInstance) -> Result<CheckEntry> {
    let (lambda, q) = inst.emden_fowler()?;
    inst.require_t0_at_least_one()?;
    let nu = need(inst.params.nu, "nu")?;
    let a = need(inst.params.big_a, "A")?;
    let w = (2.0 - 1.0 / lambda) * nu;
    if !(w < 1.0) {
        return Err(Error::NotApplicable(format!(
            "(2 - 1/lambda) nu = {w} must be below 1"
        )));
    }
    let i = q.weighted_tail(lambda + w, inst.t0)?;
    let conds = vec![
        Condition::less(
            "lambda int t^(lambda+(2-1/lambda)nu) q < 1 - nu",
            lambda * i.value,
            1.0 - nu,
            lambda * i.error,
        ),
        Condition::less(
            "(A+1)^lambda < t0^nu",
            (a + 1.0).powf(lambda),
            inst.t0.powf(nu),
            0.0,
        ),
    ];
    Ok(CheckEntry::new("corollary9_claim", None, 0, conds).with("weighted_integral", i.value))
}

/// Solutions with `x = a t + O(t^(1-c))` and the weighted Wronskian bracket:
/// `lambda (a+eps)^(lambda-1) I_c < c` and
/// `b/t0 + (a+eps)^lambda I_c / (c t0^c) < eps`.
pub fn check_theorem10_cor11(inst: &ProblemInstance) -> Result<CheckEntry> {
    let (lambda, q) = inst.emden_fowler()?;
    inst.require_t0_at_least_one()?;
    let p = &inst.params;
    let a = need(p.a, "a")?;
    let b = need(p.b, "b")?;
    let c = need(p.c_exp, "c_exp")?;
    let eps = need(p.eps, "eps")?;
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::BadParam(format!("a, b must be nonnegative, got {a}, {b}")));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::BadParam(format!("c_exp must lie in (0, 1], got {c}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadParam(format!("eps must lie in (0, 1), got {eps}")));
    }
    let t0 = inst.t0;
    let ic = q.weighted_tail(lambda + c, t0)?;
    let j = q.weighted_tail(lambda, t0)?;
    let ae = a + eps;
    let lip = lambda * ae.powf(lambda - 1.0);
    let varsigma = lip * j.value / c;
    let second = b / t0 + ae.powf(lambda) * ic.value / (c * t0.powf(c));
    let conds = vec![
        Condition::less("varsigma < 1", varsigma, 1.0, lip * j.error / c),
        Condition::less(
            "lambda (a+eps)^(lambda-1) I_c < c",
            lip * ic.value,
            c,
            lip * ic.error,
        ),
        Condition::less(
            "b/t0 + (a+eps)^lambda I_c / (c t0^c) < eps",
            second,
            eps,
            ae.powf(lambda) * ic.error / (c * t0.powf(c)),
        ),
    ];
    Ok(
        CheckEntry::new("corollary11", Some(Scheme::WronskianWeighted), 0, conds)
            .with("I_c", ic.value)
            .with("varsigma", varsigma)
            .with("kappa", varsigma)
            .with("int_t_lambda_q", j.value),
    )
}

/// `max{lambda (c+d)^(lambda-1), (c+d)^lambda / d} int t^lambda q < 1`.
pub fn check_theorem12(inst: &ProblemInstance) -> Result<CheckEntry> {
    let (lambda, q) = inst.emden_fowler()?;
    inst.require_t0_at_least_one()?;
    let c = need(inst.params.c, "c")?;
    let d = need(inst.params.d, "d")?;
    if !(c >= 0.0) {
        return Err(Error::BadParam(format!("c must be nonnegative, got {c}")));
    }
    if !(d > 0.0) {
        return Err(Error::BadParam(format!("d must be positive, got {d}")));
    }
    let j = q.weighted_tail(lambda, inst.t0)?;
    let lip = lambda * (c + d).powf(lambda - 1.0);
    let factor = lip.max((c + d).powf(lambda) / d);
    let product = factor * j.value;
    let conds = vec![Condition::less(
        "max factor * int t^lambda q < 1",
        product,
        1.0,
        factor * j.error,
    )];
    Ok(CheckEntry::new("theorem12", Some(Scheme::SandwichLinear), 0, conds)
        .with("max_factor", factor)
        .with("J", j.value)
        .with("product", product)
        .with("vartheta", lip * j.value)
        .with("kappa", lip * j.value))
}

/// A check that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub entries: Vec<CheckEntry>,
    pub skipped: Vec<Skipped>,
    /// names of the passing checks
    pub applicable: Vec<String>,
    /// set when `int t q` diverges for an exactly known coefficient
    pub oscillatory: bool,
}

impl CriteriaReport {
    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// The first passing entry attached to a scheme.
    pub fn auto_scheme(&self) -> Option<Scheme> {
        self.entries
            .iter()
            .find(|e| e.passed() && e.scheme.is_some())
            .and_then(|e| e.scheme)
    }

    /// The entry that certifies `scheme`, if it was evaluated.
    pub fn for_scheme(&self, scheme: Scheme) -> Option<&CheckEntry> {
        let mut it = self.entries.iter().filter(|e| e.scheme == Some(scheme));
        let first = it.next()?;
        if first.passed() {
            return Some(first);
        }
        Some(it.find(|e| e.passed()).unwrap_or(first))
    }
}

/// Runs every check whose parameters are present.
pub fn check_all(inst: &ProblemInstance) -> CriteriaReport {
    let mut report = CriteriaReport {
        entries: vec![],
        skipped: vec![],
        applicable: vec![],
        oscillatory: false,
    };
    let p = &inst.params;
    let ef = matches!(inst.nonlinearity, Nonlinearity::EmdenFowler { .. });
    let run = |name: &str, r: Result<CheckEntry>, report: &mut CriteriaReport| match r {
        Ok(e) => report.entries.push(e),
        Err(err) => report.skipped.push(Skipped {
            name: name.to_string(),
            reason: err.to_string(),
        }),
    };
    if ef {
        let r = check_atkinson(inst);
        if let (Err(Error::DivergentTail { .. }), Nonlinearity::EmdenFowler { q, .. }) =
            (&r, &inst.nonlinearity)
        {
            report.oscillatory = q.envelope_is_exact() && !q.is_zero();
        }
        run("atkinson", r, &mut report);
        if p.c.is_some() {
            run("theorem5", check_theorem5(inst), &mut report);
        }
    }
    if let Some(m) = p.m {
        let dm = inst
            .nonlinearity
            .modulus(m)
            .and_then(|k| check_dube_mingarelli(inst, &k, m));
        run("dube_mingarelli", dm, &mut report);
        run("corollary7", check_cor7(inst), &mut report);
    }
    if ef && p.nu.is_some() && p.big_a.is_some() {
        run("corollary9", check_cor9(inst), &mut report);
        run("corollary9_claim", check_cor9_claim(inst), &mut report);
    }
    if ef && p.a.is_some() && p.c_exp.is_some() && p.eps.is_some() {
        let mut inst_b = inst.clone();
        inst_b.params.b.get_or_insert(0.0);
        run("corollary11", check_theorem10_cor11(&inst_b), &mut report);
    }
    if ef && p.c.is_some() && p.d.is_some() {
        run("theorem12", check_theorem12(inst), &mut report);
    }
    report.applicable = report
        .entries
        .iter()
        .filter(|e| e.passed())
        .map(|e| e.name.clone())
        .collect();
    report
}
