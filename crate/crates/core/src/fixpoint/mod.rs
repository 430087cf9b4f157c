//! Contraction operators of the five existence schemes and a certified
//! Picard iteration.
//!
//! A certified run stops once the a-posteriori bound
//! `kappa / (1 - kappa) * increment` falls below the requested tolerance. A
//! forced run (criteria not met) iterates without gate or bound and stops on
//! the raw increment.

mod mesh;
mod operator;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coefficients::Nonlinearity;
use crate::criteria::{self, CheckEntry, ProblemInstance, Scheme};
use crate::error::{Error, Result};
use crate::funcspace::{self, GridFunction, Metric, MAX_GRADING_RATIO};

pub use operator::{Image, Operator};

pub const DEFAULT_MAX_ITER: usize = 200;
/// Allowed excess of observed increment ratios over `kappa`.
pub const RATIO_SLACK: f64 = 0.05;
/// Relative tolerance of the candidate-set gate.
pub const GATE_TOLERANCE: f64 = 1e-9;
/// Default node ratio of geometric meshes.
pub const DEFAULT_RATIO: f64 = 1.005;
pub const MIN_NODES: usize = 16;
/// Increments below this fraction of the iterate size are treated as noise
/// when computing observed ratios.
const NOISE_FLOOR: f64 = 1e-13;

/// Scalars that pin down a scheme's candidate set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Setup {
    Bounded { limit: f64, lower: f64 },
    Derivative { m: f64, zeta: f64 },
    LinearLike { a: f64, x0: f64, c_nu: f64 },
    Wronskian { a: f64, b: f64, c: f64, eps: f64 },
    Sandwich { c: f64, d: f64 },
}

/// A scheme applied to a problem instance, with its metric and contraction
/// constant.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub scheme: Scheme,
    pub instance: ProblemInstance,
    pub metric: Metric,
    pub kappa: f64,
    /// false for forced runs whose criteria did not pass
    pub certified: bool,
    /// the criteria entry the constants came from
    pub entry: CheckEntry,
    pub(crate) setup: Setup,
}

impl OperatorSpec {
    /// A certified spec; fails with `CriteriaFail` unless the scheme's
    /// hypotheses pass.
    pub fn new(scheme: Scheme, instance: ProblemInstance) -> Result<Self> {
        let spec = Self::build(scheme, instance, true)?;
        if !spec.entry.passed() {
            return Err(spec.entry.to_error());
        }
        Ok(spec)
    }

    /// An uncertified spec built from the same constants whatever the
    /// verdict.
    pub fn forced(scheme: Scheme, instance: ProblemInstance) -> Result<Self> {
        Self::build(scheme, instance, false)
    }

    /// Replaces the contraction constant (for experiments and tests).
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    fn build(scheme: Scheme, instance: ProblemInstance, certified: bool) -> Result<Self> {
        instance.validate()?;
        let p = &instance.params;
        let ef = matches!(instance.nonlinearity, Nonlinearity::EmdenFowler { .. });
        let general_band = |m: f64| -> Result<()> {
            if ef {
                Ok(())
            } else {
                instance.nonlinearity.check_on_band(m, 200)
            }
        };
        let (entry, setup, metric) = match scheme {
            Scheme::BoundedLimit => {
                if ef && p.c.is_some() {
                    let e = criteria::check_theorem5(&instance)?;
                    let c = e.constants["c"];
                    let lower = e.constants["lower"];
                    let lower = if lower.is_finite() { lower } else { 0.0 };
                    (e, Setup::Bounded { limit: c, lower }, Metric::Sup)
                } else if let Some(m) = p.m {
                    general_band(m)?;
                    let k = instance.nonlinearity.modulus(m)?;
                    let e = criteria::check_dube_mingarelli(&instance, &k, m)?;
                    (e, Setup::Bounded { limit: m, lower: 0.0 }, Metric::Sup)
                } else {
                    return Err(Error::BadParam(
                        "bounded_limit needs c (Emden-Fowler) or M".into(),
                    ));
                }
            }
            Scheme::DerivativeSpace => {
                let m = criteria::need(p.m, "M")?;
                general_band(m)?;
                let e = criteria::check_cor7(&instance)?;
                let zeta = e.constants["zeta"];
                (e, Setup::Derivative { m, zeta }, Metric::L1PlusZetaSup { zeta })
            }
            Scheme::LinearLike => {
                let e = criteria::check_cor9(&instance)?;
                let setup = Setup::LinearLike {
                    a: e.constants["A"],
                    x0: e.constants["x0"],
                    c_nu: e.constants["c_nu"],
                };
                let nu = e.constants["nu"];
                (e, setup, Metric::WeightedSup { exponent: nu })
            }
            Scheme::WronskianWeighted => {
                let mut inst = instance.clone();
                inst.params.b.get_or_insert(0.0);
                let e = criteria::check_theorem10_cor11(&inst)?;
                let q = &inst.params;
                let c = criteria::need(q.c_exp, "c_exp")?;
                let setup = Setup::Wronskian {
                    a: criteria::need(q.a, "a")?,
                    b: criteria::need(q.b, "b")?,
                    c,
                    eps: criteria::need(q.eps, "eps")?,
                };
                (e, setup, Metric::WeightedSup { exponent: c })
            }
            Scheme::SandwichLinear => {
                let e = criteria::check_theorem12(&instance)?;
                let setup = Setup::Sandwich {
                    c: criteria::need(p.c, "c")?,
                    d: criteria::need(p.d, "d")?,
                };
                (e, setup, Metric::WeightedSup { exponent: -1.0 })
            }
        };
        let kappa = entry.kappa().unwrap_or(f64::NAN);
        Ok(Self {
            scheme,
            instance,
            metric,
            kappa,
            certified,
            entry,
            setup,
        })
    }

    /// Named scalars of the scheme for reports.
    pub fn constants(&self) -> BTreeMap<String, f64> {
        let mut out = self.entry.constants.clone();
        out.insert("kappa".into(), self.kappa);
        match self.setup {
            Setup::Bounded { limit, lower } => {
                out.insert("limit".into(), limit);
                out.insert("lower".into(), lower);
            }
            Setup::Derivative { m, zeta } => {
                out.insert("M".into(), m);
                out.insert("zeta".into(), zeta);
            }
            Setup::LinearLike { a, x0, c_nu } => {
                out.insert("A".into(), a);
                out.insert("x0".into(), x0);
                out.insert("c_nu".into(), c_nu);
            }
            Setup::Wronskian { a, b, c, eps } => {
                out.insert("a".into(), a);
                out.insert("b".into(), b);
                out.insert("c_exp".into(), c);
                out.insert("eps".into(), eps);
            }
            Setup::Sandwich { c, d } => {
                out.insert("c".into(), c);
                out.insert("d".into(), d);
            }
        }
        out
    }
}

/// Outcome of an iteration together with the a-posteriori error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub kappa: f64,
    pub certified: bool,
    pub converged: bool,
    pub iterations: usize,
    /// metric distance of the last two iterates
    pub final_increment: f64,
    /// `kappa / (1 - kappa) * final_increment`; absent for forced runs
    pub error_bound: Option<f64>,
    pub observed_ratio_max: f64,
    pub ratio_slack: f64,
    pub increments: Vec<f64>,
}

impl ContractionCertificate {
    /// Whether the observed contraction stayed within `kappa + slack`.
    pub fn ratio_consistent(&self) -> bool {
        self.observed_ratio_max <= self.kappa + self.ratio_slack
    }
}

/// Progress report passed to iteration observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub iteration: usize,
    pub increment: f64,
    pub ratio: Option<f64>,
}

impl Operator {
    /// Picard iteration from `u0` (the scheme's default start if `None`).
    pub fn iterate(
        &self,
        u0: Option<GridFunction>,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Image, ContractionCertificate)> {
        self.iterate_observed(u0, tol, max_iter, |_| {})
    }

    pub fn iterate_observed(
        &self,
        u0: Option<GridFunction>,
        tol: f64,
        max_iter: usize,
        mut observe: impl FnMut(&Step),
    ) -> Result<(Image, ContractionCertificate)> {
        let spec = self.spec();
        let kappa = spec.kappa;
        if spec.certified && !(0.0..1.0).contains(&kappa) {
            return Err(Error::CriteriaFail {
                name: "kappa < 1".into(),
                value: kappa,
                threshold: 1.0,
            });
        }
        if !(tol > 0.0) {
            return Err(Error::BadParam(format!("tolerance must be positive, got {tol}")));
        }
        if max_iter == 0 {
            return Err(Error::BadParam("max_iter must be at least 1".into()));
        }
        let mut u = u0.unwrap_or_else(|| self.initial());
        if spec.certified {
            self.check_candidate(&u)?;
        }
        let mut prev = self.measured_input(&u)?;
        let mut increments: Vec<f64> = Vec::new();
        let mut ratio_max: f64 = 0.0;
        let mut growth = 0;
        let threshold = if kappa > 0.0 {
            tol * (1.0 - kappa) / kappa
        } else {
            f64::INFINITY
        };
        let mut last: Option<Image> = None;
        for it in 1..=max_iter {
            let img = if spec.certified {
                self.apply(&u)?
            } else {
                self.evaluate(&u)?
            };
            let meas = self.measured(&img);
            let inc = funcspace::distance(&spec.metric, meas, &prev)?;
            let finite = img.iterate.values().iter().all(|v| v.is_finite());
            if !inc.is_finite() || !finite {
                return Err(Error::NoConvergence {
                    iterations: it,
                    observed_ratio: ratio_max,
                });
            }
            let scale = meas.values().iter().fold(1.0f64, |a, v| a.max(v.abs()));
            let ratio = increments
                .last()
                .filter(|&&p| p > NOISE_FLOOR * scale)
                .map(|p| inc / p);
            if let Some(r) = ratio {
                ratio_max = ratio_max.max(r);
                growth = if r > 1.0 { growth + 1 } else { 0 };
            }
            increments.push(inc);
            observe(&Step {
                iteration: it,
                increment: inc,
                ratio,
            });
            log::debug!("iteration {it}: increment {inc:e}");
            let done = if spec.certified {
                inc <= threshold
            } else {
                inc <= tol
            };
            prev = meas.clone();
            u = img.iterate.clone();
            last = Some(img);
            if done {
                return Ok((
                    last.unwrap(),
                    self.certificate(true, increments, ratio_max),
                ));
            }
            if !spec.certified && growth >= 5 {
                return Err(Error::NoConvergence {
                    iterations: it,
                    observed_ratio: ratio_max,
                });
            }
        }
        if ratio_max >= 1.0 {
            return Err(Error::NoConvergence {
                iterations: max_iter,
                observed_ratio: ratio_max,
            });
        }
        Ok((
            last.expect("at least one iteration"),
            self.certificate(false, increments, ratio_max),
        ))
    }

    fn certificate(&self, converged: bool, increments: Vec<f64>, ratio_max: f64) -> ContractionCertificate {
        let spec = self.spec();
        let inc = *increments.last().unwrap_or(&0.0);
        let error_bound = spec
            .certified
            .then(|| spec.kappa / (1.0 - spec.kappa) * inc);
        ContractionCertificate {
            kappa: spec.kappa,
            certified: spec.certified,
            converged,
            iterations: increments.len(),
            final_increment: inc,
            error_bound,
            observed_ratio_max: ratio_max,
            ratio_slack: RATIO_SLACK,
            increments,
        }
    }
}

/// Picard iteration on the nodes of `u0`.
pub fn iterate(
    spec: &OperatorSpec,
    u0: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<(GridFunction, ContractionCertificate)> {
    let op = Operator::new(spec.clone(), u0.nodes().to_vec())?;
    let (img, cert) = op.iterate(Some(u0.clone()), tol, max_iter)?;
    Ok((img.iterate, cert))
}

fn apply_scheme(scheme: Scheme, u: &GridFunction, spec: &OperatorSpec) -> Result<GridFunction> {
    if spec.scheme != scheme {
        return Err(Error::BadParam(format!(
            "spec is for {:?}, not {:?}",
            spec.scheme, scheme
        )));
    }
    let op = Operator::new(spec.clone(), u.nodes().to_vec())?;
    Ok(op.apply(u)?.iterate)
}

pub fn apply_t_bounded(u: &GridFunction, spec: &OperatorSpec) -> Result<GridFunction> {
    apply_scheme(Scheme::BoundedLimit, u, spec)
}

pub fn apply_t_derivative(v: &GridFunction, spec: &OperatorSpec) -> Result<GridFunction> {
    apply_scheme(Scheme::DerivativeSpace, v, spec)
}

pub fn apply_t_linearlike(u: &GridFunction, spec: &OperatorSpec) -> Result<GridFunction> {
    apply_scheme(Scheme::LinearLike, u, spec)
}

pub fn apply_t_wronskian(v: &GridFunction, spec: &OperatorSpec) -> Result<GridFunction> {
    apply_scheme(Scheme::WronskianWeighted, v, spec)
}

pub fn apply_t_sandwich(u: &GridFunction, spec: &OperatorSpec) -> Result<GridFunction> {
    apply_scheme(Scheme::SandwichLinear, u, spec)
}

/// Mesh request; missing fields are derived from the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
}

fn default_ratio() -> f64 {
    DEFAULT_RATIO
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t_max: None,
            n: None,
            ratio: DEFAULT_RATIO,
        }
    }
}

impl GridSpec {
    pub fn resolve(&self, spec: &OperatorSpec, tol: f64) -> Result<Vec<f64>> {
        let t0 = spec.instance.t0;
        let t_max = self.t_max.unwrap_or_else(|| suggest_tmax(spec, tol));
        if !(t_max > t0) {
            return Err(Error::BadGrid(format!("t_max = {t_max} must exceed t0 = {t0}")));
        }
        let n = match self.n {
            Some(n) => n,
            None => {
                if !(self.ratio > 1.0) {
                    return Err(Error::BadGrid(format!("ratio must exceed 1, got {}", self.ratio)));
                }
                ((t_max / t0).ln() / self.ratio.ln()).ceil() as usize
            }
        }
        .max(if self.n.is_some() { 0 } else { MIN_NODES });
        if n < MIN_NODES {
            return Err(Error::BadGrid(format!("need at least {MIN_NODES} cells, got {n}")));
        }
        let nodes = funcspace::make_grid(t0, t_max, n)?;
        let r = funcspace::grading_ratio(&nodes);
        if r > MAX_GRADING_RATIO {
            return Err(Error::BadGrid(format!(
                "node ratio {r} exceeds {MAX_GRADING_RATIO}; use more nodes"
            )));
        }
        Ok(nodes)
    }
}

/// Truncation point where the scheme's tail contribution, bounded through
/// the coefficient envelope, drops below `tol / 10`; clamped to
/// `[10 t0, 1e8]`.
pub fn suggest_tmax(spec: &OperatorSpec, tol: f64) -> f64 {
    let t0 = spec.instance.t0;
    let (env, lambda) = match &spec.instance.nonlinearity {
        Nonlinearity::EmdenFowler { lambda, q } => (q.envelope(), *lambda),
        Nonlinearity::GeneralLipschitz { k, .. } => (k.envelope(), 1.0),
    };
    let (cc, p) = (env.scale, env.exponent);
    let (k, a) = match spec.setup {
        Setup::Bounded { limit, .. } => (
            cc * limit.powf(lambda) / ((p - 1.0) * (p - 2.0)),
            p - 2.0,
        ),
        Setup::Derivative { m, .. } => (cc * m.powf(lambda) / ((p - 1.0) * (p - 2.0)), p - 2.0),
        Setup::LinearLike { a, c_nu, .. } => {
            let nu = match spec.metric {
                Metric::WeightedSup { exponent } => exponent,
                _ => 0.0,
            };
            let e = p - lambda - 1.0;
            ((a + c_nu).powf(lambda) * cc / e, e - nu)
        }
        Setup::Wronskian { a, c, eps, .. } => {
            let e = p - lambda - 1.0 - c;
            ((a + eps).powf(lambda) * cc / e, e)
        }
        Setup::Sandwich { c, d } => {
            let e = p - lambda - 1.0;
            ((c + d).powf(lambda) * cc / e, e)
        }
    };
    let lo = 10.0 * t0;
    if !(k > 0.0 && a > 0.0 && tol > 0.0) {
        return lo;
    }
    let t = (10.0 * k / tol).powf(1.0 / a);
    if t.is_finite() {
        t.clamp(lo, 1e8f64.max(lo))
    } else {
        1e8f64.max(lo)
    }
}

/// A solved instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub scheme: Scheme,
    pub constants: BTreeMap<String, f64>,
    pub certificate: ContractionCertificate,
    pub solution: GridFunction,
    pub derivative: GridFunction,
    #[serde(skip)]
    pub iterate: Option<GridFunction>,
}

/// Builds the mesh, iterates from the default start and packages the result.
pub fn solve(spec: &OperatorSpec, grid: &GridSpec, tol: f64, max_iter: usize) -> Result<Solution> {
    let nodes = grid.resolve(spec, tol)?;
    let op = Operator::new(spec.clone(), nodes)?;
    let (img, certificate) = op.iterate(None, tol, max_iter)?;
    Ok(Solution {
        scheme: spec.scheme,
        constants: spec.constants(),
        certificate,
        solution: img.x,
        derivative: img.xprime,
        iterate: Some(img.iterate),
    })
}
