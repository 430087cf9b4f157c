use thiserror::Error;

/// Errors raised by the asymptotic-integration toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("t = {t} lies outside the domain [{t_start}, +inf)")]
    Domain { t: f64, t_start: f64 },

    #[error("coefficient evaluated to a negative value {value} at t = {t}")]
    NegativeCoefficient { t: f64, value: f64 },

    #[error("improper integral may diverge: envelope exponent {exponent} <= weight {weight} + 1")]
    DivergentTail { weight: f64, exponent: f64 },

    #[error("quadrature failed to reach tolerance: {0}")]
    QuadratureFailure(String),

    #[error("bad grid: {0}")]
    BadGrid(String),

    #[error("grid functions are defined on different node sets")]
    GridMismatch,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("bad parameter: {0}")]
    BadParam(String),

    #[error("candidate leaves the invariant set at t = {t}: value {value} not in [{lower}, {upper}]")]
    CandidateOutOfSet {
        t: f64,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("no convergence after {iterations} iterations (observed ratio {observed_ratio})")]
    NoConvergence {
        iterations: usize,
        observed_ratio: f64,
    },

    #[error("criteria not satisfied: {name} = {value} (threshold {threshold})")]
    CriteriaFail {
        name: String,
        value: f64,
        threshold: f64,
    },

    #[error("step size underflow at t = {0}")]
    StepFailure(f64),

    #[error("sub/supersolution ordering violated at node {index} (s = {s}): h1/s = {lower} > h2/s = {upper}")]
    OrderingViolated {
        index: usize,
        s: f64,
        lower: f64,
        upper: f64,
    },

    #[error("expression error: {0}")]
    Expression(String),
}

pub type Result<T> = std::result::Result<T, Error>;
