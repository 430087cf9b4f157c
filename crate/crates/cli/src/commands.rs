use std::collections::BTreeMap;

use asympt_core::criteria::{check_all, CriteriaReport, ProblemInstance, Scheme};
use asympt_core::error::Error;
use asympt_core::fixpoint::{solve, OperatorSpec};
use asympt_core::funcspace::GridFunction;
use asympt_core::io::{fmt_f64, to_json_string};
use asympt_core::pde_radial::{self, RadialPdeInstance};
use asympt_core::verify::{oscillation_demo, verify_profile, OscillationReport, ProfileCheck, SolutionProfile, Verification};
use serde::{Deserialize, Serialize};

use crate::config::{Problem, RunConfig, SchemeChoice};

/// Exit status by outcome category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Error = 1,
    /// hypotheses fail or checks reject the result
    Rejected = 2,
    NoConvergence = 3,
}

impl Status {
    pub fn of(err: &Error) -> Status {
        match err {
            Error::CriteriaFail { .. } | Error::NotApplicable(_) | Error::OrderingViolated { .. } => {
                Status::Rejected
            }
            Error::NoConvergence { .. } => Status::NoConvergence,
            _ => Status::Error,
        }
    }

    pub fn code(self) -> i32 {
        self as i32
    }
}

/// What a command produced: the JSON report, extra files and the status.
#[derive(Debug, Clone)]
pub struct Emitted {
    pub name: &'static str,
    pub json: String,
    pub files: Vec<(String, String)>,
    pub status: Status,
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            status: Status::of(&e),
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<Emitted, Failure>;

fn usage(message: &str) -> Failure {
    Failure {
        status: Status::Error,
        message: message.into(),
    }
}

fn ode(cfg: &RunConfig) -> Result<&ProblemInstance, Failure> {
    match &cfg.problem {
        Problem::Ode(inst) => Ok(inst),
        Problem::RadialPde(_) => Err(usage("this command needs a problem of type \"ode\"")),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    to_json_string(v).expect("reports serialize")
}

fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

pub fn cmd_check(cfg: &RunConfig) -> CmdResult {
    let inst = ode(cfg)?;
    let report = check_all(inst);
    for e in &report.entries {
        log::info!("{}: {:?} (value {}, threshold {})", e.name, e.verdict, e.value, e.threshold);
    }
    let status = if report.applicable.is_empty() {
        Status::Rejected
    } else {
        Status::Ok
    };
    Ok(Emitted {
        name: "check",
        json: json(&report),
        files: vec![],
        status,
    })
}

/// Saved by `solve`, read back by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// "certified" or "uncertified"
    pub status: String,
    pub profile: SolutionProfile,
    pub verification: Verification,
}

fn pick_scheme(cfg: &RunConfig, report: &CriteriaReport) -> Result<Scheme, Failure> {
    match cfg.scheme {
        SchemeChoice::Explicit(s) => Ok(s),
        SchemeChoice::Auto => report.auto_scheme().ok_or_else(|| Failure {
            status: Status::Rejected,
            message: "no scheme's criteria pass; name a scheme explicitly to run it with --force".into(),
        }),
    }
}

fn operator_spec(scheme: Scheme, inst: &ProblemInstance, force: bool) -> Result<OperatorSpec, Failure> {
    match OperatorSpec::new(scheme, inst.clone()) {
        Ok(spec) => Ok(spec),
        Err(Error::CriteriaFail { .. }) if force => {
            log::warn!("criteria fail for {scheme:?}; running uncertified");
            Ok(OperatorSpec::forced(scheme, inst.clone())?)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_solve(cfg: &RunConfig, force: bool) -> CmdResult {
    let inst = ode(cfg)?;
    let scheme = pick_scheme(cfg, &check_all(inst))?;
    let spec = operator_spec(scheme, inst, force)?;
    let t = &cfg.tolerances;
    let sol = solve(&spec, &cfg.grid, t.tol, t.max_iter)?;
    log::info!(
        "{scheme:?}: {} iterations, error bound {:?}",
        sol.certificate.iterations,
        sol.certificate.error_bound
    );
    let profile = SolutionProfile::from_solution(&sol, inst);
    let verification = verify_profile(&profile, t.rk_rtol)?;
    if !verification.passed() {
        log::warn!("verification reports failing checks");
    }
    let rows = profile
        .x
        .nodes()
        .iter()
        .zip(profile.x.values())
        .zip(profile.xprime.values())
        .map(|((&t, &x), &v)| vec![t, x, v]);
    let csv = csv_table(&["t", "x", "xprime"], rows);
    let report = SolveReport {
        status: if sol.certificate.certified { "certified" } else { "uncertified" }.into(),
        profile,
        verification,
    };
    // an exhausted iteration budget still writes its last iterate
    let status = if sol.certificate.converged {
        Status::Ok
    } else {
        log::warn!("not converged after {} iterations", sol.certificate.iterations);
        Status::NoConvergence
    };
    Ok(Emitted {
        name: "solve",
        json: json(&report),
        files: vec![("solution.csv".into(), csv)],
        status,
    })
}

pub fn cmd_verify(saved: &str, rk_rtol: Option<f64>) -> CmdResult {
    let report: SolveReport = serde_json::from_str(saved).map_err(|e| usage(&format!("bad solve report: {e}")))?;
    let verification = verify_profile(&report.profile, rk_rtol)?;
    let status = if verification.passed() {
        Status::Ok
    } else {
        Status::Rejected
    };
    Ok(Emitted {
        name: "verify",
        json: json(&verification),
        files: vec![],
        status,
    })
}

#[derive(Serialize)]
struct OscillationOutput<'a> {
    /// `int t q` diverges for an exact coefficient envelope
    atkinson_divergent: bool,
    eta: Option<f64>,
    #[serde(flatten)]
    report: &'a OscillationReport,
}

pub fn cmd_oscillate(cfg: &RunConfig) -> CmdResult {
    let inst = ode(cfg)?;
    let o = &cfg.oscillation;
    let criteria = check_all(inst);
    let (x0, v0) = if o.from_solution {
        let scheme = pick_scheme(cfg, &criteria)?;
        let spec = OperatorSpec::new(scheme, inst.clone())?;
        let sol = solve(&spec, &cfg.grid, cfg.tolerances.tol, cfg.tolerances.max_iter)?;
        (sol.solution.eval(inst.t0), sol.derivative.eval(inst.t0))
    } else {
        (o.x0, o.v0)
    };
    let report = oscillation_demo(&inst.nonlinearity, inst.t0, o.t_end, x0, v0)?;
    log::info!("{} zero crossings on [{}, {}]", report.count, inst.t0, o.t_end);
    let out = OscillationOutput {
        atkinson_divergent: criteria.oscillatory,
        eta: criteria.entry("atkinson").and_then(|e| e.constant("eta")),
        report: &report,
    };
    let csv = csv_table(&["t", "x", "xprime"], report.trajectory.iter().map(|s| s.to_vec()));
    Ok(Emitted {
        name: "crossings",
        json: json(&out),
        files: vec![("trajectory.csv".into(), csv)],
        status: Status::Ok,
    })
}

#[derive(Serialize)]
struct PdeOutput<'a> {
    instance: &'a RadialPdeInstance,
    h1: &'a GridFunction,
    h2: &'a GridFunction,
    bounds: BTreeMap<&'static str, f64>,
    h1_residual: f64,
    constants: &'a BTreeMap<String, f64>,
    checks: Vec<&'a ProfileCheck>,
    passed: bool,
}

pub fn cmd_pde(cfg: &RunConfig) -> CmdResult {
    let inst = match &cfg.problem {
        Problem::RadialPde(inst) => inst,
        Problem::Ode(_) => return Err(usage("pde needs a problem of type \"radial_pde\"")),
    };
    // an inadmissible h0 is a failed hypothesis, like failing criteria
    inst.check_h0().map_err(|e| Failure {
        status: Status::Rejected,
        message: e.to_string(),
    })?;
    let t = &cfg.tolerances;
    let report = pde_radial::run(inst, &cfg.grid, t.tol, t.max_iter, t.samples)?;
    let (sup, sub, prof) = (&report.supersolution, &report.subsolution, &report.profile);
    let out = PdeOutput {
        instance: inst,
        h1: &sub.h1,
        h2: &sup.h2,
        bounds: BTreeMap::from([("lower", prof.lower), ("upper", prof.upper)]),
        h1_residual: sub.residual,
        constants: &sup.constants,
        checks: sup.checks.iter().chain(&sub.checks).chain(&prof.checks).collect(),
        passed: report.passed,
    };
    let csv = csv_table(&["r", "u1", "u2"], prof.samples.iter().map(|s| vec![s.r, s.u1, s.u2]));
    Ok(Emitted {
        name: "pde",
        json: json(&out),
        files: vec![("sandwich.csv".into(), csv)],
        status: if report.passed { Status::Ok } else { Status::Rejected },
    })
}
