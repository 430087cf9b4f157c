mod common;

use asympt_core::coefficients::{Coefficient, Nonlinearity};
use asympt_core::criteria::{Params, Scheme};
use asympt_core::fixpoint::{solve, GridSpec, OperatorSpec};
use asympt_core::funcspace::Tail;
use asympt_core::verify::*;
use common::*;

fn manufactured_profile(n: Option<usize>) -> SolutionProfile {
    let params = Params {
        c: Some(1.0),
        ..Params::default()
    };
    let inst = ef(3.0, manufactured_q(0.01), 1.0, params);
    let spec = OperatorSpec::new(Scheme::BoundedLimit, inst.clone()).unwrap();
    let grid = GridSpec {
        t_max: n.map(|_| 1e3),
        n,
        ..GridSpec::default()
    };
    let sol = solve(&spec, &grid, 1e-10, 200).unwrap();
    SolutionProfile::from_solution(&sol, &inst)
}

fn theorem12_profile(t_max: f64) -> SolutionProfile {
    let params = Params {
        c: Some(1.0),
        d: Some(0.5),
        ..Params::default()
    };
    let inst = ef(3.0, power(0.1, 5.0), 1.0, params);
    let spec = OperatorSpec::new(Scheme::SandwichLinear, inst.clone()).unwrap();
    let grid = GridSpec {
        t_max: Some(t_max),
        ..GridSpec::default()
    };
    let sol = solve(&spec, &grid, 1e-10, 200).unwrap();
    SolutionProfile::from_solution(&sol, &inst)
}

fn constant_profile(c: f64) -> SolutionProfile {
    let params = Params {
        c: Some(c),
        ..Params::default()
    };
    let inst = ef(3.0, Coefficient::zero(), 1.0, params);
    let nodes = grid(1.0, 100.0, 200);
    SolutionProfile {
        scheme: Scheme::BoundedLimit,
        instance: inst,
        constants: Default::default(),
        x: func(&nodes, |_| c, Tail::Constant { value: c }),
        xprime: func(&nodes, |_| 0.0, Tail::Zero),
        certificate: None,
    }
}

fn scaled(p: &SolutionProfile, s: f64) -> SolutionProfile {
    let mut out = p.clone();
    let nodes = p.x.nodes();
    out.x = func(nodes, |t| s * p.x.eval(t), Tail::Constant { value: s * p.x.last_value() });
    out.xprime = func(nodes, |t| s * p.xprime.eval(t), Tail::Zero);
    out
}

#[test]
fn trivial_profile_is_exact() {
    let p = constant_profile(0.7);
    assert_eq!(residual(&p, 100).max, 0.0);
    assert!(check_derivative_consistency(&p) < 1e-12);
    let report = check_profiles(&p).unwrap();
    assert!(report.passed, "{report:?}");
    let rk = rk_crosscheck(&p, 1e-10, None).unwrap();
    assert_eq!(rk.max_deviation, 0.0);
}

#[test]
fn manufactured_residual_and_consistency() {
    let p = manufactured_profile(None);
    let r = residual(&p, 2000);
    assert!(r.max <= 1e-6, "{r:?}");
    assert!(r.samples >= 1000);
    let d = check_derivative_consistency(&p);
    assert!(d <= 1e-6, "{d}");
    let report = check_profiles(&p).unwrap();
    assert!(report.passed, "{report:?}");

    let bad = scaled(&p, 1.1);
    let rb = residual(&bad, 2000);
    assert!(rb.max > 10.0 * r.max, "{} vs {}", rb.max, r.max);
    assert!(!check_profiles(&bad).unwrap().passed);
}

#[test]
fn residual_shrinks_under_refinement() {
    let coarse = residual(&manufactured_profile(Some(400)), 4000).max;
    let fine = residual(&manufactured_profile(Some(800)), 4000).max;
    assert!(coarse >= 4.0 * fine, "{coarse} vs {fine}");
}

#[test]
fn injected_derivative_mismatch() {
    let inst = ef(3.0, Coefficient::zero(), 1.0, Params::default());
    let nodes = grid(1.0, 10.0, 50);
    let p = SolutionProfile {
        scheme: Scheme::SandwichLinear,
        instance: inst,
        constants: Default::default(),
        x: func(&nodes, |t| t, Tail::LinearAffine { slope: 1.0, intercept: 0.0 }),
        xprime: func(&nodes, |_| 0.0, Tail::Zero),
        certificate: None,
    };
    assert!((check_derivative_consistency(&p) - 1.0).abs() < 1e-9);
}

#[test]
fn manufactured_agrees_with_rk() {
    let p = manufactured_profile(None);
    let rk = rk_crosscheck(&p, 1e-10, Some(50.0)).unwrap();
    assert!(rk.max_deviation <= 1e-6, "{rk:?}");
    assert!(rk.agrees);
}

#[test]
fn theorem12_strict_chain_and_rk() {
    let p = theorem12_profile(1e4);
    let report = check_profiles(&p).unwrap();
    assert!(report.passed, "{report:?}");
    let strict = report.checks.iter().find(|c| c.name.starts_with("x' < x/t")).unwrap();
    assert!(strict.value > 0.0);
    let rk = rk_crosscheck(&p, 1e-10, Some(100.0)).unwrap();
    assert!(rk.envelope_ratio <= 1.0, "{rk:?}");
    assert!(rk.agrees);

    assert!(!check_profiles(&scaled(&p, 1.6)).unwrap().passed);
}

#[test]
fn oscillation_with_divergent_atkinson_integral() {
    let nl = Nonlinearity::emden_fowler(3.0, Coefficient::power_decay(1.0, 0.0).unwrap()).unwrap();
    let r = oscillation_demo(&nl, 1.0, 50.0, 1.0, 0.0).unwrap();
    assert!(r.count >= 5 && r.oscillatory, "{}", r.count);
    for w in r.crossings.windows(2) {
        assert!(w[0] < w[1]);
    }
    // located to bisection precision: a single step from a crossing lands near zero
    let c = r.crossings[0];
    let near = r.trajectory.iter().min_by(|a, b| (a[0] - c).abs().total_cmp(&(b[0] - c).abs())).unwrap();
    assert!((near[0] - c).abs() < 1.0);
}

#[test]
fn no_oscillation_from_fixed_point_data() {
    let params = Params {
        c: Some(1.0),
        ..Params::default()
    };
    let inst = ef(3.0, power(0.5, 4.0), 1.0, params);
    let spec = OperatorSpec::new(Scheme::BoundedLimit, inst.clone()).unwrap();
    let sol = solve(&spec, &GridSpec::default(), 1e-10, 200).unwrap();
    let (x0, v0) = (sol.solution.eval(1.0), sol.derivative.eval(1.0));
    let r = oscillation_demo(&inst.nonlinearity, 1.0, 200.0, x0, v0).unwrap();
    assert_eq!(r.count, 0);
    assert!(!r.oscillatory);
}

#[test]
fn unit_start_crosses_once_in_nonoscillatory_regime() {
    // from (1, 0) the solution turns over once and then tends to a line
    let nl = Nonlinearity::emden_fowler(3.0, power(0.5, 4.0)).unwrap();
    let r = oscillation_demo(&nl, 1.0, 200.0, 1.0, 0.0).unwrap();
    assert_eq!(r.count, 1);
}

#[test]
fn zero_coefficient_is_linear() {
    let nl = Nonlinearity::emden_fowler(3.0, Coefficient::zero()).unwrap();
    let r = oscillation_demo(&nl, 1.0, 20.0, 1.0, 0.5).unwrap();
    assert_eq!(r.count, 0);
    for s in &r.trajectory {
        assert!((s[1] - (1.0 + 0.5 * (s[0] - 1.0))).abs() < 1e-12);
    }
}
