mod common;

use asympt_core::coefficients::Coefficient;
use asympt_core::error::Error;
use asympt_core::fixpoint::GridSpec;
use asympt_core::pde_radial::*;
use common::*;

fn bundle(a: Coefficient, g: Coefficient, h0: f64) -> RadialPdeInstance {
    RadialPdeInstance {
        n: 3,
        big_a: 0.5,
        a,
        g,
        eps: 1.0,
        big_c: 0.5,
        rho: 0.5,
        h0,
        s0: 1.0,
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn transformed_potential_closed_forms() {
    let mut inst = bundle(power(0.3, 4.0), Coefficient::zero(), 0.1);
    for s in [1.0f64, 2.5, 40.0] {
        assert!((transformed_q(&inst, s).unwrap() - 0.3 * s.powi(-4)).abs() < 1e-15);
    }
    inst.n = 4;
    inst.s0 = 2.0;
    for s in [2.0f64, 3.0, 100.0] {
        let want = 0.3 / (2.0 * s.powi(3));
        assert!((transformed_q(&inst, s).unwrap() - want).abs() < 1e-14 * want);
    }
    inst.a = Coefficient::zero();
    assert_eq!(transformed_q(&inst, 5.0).unwrap(), 0.0);
}

#[test]
fn change_of_variables_identity() {
    for (n, s0, a) in [
        (4, 2.0, power(0.3, 4.0)),
        (5, 3.0, power(1.0, 3.5)),
        (3, 1.0, Coefficient::exp_decay(2.0, 0.7).unwrap()),
        (4, 2.0, Coefficient::exp_decay(2.0, 0.7).unwrap()),
    ] {
        let inst = RadialPdeInstance {
            n,
            s0,
            ..bundle(a.clone(), Coefficient::zero(), 0.1)
        };
        let lhs = inst.potential().unwrap().weighted_tail(1.0, s0).unwrap().value;
        let r0 = beta_map(n, s0).unwrap();
        let rhs = a.weighted_tail(1.0, r0).unwrap().value / f64::from(n - 2);
        assert!((lhs - rhs).abs() < 1e-8 * rhs, "n={n}: {lhs} vs {rhs}");
    }
}

#[test]
fn drift_of_inverse_radius_is_constant() {
    let inst = bundle(power(0.05, 4.0), power(1.5, 1.0), 0.1);
    for s in [1.0, 7.0, 1e3] {
        assert!((drift_k(&inst, s).unwrap() - 1.5).abs() < 1e-14);
    }
}

#[test]
fn supersolution_bundle() {
    let inst = bundle(power(0.05, 4.0), power(1.0, 1.0), 0.2);
    let sup = build_supersolution(&inst, &GridSpec::default(), 1e-10, 200).unwrap();
    assert!((sup.constants["product"] - 0.05).abs() < 1e-12, "{:?}", sup.constants);
    assert!(sup.certificate.converged);
    for c in &sup.checks {
        assert!(c.passed, "{c:?}");
    }
}

#[test]
fn strong_potential_is_rejected() {
    let inst = bundle(power(10.0, 4.0), Coefficient::zero(), 0.2);
    let err = build_supersolution(&inst, &GridSpec::default(), 1e-10, 200).unwrap_err();
    assert!(matches!(err, Error::CriteriaFail { .. }), "{err}");
}

#[test]
fn zero_potential_gives_linear_supersolution() {
    let inst = bundle(Coefficient::zero(), Coefficient::zero(), 0.2);
    let grid = GridSpec {
        t_max: Some(100.0),
        ..GridSpec::default()
    };
    let sup = build_supersolution(&inst, &grid, 1e-10, 200).unwrap();
    assert!(max_abs_err(&sup.h2, |s| 0.25 * s) < 1e-14);
    assert!(sup.checks.iter().all(|c| c.passed), "{:?}", sup.checks);
}

#[test]
fn subsolution_without_drift() {
    let inst = bundle(Coefficient::zero(), Coefficient::zero(), 0.2);
    let nodes = grid(1.0, 1e3, 1400);
    let sub = build_subsolution(&inst, &nodes).unwrap();
    assert!(max_abs_err(&sub.h1, |s| s * (0.2 - 1.0) + 1.0) < 1e-11);
    assert!(max_abs_err(&sub.h1prime, |_| -0.8) < 1e-12);
    assert!(sub.residual < 1e-9, "{}", sub.residual);
    assert!(sub.checks[0].passed);
}

#[test]
fn subsolution_with_inverse_radius_drift() {
    let gamma = 1.0;
    let inst = bundle(power(0.05, 4.0), power(gamma, 1.0), 0.2);
    let nodes = grid(1.0, 1e3, 1400);
    let sub = build_subsolution(&inst, &nodes).unwrap();
    for s in [1.5f64, 4.0, 30.0, 1e3] {
        // the integrand is below e^-59 past 60
        let i = simpson(|t| -(-gamma * (t - 1.0)).exp() / (t * t), 1.0, s.min(60.0), 200_000);
        let want = s * (0.2 + i);
        assert!((sub.h1.eval(s) - want).abs() < 1e-9 * s, "{s}: {} vs {want}", sub.h1.eval(s));
    }
    assert!(sub.residual <= 1e-6, "{}", sub.residual);
    assert!(sub.checks[0].passed);
}

#[test]
fn h0_at_boundary_is_rejected() {
    let inst = bundle(power(0.05, 4.0), power(1.0, 1.0), 0.25);
    let nodes = grid(1.0, 10.0, 100);
    assert!(matches!(build_subsolution(&inst, &nodes), Err(Error::BadParam(_))));
}

#[test]
fn zero_coefficients_sandwich() {
    let inst = bundle(Coefficient::zero(), Coefficient::zero(), 0.2);
    let grid = GridSpec {
        t_max: Some(1e3),
        ..GridSpec::default()
    };
    let report = run(&inst, &grid, 1e-10, 200, 200).unwrap();
    assert!(report.passed, "{report:?}");
    for p in &report.profile.samples {
        assert!(p.u1 <= p.u2);
    }
}

#[test]
fn full_bundle_with_admissible_h0() {
    let inst = bundle(power(0.05, 4.0), power(1.0, 1.0), 0.2);
    let report = run(&inst, &GridSpec::default(), 1e-10, 200, 400).unwrap();
    assert!(report.passed, "{:?}", report.profile.checks);
    let h1 = report.subsolution.h1.values();
    let h2 = report.supersolution.h2.values();
    assert!(h1.iter().zip(h2).all(|(a, b)| a <= b));
    assert_eq!(report.profile.lower, -0.8);
    assert_eq!(report.profile.upper, 0.5);
}

#[test]
fn inverted_bounds_violate_ordering() {
    let inst = bundle(power(0.05, 4.0), power(1.0, 1.0), 0.6);
    let grid = GridSpec {
        t_max: Some(1e3),
        ..GridSpec::default()
    };
    let sup = build_supersolution(&inst, &grid, 1e-10, 200).unwrap();
    let sub = build_subsolution_unchecked(&inst, sup.h2.nodes()).unwrap();
    let err = assemble_sandwich(&inst, &sub.h1, &sup.h2, 100).unwrap_err();
    assert!(matches!(err, Error::OrderingViolated { index: 0, .. }), "{err}");
}
