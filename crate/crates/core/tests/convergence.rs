mod common;

use asympt_core::criteria::{check_all, Params, Scheme};
use asympt_core::fixpoint::{solve, GridSpec, Operator, OperatorSpec};
use asympt_core::verify::{check_profiles, residual, rk_crosscheck, SolutionProfile};
use common::*;

const TOL: f64 = 1e-10;

#[test]
fn every_scheme_converges_with_certificate() {
    for scheme in Scheme::ALL {
        for frac in [0.1, 0.5, 0.9] {
            let inst = scheme_instance(scheme, frac * mu_max(scheme));
            let spec = OperatorSpec::new(scheme, inst.clone()).unwrap();
            let sol = solve(&spec, &GridSpec::default(), TOL, 200).unwrap();
            let cert = &sol.certificate;
            assert!(cert.converged, "{scheme:?} {frac}");
            assert!(cert.error_bound.unwrap() <= TOL, "{scheme:?}: {cert:?}");
            assert!(cert.ratio_consistent(), "{scheme:?}: {cert:?}");
            let bound = (TOL.ln() / spec.kappa.ln()).ceil() as usize + 2;
            assert!(cert.iterations <= bound, "{scheme:?}: {} > {bound}", cert.iterations);

            let profile = SolutionProfile::from_solution(&sol, &inst);
            let report = check_profiles(&profile).unwrap();
            assert!(report.passed, "{scheme:?} {frac}: {report:?}");
            let r = residual(&profile, 2000);
            assert!(r.max < 1e-6, "{scheme:?}: {r:?}");
            let rk = rk_crosscheck(&profile, 1e-10, None).unwrap();
            assert!(rk.agrees, "{scheme:?} {frac}: {rk:?}");
        }
    }
}

#[test]
fn every_iterate_stays_in_the_candidate_set() {
    for scheme in Scheme::ALL {
        let spec = OperatorSpec::new(scheme, scheme_instance(scheme, 0.8 * mu_max(scheme))).unwrap();
        let nodes = GridSpec::default().resolve(&spec, 1e-8).unwrap();
        let op = Operator::new(spec, nodes).unwrap();
        let mut u = op.initial();
        for it in 0..15 {
            let img = op.apply(&u).unwrap();
            op.check_candidate(&img.iterate)
                .unwrap_or_else(|e| panic!("{scheme:?} iteration {it}: {e}"));
            u = img.iterate;
        }
    }
}

#[test]
fn increments_decay_geometrically() {
    for scheme in Scheme::ALL {
        let spec = OperatorSpec::new(scheme, scheme_instance(scheme, 0.5 * mu_max(scheme))).unwrap();
        let sol = solve(&spec, &GridSpec::default(), 1e-12, 200).unwrap();
        let inc = &sol.certificate.increments;
        for i in 1..inc.len().saturating_sub(1) {
            // below the noise floor the ratio is meaningless
            if inc[i] > 1e-13 {
                assert!(inc[i + 1] <= inc[i], "{scheme:?}: {inc:?}");
            }
        }
    }
}

#[test]
fn bounded_fixed_point_approaches_its_limit() {
    let inst = scheme_instance(Scheme::BoundedLimit, 0.3);
    let spec = OperatorSpec::new(Scheme::BoundedLimit, inst).unwrap();
    let sol = solve(&spec, &GridSpec::default(), TOL, 200).unwrap();
    let q = power(0.3, 4.0);
    for (&t, &x) in sol.solution.nodes().iter().zip(sol.solution.values()) {
        let bound = q.double_tail(t).unwrap().value;
        assert!((x - 1.0).abs() <= bound * (1.0 + 1e-9) + 1e-12, "t = {t}");
    }
}

#[test]
fn certificate_bounds_true_error() {
    let params = Params {
        c: Some(1.0),
        ..Params::default()
    };
    let spec = OperatorSpec::new(Scheme::BoundedLimit, ef(3.0, manufactured_q(0.01), 1.0, params)).unwrap();
    // a loose tolerance so the bound is far above the discretization error
    let sol = solve(&spec, &GridSpec::default(), 1e-4, 200).unwrap();
    let err = max_abs_err(&sol.solution, |t| 1.0 - 0.01 / t);
    let bound = sol.certificate.error_bound.unwrap();
    assert!(err <= bound + 1e-10, "{err} > {bound}");
}

/// Every passing verdict must lead to a converged solve.
#[test]
fn passing_criteria_imply_convergence() {
    let all = Params {
        c: Some(0.8),
        m: Some(1.0),
        big_a: Some(0.5),
        nu: Some(0.3),
        a: Some(0.5),
        b: Some(0.0),
        c_exp: Some(1.0),
        eps: Some(0.5),
        d: Some(0.4),
        ..Params::default()
    };
    let mut solved = 0;
    for lambda in [1.0, 2.0, 3.0] {
        for (mu, p) in [(0.02, 4.5), (0.1, 5.0), (0.05, 6.5), (0.3, 7.0)] {
            let inst = ef(lambda, power(mu, p), 1.0, all.clone());
            let report = check_all(&inst);
            for scheme in Scheme::ALL {
                let Some(entry) = report.for_scheme(scheme) else { continue };
                if !entry.passed() {
                    continue;
                }
                let spec = OperatorSpec::new(scheme, inst.clone()).unwrap();
                let sol = solve(&spec, &GridSpec::default(), 1e-8, 200)
                    .unwrap_or_else(|e| panic!("{scheme:?} lambda={lambda} mu={mu} p={p}: {e}"));
                assert!(sol.certificate.converged);
                solved += 1;
            }
        }
    }
    assert!(solved >= 20, "{solved}");
}
