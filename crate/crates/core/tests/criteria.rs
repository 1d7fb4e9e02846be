use std::f64::consts::PI;
use std::sync::Arc;

use isochrone::criteria::quadrature::adaptive_simpson;
use isochrone::criteria::{
    build_involution_potential, calibrated_plasma_lienard, check_positivity_fails,
    doping_profile_candidate, doping_sign_radius, plasma_lienard, relativistic_lienard,
    sabatini_tau, sabatini_verdict, InvolutionSpec, LienardSpec, SabatiniVerdict,
};
use isochrone::integrate::IntegratorConfig;
use isochrone::isochrony::period_map;
use isochrone::models::ModelSpec;
use isochrone::system::Interval;
use isochrone::Error;
use proptest::prelude::*;

fn mobius(a: f64, j: f64, omega: f64) -> InvolutionSpec<f64> {
    InvolutionSpec::new(
        Arc::new(move |x: f64| -x / (1.0 + a * x)),
        Some(Arc::new(move |x: f64| {
            -1.0 / ((1.0 + a * x) * (1.0 + a * x))
        })),
        Interval::new(-j, j),
        omega,
    )
    .unwrap()
}

#[test]
fn quadrature_matches_polynomials_and_trig() {
    let v = adaptive_simpson(|x: f64| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-13).unwrap();
    assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
    let v = adaptive_simpson(f64::sin, 0.0, PI, 1e-13).unwrap();
    assert!((v - 2.0).abs() < 1e-12);
}

#[test]
fn plasma_tau_ratio_is_constant() {
    for d in 1..=5 {
        let d = d as f64;
        let spec = plasma_lienard(d);
        let expected = ((2.0 + d).powi(2) - 9.0 * d) / 9.0;
        for z in [0.05, 0.1, 0.3, 0.7, 1.0] {
            let ratio = sabatini_tau(&spec, z).unwrap() / z.powi(6);
            assert!(
                (ratio - expected).abs() <= 1e-8 * expected.abs().max(1.0),
                "d={d} z={z}: {ratio} vs {expected}"
            );
        }
    }
}

#[test]
fn plasma_verdicts_follow_the_tau_zeros() {
    for d in 1..=5u32 {
        let out = sabatini_verdict(&plasma_lienard(d as f64), 1.0, 20, 1e-8).unwrap();
        let iso = d == 1 || d == 4;
        assert_eq!(
            out.verdict == SabatiniVerdict::IsochronousCenter,
            iso,
            "d={d}"
        );
        assert!(out.odd_defect < 1e-15);
    }
}

#[test]
fn calibrated_roots_are_isochronous() {
    for (gamma, iso) in [(-2.0, true), (0.25, true), (0.0, false)] {
        let out = sabatini_verdict(&calibrated_plasma_lienard(3.0, gamma), 1.0, 20, 1e-8).unwrap();
        assert_eq!(
            out.verdict == SabatiniVerdict::IsochronousCenter,
            iso,
            "gamma={gamma}"
        );
    }
}

#[test]
fn relativistic_tau_at_one() {
    let spec = relativistic_lienard(1.0).unwrap();
    let tau = sabatini_tau(&spec, 1.0).unwrap();
    assert!((tau - (2f64.sqrt() - 1.0) / 2f64.sqrt()).abs() < 1e-10);
    let out = sabatini_verdict(&spec, 1.0, 10, 1e-8).unwrap();
    assert_eq!(out.verdict, SabatiniVerdict::NotIsochronous);
}

#[test]
fn even_damping_violates_hypotheses() {
    let spec = LienardSpec::new(
        Arc::new(|z: f64| z * z),
        Arc::new(|z: f64| z),
        Some(1.0),
        Interval::unbounded(),
    )
    .unwrap();
    let out = sabatini_verdict(&spec, 0.5, 10, 1e-8).unwrap();
    assert_eq!(out.verdict, SabatiniVerdict::HypothesesViolated);
    assert!(out.worst_ratio.is_none());
}

#[test]
fn lienard_hypotheses_are_checked() {
    let shifted = LienardSpec::new(
        Arc::new(|z: f64| z + 1.0),
        Arc::new(|z: f64| z),
        None,
        Interval::unbounded(),
    );
    assert!(matches!(shifted, Err(Error::InvalidParameter(_))));
    let soft = LienardSpec::new(
        Arc::new(|z: f64| z),
        Arc::new(|z: f64| -z),
        None,
        Interval::unbounded(),
    );
    assert!(soft.is_err());
    // A missing g'(0) is differenced.
    let s = LienardSpec::new(
        Arc::new(|z: f64| z),
        Arc::new(|z: f64| 3.0 * z.sin()),
        None,
        Interval::unbounded(),
    )
    .unwrap();
    assert!((s.g_prime0() - 3.0).abs() < 1e-9);
    let bounded = LienardSpec::new(
        Arc::new(|z: f64| z),
        Arc::new(|z: f64| z),
        None,
        Interval::symmetric(0.5),
    )
    .unwrap();
    assert!(sabatini_tau(&bounded, 0.7).is_err());
}

#[test]
fn involution_potentials_are_isochronous() {
    let cfg = IntegratorConfig::default().with_t_max(20.0);
    let spec = ModelSpec::InvolutionHamiltonian {
        involution: mobius(0.3, 2.0, 1.0),
    };
    let sys = spec.system().unwrap();
    let pm = period_map(&sys, &spec.family(), "x0=h", (0.2, 0.8), 3, &cfg).unwrap();
    for e in &pm.entries {
        assert!((e.period.unwrap() - 2.0 * PI).abs() < 1e-6, "{e:?}");
    }

    let trivial =
        InvolutionSpec::new(Arc::new(|x: f64| -x), None, Interval::new(-2.0, 2.0), 2.0).unwrap();
    assert!((build_involution_potential(&trivial).period() - PI).abs() < 1e-15);
    let spec = ModelSpec::InvolutionHamiltonian {
        involution: trivial,
    };
    let pm = period_map(
        &spec.system().unwrap(),
        &spec.family(),
        "x0=h",
        (0.2, 0.8),
        3,
        &cfg,
    )
    .unwrap();
    for e in &pm.entries {
        assert!((e.period.unwrap() - PI).abs() < 1e-8, "{e:?}");
    }
}

#[test]
fn doping_witnesses_sit_at_the_sign_radius() {
    for (k, m) in [(1.0f64, 1.0f64), (2.0, 0.5)] {
        let r = doping_sign_radius(k, m);
        let w = check_positivity_fails(|x| doping_profile_candidate(k, m, 0.0, x), 0.0, 3.0, 301)
            .unwrap();
        assert!(doping_profile_candidate(k, m, 0.0, w) < 0.0);
        assert!((w - r).abs() < 1e-9, "{w} vs {r}");
    }
    assert!((doping_sign_radius(1.0f64, 1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((doping_sign_radius(2.0f64, 0.5) - 0.35355).abs() < 1e-5);
    // A positive window has no witness.
    assert!(check_positivity_fails(
        |x| doping_profile_candidate(1.0, 1.0, 0.0, x),
        -0.5,
        0.5,
        101
    )
    .is_none());
}

proptest! {
    #[test]
    fn mobius_involutions_are_self_inverse(a in -0.4f64..0.4, x in -0.9f64..0.9) {
        let spec = mobius(a, 1.0, 1.0);
        prop_assert!((spec.h(spec.h(x)) - x).abs() < 1e-12);
    }

    #[test]
    fn candidate_sign_matches_radius(k in 0.2f64..3.0, m in 0.2f64..3.0, off in 0.0f64..2.0) {
        let r = doping_sign_radius(k, m);
        let v = doping_profile_candidate(k, m, 0.0, off);
        prop_assume!((off - r).abs() > 1e-9);
        prop_assert_eq!(v < 0.0, off > r);
    }
}
