//! Synthetic decompositions, the localized inequality and the sharpness family.

use isoprofile_core::config::Tolerances;
use isoprofile_core::density::{CustomDensity, Density1D, DensitySpec, ModelDensityParams};
use isoprofile_core::geometry::IntervalSet;
use isoprofile_core::kernels::{model_volume, omega, CurvatureParams};
use isoprofile_core::needles::{
    aggregate_profile_bound, ball_growth, check_localized_inequality, random_decomposition, sharpness_family,
    sharpness_ratio, summarize, verify_theorem_conclusion, MeasuredSegment, Needle, NeedleDecomposition, TheoremCheck,
    TheoremStatus,
};
use isoprofile_core::profile::{inverse_mass, isoperimetric_profile, needle_mass};
use isoprofile_core::quadrature::QuadConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn flat() -> CurvatureParams {
    CurvatureParams::new(0.0, 2.0, 1.0).unwrap()
}

#[test]
fn random_decompositions_satisfy_localized_inequality() {
    let cases = [
        CurvatureParams::new(0.0, 2.0, 1.0).unwrap(),
        CurvatureParams::new(-2.0, 3.0, 1.0).unwrap(),
        CurvatureParams::new(1.0, 2.0, 2.5).unwrap(),
        CurvatureParams::new(0.5, 1.5, 1.0).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let tol = Tolerances::default();
    for trial in 0..100 {
        let params = cases[trial % cases.len()];
        let dec = random_decomposition(&params, 0.05, 1 + trial % 5, &mut rng, &cfg()).unwrap();
        let rep = check_localized_inequality(&dec, &tol).unwrap();
        assert!(rep.passed, "trial {trial}: {rep:?}");
        for needle in &dec.needles {
            let np = params.with_length(needle.length).unwrap();
            let cert = needle.certify(&np, 24, &cfg()).unwrap();
            assert!(cert.holds(1e-8), "trial {trial}: {cert:?}");
        }
        let summary = summarize(&dec, Some(0.1), &cfg()).unwrap();
        assert!((summary.total_weight + summary.residual_mass - 1.0).abs() < 1e-12);
        assert!(summary.mass_accounting_c <= 0.5 + 1e-12);
    }
}

#[test]
fn optimal_configuration_is_tight() {
    let tol = Tolerances::default();
    for params in [
        flat(),
        CurvatureParams::new(-1.0, 2.0, 1.0).unwrap(),
        CurvatureParams::new(2.0, 3.0, 2.0).unwrap(),
    ] {
        let masses = [0.05, 0.3, 0.6];
        let needles: Vec<Needle> = masses
            .iter()
            .zip([0.5, 0.3, 0.2])
            .map(|(&v, w)| Needle::optimal(w, &params, v, &tol).unwrap())
            .collect();
        let dec = NeedleDecomposition::new(params, 0.1, 0.0, needles).unwrap();
        let rep = check_localized_inequality(&dec, &tol).unwrap();
        assert!(rep.passed);
        assert!(rep.slack.abs() <= 1e-6, "{params:?}: {}", rep.slack);
        let expected: f64 = masses
            .iter()
            .zip([0.5, 0.3, 0.2])
            .map(|(&v, w)| w * isoperimetric_profile(&params, v, &tol).unwrap().i)
            .sum();
        assert!((rep.rhs - expected).abs() < 1e-9);
    }
}

#[test]
fn aggregate_monotone_in_small_trace_mass() {
    let tol = Tolerances::default();
    let params = flat();
    let spec = DensitySpec::Model { a: 0.4 };
    let fixed = Needle::new(
        0.5,
        &params,
        spec.clone(),
        IntervalSet::interval(1.0, 0.0, 0.1).unwrap(),
        &cfg(),
    )
    .unwrap();
    let mut last = 0.0;
    for i in 1..=40 {
        let r = 0.2 * i as f64 / 40.0;
        let trace = IntervalSet::interval(1.0, 0.0, r).unwrap();
        let moving = Needle::new(0.5, &params, spec.clone(), trace, &cfg()).unwrap();
        assert!(moving.trace_mass(&cfg()) <= 0.2);
        let dec = NeedleDecomposition::new(params, 0.1, 0.0, vec![fixed.clone(), moving]).unwrap();
        let bound = aggregate_profile_bound(&dec, &tol).unwrap().value;
        assert!(bound >= last, "r={r}");
        last = bound;
    }
}

#[test]
fn single_needle_set_measure_matches_needle_mass() {
    let params = CurvatureParams::new(-1.0, 2.5, 1.0).unwrap();
    let a = 0.37;
    let trace = IntervalSet::interval(1.0, 0.0, a).unwrap();
    let needle = Needle::new(0.7, &params, DensitySpec::Model { a }, trace, &cfg()).unwrap();
    let v = needle_mass(&ModelDensityParams::new(params, a).unwrap(), &cfg()).unwrap();
    assert!((needle.trace_mass(&cfg()) - v).abs() < 1e-12);
}

#[test]
fn decomposition_round_trips_through_records() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dec = random_decomposition(&flat(), 0.02, 4, &mut rng, &cfg()).unwrap();
    let back = NeedleDecomposition::from_record(&dec.to_record(), &cfg()).unwrap();
    assert_eq!(back.to_record(), dec.to_record());
    let a = check_localized_inequality(&dec, &Tolerances::default()).unwrap();
    let b = check_localized_inequality(&back, &Tolerances::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sharpness_family_ball_growth() {
    let params = flat();
    let a = 1e-3;
    let space = sharpness_family(&params, a, &cfg()).unwrap();
    for i in 1..=20 {
        let r = 0.5 * i as f64 / 20.0;
        let g = ball_growth(&space.density, 0.0, 1.0, r, &cfg()).unwrap();
        assert!(g <= r, "r={r}: {g}");
    }
    assert!((ball_growth(&space.density, 0.0, 1.0, 1.0, &cfg()).unwrap() - 1.0).abs() < 1e-12);

    let r = a / 10.0;
    let slope = space.ball(0.0, r, &cfg()) / (2.0 * omega(2.0).unwrap() * a * r);
    assert!((slope - 1.0).abs() < 0.05, "{slope}");
}

#[test]
fn sharpness_ratio_approaches_one() {
    for (params, lo, hi) in [
        (flat(), 0.98, 1.05),
        (CurvatureParams::new(-2.0, 3.0, 1.0).unwrap(), 0.98, 1.1),
    ] {
        let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&a| sharpness_ratio(&params, a, &cfg()).unwrap())
            .collect();
        assert!(ratios[1] >= lo && ratios[1] <= hi, "{params:?}: {ratios:?}");
        assert!(ratios[2] <= 1.02);
        // the family approaches 1 from below
        for w in ratios.windows(2) {
            assert!((w[1] - 1.0).abs() < (w[0] - 1.0).abs(), "{ratios:?}");
        }
    }
}

#[test]
fn sharpness_ratio_rejects_large_split() {
    assert!(sharpness_ratio(&flat(), 0.9, &cfg()).is_err());
}

#[test]
fn theorem_deficit_on_sharpness_family() {
    let params = flat();
    let a = 1e-3;
    let space = sharpness_family(&params, a, &cfg()).unwrap();
    let e = IntervalSet::interval(1.0, 0.0, a).unwrap();
    let opts = TheoremCheck {
        psi_band: Some(0.05),
        eta: None,
    };
    let rep = verify_theorem_conclusion(&space, 0.0, &params, &e, a, &opts, &cfg()).unwrap();
    assert_eq!(rep.status, TheoremStatus::Evaluated);
    assert!(rep.passed());
    let psi = rep.psi_eff.unwrap();
    let ratio = sharpness_ratio(&params, a, &cfg()).unwrap();
    assert!((psi - (1.0 - ratio)).abs() < 1e-12);
    assert!(psi <= 0.05);

    let empty = IntervalSet::empty(1.0);
    let skipped = verify_theorem_conclusion(&space, 0.0, &params, &empty, a, &opts, &cfg()).unwrap();
    assert_eq!(skipped.status, TheoremStatus::Skipped);

    let halved = MeasuredSegment {
        density: space.density.clone(),
        scale: 0.5 * space.scale,
    };
    let failed = verify_theorem_conclusion(&halved, 0.0, &params, &e, a, &opts, &cfg()).unwrap();
    assert_eq!(failed.status, TheoremStatus::PreconditionFailed);
    assert!(!failed.assumptions["ball_volume"]);
}

#[test]
fn positive_curvature_density_ratio_check() {
    let n = 2.0;
    let params = CurvatureParams::new(n - 1.0, n, core::f64::consts::PI).unwrap();
    let opts = TheoremCheck {
        psi_band: None,
        eta: Some(0.1),
    };
    let delta = 0.05;

    // round sphere: m(B_r) ≈ ω_N r^N near the pole
    let sphere = CustomDensity::new(params.d(), move |t: f64| libm::pow(t.sin(), n - 1.0), Vec::new()).unwrap();
    let sphere = MeasuredSegment {
        density: Density1D::Custom(sphere),
        scale: n * omega(n).unwrap(),
    };
    let e = IntervalSet::interval(params.d(), 0.0, delta).unwrap();
    let rep = verify_theorem_conclusion(&sphere, 0.0, &params, &e, delta, &opts, &cfg()).unwrap();
    assert!(rep.assumptions["density_ratio"], "{rep:?}");
    assert!(rep.assumptions["ball_volume"]);
    assert_eq!(rep.status, TheoremStatus::Evaluated);
    // polar cap: content / (2π m)^{1/2} = √2 cos(δ/2)
    let expected = 1.0 - 2f64.sqrt() * (delta / 2.0).cos();
    assert!((rep.psi_eff.unwrap() - expected).abs() < 1e-9, "{rep:?}");

    // below D = π the family keeps a positive density at the tip
    let short = CurvatureParams::new(n - 1.0, n, 3.0).unwrap();
    let a = 1e-2;
    let family = sharpness_family(&short, a, &cfg()).unwrap();
    assert!((family.scale - model_volume(&short, short.d(), &cfg()).unwrap()).abs() < 1e-12);
    let e = IntervalSet::interval(short.d(), 0.0, a).unwrap();
    let rep = verify_theorem_conclusion(&family, 0.0, &short, &e, a, &opts, &cfg()).unwrap();
    assert!(!rep.assumptions["density_ratio"]);
    assert_eq!(rep.status, TheoremStatus::PreconditionFailed);
}

#[test]
fn short_needle_bound_reported() {
    let params = flat();
    let tol = Tolerances::default();
    let v = inverse_mass(&params, 0.2, &tol).unwrap();
    let short = Needle::new(
        0.3,
        &params.with_length(0.3).unwrap(),
        DensitySpec::Constant { value: None },
        IntervalSet::empty(0.3),
        &cfg(),
    )
    .unwrap();
    let long = Needle::new(
        0.69,
        &params,
        DensitySpec::Model { a: v },
        IntervalSet::empty(1.0),
        &cfg(),
    )
    .unwrap();
    let dec = NeedleDecomposition::new(params, 0.01, 0.01, vec![short, long]).unwrap();
    let s = summarize(&dec, Some(0.0), &cfg()).unwrap();
    assert!((s.short_mass - 0.3).abs() < 1e-15);
    assert!((s.long_mass - 0.69).abs() < 1e-15);
    assert!((s.mass_accounting_c - 1.0).abs() < 1e-9);
    // h = Vol(1)/Vol(1/2) = 4 in the flat plane
    assert!((s.short_mass_bound.unwrap() - 8.0 * 0.1 / 3.0).abs() < 1e-9);
}
