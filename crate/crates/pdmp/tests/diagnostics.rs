//! Cross-validation of the statistical helpers against an independent
//! implementation (statrs) and against exact trajectory integration.

mod common;

use pdmp::diagnostics::{discretize, path_average, standard_normal_cdf, Observable};
use pdmp::rng::RandomSource;
use pdmp::samplers::{run, SamplerSpec};
use pdmp::state::PhaseState;
use pdmp::targets::Mvn;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn normal_cdf_matches_statrs() {
    // statrs's own erf carries ~1e-11 absolute error; this sweep guards
    // against gross disagreement, the frozen values below pin precision.
    let reference = Normal::new(0.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for k in -800..=800 {
        let x = k as f64 * 0.01;
        let mine = standard_normal_cdf(x);
        let theirs = reference.cdf(x);
        worst = worst.max((mine - theirs).abs());
    }
    assert!(worst < 1e-10, "max CDF defect vs statrs {worst}");
}

#[test]
fn normal_cdf_matches_correctly_rounded_references() {
    // Values from a correctly-rounded erfc implementation.
    let refs = [
        (-8.00, 6.22096057427181937e-16),
        (-3.00, 1.34989803163009566e-03),
        (-1.00, 1.58655253931457074e-01),
        (-0.30, 3.82088577811047381e-01),
        (0.00, 5.00000000000000000e-01),
        (0.30, 6.17911422188952564e-01),
        (0.46, 6.77241889749652271e-01),
        (0.50, 6.91462461274013118e-01),
        (1.00, 8.41344746068542926e-01),
        (2.00, 9.77249868051820791e-01),
        (3.50, 9.99767370920964460e-01),
        (4.00, 9.99968328758166880e-01),
        (4.50, 9.99996602326875261e-01),
        (6.00, 9.99999999013412300e-01),
    ];
    for (x, want) in refs {
        let got = standard_normal_cdf(x);
        let rel = ((got - want) / want).abs();
        assert!(rel < 1e-15, "x={x}: got {got:e}, want {want:e}");
    }
}

#[test]
fn discretize_mean_converges_to_path_average_on_a_real_run() {
    let target = Mvn::standard(2);
    let spec = SamplerSpec::coordinate(0.2);
    let mut rng = RandomSource::new(61);
    let z0 = PhaseState::new(vec![0.0, 0.0], spec.initial_velocity(2, &mut rng));
    let (traj, _) = run(&spec, &target, z0, 500.0, &mut rng).unwrap();

    let exact = path_average(&traj, Observable::Coordinate(0));
    let samples = discretize(&traj, 10_000);
    let mean = samples.column(0).iter().sum::<f64>() / samples.len() as f64;
    let scale = exact.abs().max(0.01);
    assert!(
        (mean - exact).abs() / scale < 1e-2,
        "discretized {mean} vs exact {exact}"
    );
}
