//! Central finite differences against an independent forward pass.

mod common;

use common::{gradient_error, setup, Setup};
use isac_shaping::comms::DemapperPrior;
use isac_shaping::shaping::{Relaxation, ShapingProblem, TrainConfig};
use isac_shaping::{RawShapingParams, RngStream, ShapingMode};
use num_complex::Complex64;

fn check(s: Setup) {
    let err = gradient_error(&s, 1e-4);
    assert!(err < 1e-3, "relative gradient error {err}");
}

#[test]
fn joint_straight_through_with_active_penalty() {
    check(setup(ShapingMode::Joint, Relaxation::StraightThrough, DemapperPrior::Aware, 1.0));
}

#[test]
fn joint_soft_relaxation() {
    check(setup(ShapingMode::Joint, Relaxation::Soft, DemapperPrior::Aware, 1.0));
}

#[test]
fn joint_uniform_prior_inactive_penalty() {
    check(setup(ShapingMode::Joint, Relaxation::StraightThrough, DemapperPrior::Uniform, 3.0));
}

#[test]
fn joint_importance_weighted() {
    check(setup(ShapingMode::Joint, Relaxation::ImportanceWeighted, DemapperPrior::Aware, 1.0));
}

#[test]
fn probabilistic_importance_weighted() {
    check(setup(ShapingMode::Probabilistic, Relaxation::ImportanceWeighted, DemapperPrior::Aware, 1.1));
}

#[test]
fn four_point_joint() {
    let mut s = setup(ShapingMode::Joint, Relaxation::StraightThrough, DemapperPrior::Aware, 1.0);
    let mut cfg = TrainConfig::new(ShapingMode::Joint, 1.0);
    cfg.bits_per_symbol = 2;
    cfg.snr_c_db = 3.0;
    s.problem = ShapingProblem::from_config(&cfg).unwrap();
    s.params = RawShapingParams {
        raw_points: vec![
            Complex64::new(0.9, 0.6),
            Complex64::new(-0.5, 1.1),
            Complex64::new(0.7, -1.2),
            Complex64::new(-1.3, -0.4),
        ],
        raw_logits: vec![0.2, -0.3, 0.1, 0.5],
    };
    check(s);
}

#[test]
fn geometric_only() {
    check(setup(ShapingMode::Geometric, Relaxation::StraightThrough, DemapperPrior::Aware, 1.1));
}

#[test]
fn probabilistic_only() {
    check(setup(ShapingMode::Probabilistic, Relaxation::StraightThrough, DemapperPrior::Aware, 1.1));
}

#[test]
fn psk_meets_unit_kurtosis_limit() {
    // Every PSK point has unit magnitude, so the hinge is inactive at 1.
    let mut s = setup(ShapingMode::Geometric, Relaxation::StraightThrough, DemapperPrior::Aware, 1.0);
    s.params.raw_points = isac_shaping::Constellation::psk(4).unwrap().points().to_vec();
    let draws = s.problem.draw(&s.params, 200, RngStream::new(3));
    let (loss, _) = s.problem.evaluate(&s.params, &draws, s.tau).unwrap();
    assert!((loss.kurtosis - 1.0).abs() < 1e-12);
    assert_eq!(loss.sensing_loss, 0.0);
}
