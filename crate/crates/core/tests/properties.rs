//! Property tests for the algebra of the spin-flip model.
//!
//! Every four-cell quasi-distribution is parameterized exactly by its three
//! moments, each in [-1, 1]; sampling moments therefore covers the whole
//! space of normalized signed distributions with bounded cells.

use lgsim_core::dist::{outcome_index, JointDistribution, Sign, OUTCOMES};
use lgsim_core::lgi::evaluate_from_distribution;
use lgsim_core::spinflip::{
    forward_spin_flip_map, invert_spin_flip_map, theoretical_intrinsic, CorrelationTriple,
    ErrorParams,
};
use proptest::prelude::*;

fn quasi_from_moments(m2: f64, m3: f64, m23: f64) -> JointDistribution {
    let mut cells = [0.0f64; 4];
    for &(s2, s3) in OUTCOMES.iter() {
        cells[outcome_index(s2, s3)] =
            0.25 * (1.0 + s2.value() * m2 + s3.value() * m3 + s2.value() * s3.value() * m23);
    }
    JointDistribution::classify(cells).unwrap()
}

fn arb_quasi() -> impl Strategy<Value = JointDistribution> {
    (-1.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0)
        .prop_map(|(m2, m3, m23)| quasi_from_moments(m2, m3, m23))
}

fn arb_err() -> impl Strategy<Value = ErrorParams> {
    (0.05f64..=1.0, 0.0f64..=0.95)
        .prop_map(|(eps, eta)| ErrorParams::new(eps, eta).unwrap())
}

proptest! {
    #[test]
    fn forward_then_invert_is_the_identity(p in arb_quasi(), err in arb_err()) {
        let there = forward_spin_flip_map(&p, &err);
        let back = invert_spin_flip_map(&there, &err).unwrap();
        for (a, b) in back.cells().iter().zip(p.cells().iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn invert_then_forward_is_the_identity(p in arb_quasi(), err in arb_err()) {
        if let Ok(back) = invert_spin_flip_map(&p, &err) {
            let there = forward_spin_flip_map(&back, &err);
            for (a, b) in there.cells().iter().zip(p.cells().iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn both_maps_preserve_normalization(p in arb_quasi(), err in arb_err()) {
        let fwd = forward_spin_flip_map(&p, &err);
        prop_assert!((fwd.cells().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        if let Ok(inv) = invert_spin_flip_map(&p, &err) {
            prop_assert!((inv.cells().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_contracts_moments_linearly(p in arb_quasi(), err in arb_err()) {
        let fwd = forward_spin_flip_map(&p, &err);
        prop_assert!((fwd.mean_s2() - err.epsilon() * p.mean_s2()).abs() < 1e-12);
        prop_assert!((fwd.mean_s3() - (1.0 - err.eta()) * p.mean_s3()).abs() < 1e-12);
        prop_assert!(
            (fwd.mean_s2s3() - err.epsilon() * (1.0 - err.eta()) * p.mean_s2s3()).abs() < 1e-12
        );
    }

    #[test]
    fn errors_only_wash_out_a_lone_negative_cell(
        neg in -0.49f64..-0.001,
        split in 0.0f64..1.0,
        err in arb_err(),
    ) {
        // Distribution with its only negative cell at (-1, +1).
        let rest = 1.0 - neg;
        let a = rest * split / 2.0;
        let b = rest * (1.0 - split) / 2.0;
        let cells = [a, neg, b, rest - a - b];
        prop_assume!(cells.iter().all(|&c| c <= 1.0));
        let p = JointDistribution::classify(cells).unwrap();
        let before = evaluate_from_distribution(&p).margin;
        let after = evaluate_from_distribution(&forward_spin_flip_map(&p, &err)).margin;
        prop_assert!(after >= before - 1e-12);
    }

    #[test]
    fn intrinsic_distribution_reproduces_its_correlations(
        k12 in -1.0f64..=1.0,
        k13 in -1.0f64..=1.0,
        k23 in -1.0f64..=1.0,
    ) {
        let k = CorrelationTriple::new(k12, k13, k23).unwrap();
        let p = theoretical_intrinsic(&k);
        prop_assert!((p.mean_s2() - k12).abs() < 1e-12);
        prop_assert!((p.mean_s3() - k13).abs() < 1e-12);
        prop_assert!((p.mean_s2s3() - k23).abs() < 1e-12);
        prop_assert!((p.cells().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lgi_margin_equals_four_times_the_watched_cell(p in arb_quasi()) {
        let report = evaluate_from_distribution(&p);
        prop_assert!((report.margin - 4.0 * p.get(Sign::Minus, Sign::Plus)).abs() < 1e-12);
        prop_assert!((report.margin - (report.lhs - report.rhs)).abs() < 1e-12);
        prop_assert_eq!(report.violated, report.margin < 0.0);
    }
}
