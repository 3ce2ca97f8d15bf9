//! Cross-module checks: the quantum simulation, the spin-flip model, the
//! reconstruction and the inequality evaluation must all agree with each
//! other at every measurement strength.

use approx::assert_abs_diff_eq;
use lgsim_core::calibration::{CalibrationPoint, Estimate, VisibilityFit};
use lgsim_core::lgi::{evaluate_from_correlations, evaluate_from_distribution};
use lgsim_core::measurement::{
    noisy_joint_distribution, simulate_counts, theta_for_epsilon, theta_for_eta, ApparatusConfig,
};
use lgsim_core::qubit::prepare_linear_polarization;
use lgsim_core::spinflip::{
    correlations_from_state, epsilon_zero_crossing, eta_zero_crossing, forward_spin_flip_map,
    invert_spin_flip_map, partial_invert_backaction_only, partial_invert_resolution_only,
    theoretical_intrinsic, ErrorParams,
};
use lgsim_core::uncertainty::{bootstrap_reconstruction, BootstrapSpec};
use lgsim_core::{CountRecord, Sign};
use std::f64::consts::{FRAC_PI_8, SQRT_2};

const NEGATIVE_CELL: f64 = (1.0 - SQRT_2) / 4.0;

fn apparatus(theta: f64, n: u64) -> ApparatusConfig {
    ApparatusConfig::new(theta, 0.853, 0.9997, 0.0, n).unwrap()
}

#[test]
fn exact_pipeline_recovers_the_negative_intrinsic_cell() {
    let state = prepare_linear_polarization(FRAC_PI_8);
    let cfg = apparatus(10f64.to_radians(), 1);
    let p_exp = noisy_joint_distribution(&state, &cfg);
    let recon = invert_spin_flip_map(&p_exp, &ErrorParams::from_apparatus(&cfg)).unwrap();
    assert_abs_diff_eq!(
        recon.get(Sign::Minus, Sign::Plus),
        NEGATIVE_CELL,
        epsilon = 1e-12
    );
}

#[test]
fn reconstruction_is_independent_of_measurement_strength() {
    let state = prepare_linear_polarization(FRAC_PI_8);
    let intrinsic = theoretical_intrinsic(&correlations_from_state(&state));
    for k in 1..20 {
        let theta = FRAC_PI_8 * k as f64 / 20.0;
        let cfg = apparatus(theta, 1);
        let p_exp = noisy_joint_distribution(&state, &cfg);
        let recon = invert_spin_flip_map(&p_exp, &ErrorParams::from_apparatus(&cfg)).unwrap();
        for (a, b) in recon.cells().iter().zip(intrinsic.cells().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

#[test]
fn quantum_model_equals_spin_flips_on_the_intrinsic_distribution() {
    for i in 0..10 {
        let phi = std::f64::consts::FRAC_PI_2 * i as f64 / 9.0;
        let state = prepare_linear_polarization(phi);
        let intrinsic = theoretical_intrinsic(&correlations_from_state(&state));
        for j in 0..10 {
            let theta = FRAC_PI_8 * j as f64 / 9.0;
            for v_pm in [0.7, 0.853, 1.0] {
                for v_hv in [0.9, 0.9997, 1.0] {
                    let cfg = ApparatusConfig::new(theta, v_pm, v_hv, 0.0, 1).unwrap();
                    let quantum = noisy_joint_distribution(&state, &cfg);
                    let flipped =
                        forward_spin_flip_map(&intrinsic, &ErrorParams::from_apparatus(&cfg));
                    for (a, b) in quantum.cells().iter().zip(flipped.cells().iter()) {
                        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn the_two_lgi_routes_agree() {
    let state = prepare_linear_polarization(FRAC_PI_8);
    let k = correlations_from_state(&state);
    let from_k = evaluate_from_correlations(&k);
    let from_p = evaluate_from_distribution(&theoretical_intrinsic(&k));
    assert_abs_diff_eq!(from_k.margin, from_p.margin, epsilon = 1e-12);
    assert_abs_diff_eq!(from_k.margin, 1.0 - SQRT_2, epsilon = 1e-12);
    assert_eq!(from_k.violated, from_p.violated);
}

#[test]
fn partial_reconstructions_cross_zero_at_the_predicted_angles() {
    let state = prepare_linear_polarization(22.496f64.to_radians());
    let intrinsic = theoretical_intrinsic(&correlations_from_state(&state));

    let eta_star = eta_zero_crossing(&intrinsic).unwrap();
    let theta_eta = theta_for_eta(eta_star, 0.9997).unwrap().to_degrees();
    assert_abs_diff_eq!(theta_eta, 16.3825, epsilon = 0.05);

    let eps_star = epsilon_zero_crossing(&intrinsic).unwrap();
    let theta_eps = theta_for_epsilon(eps_star, 0.853).unwrap().to_degrees();
    assert_abs_diff_eq!(theta_eps, 7.2629, epsilon = 0.05);

    // The exact partial curves change sign across those angles.
    let curve = |theta_deg: f64| {
        let cfg = apparatus(theta_deg.to_radians(), 1);
        let p_exp = noisy_joint_distribution(&state, &cfg);
        let p_eta = partial_invert_resolution_only(&p_exp, cfg.epsilon()).unwrap();
        let p_eps = partial_invert_backaction_only(&p_exp, cfg.eta()).unwrap();
        (
            p_eta.get(Sign::Minus, Sign::Plus),
            p_eps.get(Sign::Minus, Sign::Plus),
        )
    };
    assert!(curve(15.0).0 < 0.0 && curve(17.0).0 > 0.0);
    assert!(curve(6.0).1 > 0.0 && curve(8.0).1 < 0.0);
}

#[test]
fn partial_reconstructions_approach_the_intrinsic_cell_in_their_clean_limits() {
    let state = prepare_linear_polarization(FRAC_PI_8);

    // Weak limit: back-action vanishes, so compensating only the
    // resolution recovers the intrinsic value.
    let weak = ApparatusConfig::new(1e-3, 1.0, 1.0, 0.0, 1).unwrap();
    let p_exp = noisy_joint_distribution(&state, &weak);
    let p_eta = partial_invert_resolution_only(&p_exp, weak.epsilon()).unwrap();
    assert_abs_diff_eq!(
        p_eta.get(Sign::Minus, Sign::Plus),
        NEGATIVE_CELL,
        epsilon = 1e-5
    );

    // Strong limit with perfect visibility: resolution approaches one, so
    // compensating only the back-action recovers the intrinsic value. At
    // exactly pi/8 the back-action is complete and the inversion is
    // singular, so probe just inside the endpoint.
    let strong = ApparatusConfig::new(FRAC_PI_8 - 1e-3, 1.0, 1.0, 0.0, 1).unwrap();
    let p_exp = noisy_joint_distribution(&state, &strong);
    let p_eps = partial_invert_backaction_only(&p_exp, strong.eta()).unwrap();
    assert_abs_diff_eq!(
        p_eps.get(Sign::Minus, Sign::Plus),
        NEGATIVE_CELL,
        epsilon = 1e-4
    );
}

fn sampled_records(theta: f64, n: u64, base_seed: u64) -> (Vec<CountRecord>, ApparatusConfig) {
    let state = prepare_linear_polarization(22.496f64.to_radians());
    let cfg = apparatus(theta, n);
    let records = vec![
        simulate_counts(&state, &cfg, Sign::Plus, base_seed),
        simulate_counts(&state, &cfg, Sign::Minus, base_seed ^ 1),
    ];
    (records, cfg)
}

fn model_fit() -> VisibilityFit {
    VisibilityFit {
        v_pm: Estimate::new(0.853, 0.0),
        v_hv: Estimate::new(0.9997, 0.0),
        residual_rms: 0.0,
    }
}

fn model_point(cfg: &ApparatusConfig) -> CalibrationPoint {
    CalibrationPoint {
        theta: cfg.theta(),
        epsilon: Estimate::new(cfg.epsilon(), 0.0),
        eta: Estimate::new(cfg.eta(), 0.0),
    }
}

#[test]
fn bootstrap_mean_brackets_the_intrinsic_cell() {
    let (records, cfg) = sampled_records(12f64.to_radians(), 1_000_000, 91);
    let spec = BootstrapSpec::new(500, 17, 0.010, 0.0001).unwrap();
    let out = bootstrap_reconstruction(&records, &model_point(&cfg), &model_fit(), &spec).unwrap();
    let cell = out.mean.get(Sign::Minus, Sign::Plus);
    let se = out.stderr[lgsim_core::dist::outcome_index(Sign::Minus, Sign::Plus)];
    assert!(
        (cell - NEGATIVE_CELL).abs() <= 3.0 * se,
        "cell {cell}, expected {NEGATIVE_CELL} within 3 x {se}"
    );
    assert_eq!(out.dropped_replicates, 0);
}

#[test]
fn weak_measurements_have_larger_reconstruction_errors() {
    let spec = BootstrapSpec::new(400, 23, 0.010, 0.0001).unwrap();
    let (weak_records, weak_cfg) = sampled_records(2f64.to_radians(), 100_000, 5);
    let weak =
        bootstrap_reconstruction(&weak_records, &model_point(&weak_cfg), &model_fit(), &spec)
            .unwrap();
    let (mid_records, mid_cfg) = sampled_records(12f64.to_radians(), 100_000, 6);
    let mid = bootstrap_reconstruction(&mid_records, &model_point(&mid_cfg), &model_fit(), &spec)
        .unwrap();
    for (w, m) in weak.stderr.iter().zip(mid.stderr.iter()) {
        assert!(w > m, "weak stderr {w} not above mid-strength stderr {m}");
    }
}

#[test]
fn raw_experimental_distributions_stay_positive_at_all_strengths() {
    for k in 0..11 {
        let theta = (2.0 + 2.0 * k as f64).to_radians();
        let (records, _) = sampled_records(theta, 100_000, 700 + k);
        let (p_exp, _) = lgsim_core::measurement::estimate_probabilities(&records).unwrap();
        assert!(p_exp.cells().iter().all(|&c| c >= 0.0));
        let report = evaluate_from_distribution(&p_exp);
        assert!(report.margin >= 0.0);
        assert!(!report.violated);
    }
}

#[test]
fn quasi_flavor_survives_a_noisy_reconstruction() {
    let (records, cfg) = sampled_records(10f64.to_radians(), 1_000_000, 321);
    let (p_exp, _) = lgsim_core::measurement::estimate_probabilities(&records).unwrap();
    let recon = invert_spin_flip_map(&p_exp, &ErrorParams::from_apparatus(&cfg)).unwrap();
    assert_eq!(recon.flavor(), lgsim_core::Flavor::Quasi);
    assert!(recon.get(Sign::Minus, Sign::Plus) < 0.0);
    let report = evaluate_from_distribution(&recon);
    assert!(report.violated);
}
