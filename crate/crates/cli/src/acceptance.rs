//! Release gate: one check per quantitative claim the artifact must
//! reproduce, each with its tolerance pinned in code. `run_all` executes
//! every check; the `check` CLI verb and the acceptance test target both
//! print one pass/fail line per criterion.

use crate::config::RunConfig;
use crate::runner::{calibration_sweep, main_experiment};
use lgsim_core::calibration::{characteristic_residual, Estimate, VisibilityFit};
use lgsim_core::dist::{outcome_index, JointDistribution, Sign, OUTCOMES};
use lgsim_core::lgi::evaluate_from_correlations;
use lgsim_core::measurement::{
    estimate_probabilities, noisy_joint_distribution, simulate_counts, single_sign_estimate,
    theta_for_epsilon, theta_for_eta, ApparatusConfig,
};
use lgsim_core::qubit::prepare_linear_polarization;
use lgsim_core::spinflip::{
    correlations_from_state, epsilon_zero_crossing, eta_zero_crossing, forward_spin_flip_map,
    invert_spin_flip_map, theoretical_intrinsic, CorrelationTriple, ErrorParams,
};
use lgsim_core::uncertainty::{bootstrap_reconstruction, BootstrapSpec};
use lgsim_core::CalibrationPoint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_8, SQRT_2};
use std::fmt;
use std::time::Instant;

const NEGATIVE_CELL: f64 = (1.0 - SQRT_2) / 4.0;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} [{}] {} — {} ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn outcome(
    id: usize,
    name: &'static str,
    started: Instant,
    passed: bool,
    detail: String,
) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

fn quasi_from_moments(m2: f64, m3: f64, m23: f64) -> JointDistribution {
    let mut cells = [0.0f64; 4];
    for &(s2, s3) in OUTCOMES.iter() {
        cells[outcome_index(s2, s3)] =
            0.25 * (1.0 + s2.value() * m2 + s3.value() * m3 + s2.value() * s3.value() * m23);
    }
    JointDistribution::classify(cells).unwrap()
}

/// 1. Forward map followed by inversion is the identity to 1e-12 per cell
///    over 1000 random signed distributions, in under a second.
pub fn exact_inversion() -> CriterionOutcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = quasi_from_moments(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        let err = ErrorParams::new(
            rng.random_range(0.05..=1.0),
            rng.random_range(0.0..=0.95),
        )
        .unwrap();
        let back = invert_spin_flip_map(&forward_spin_flip_map(&p, &err), &err).unwrap();
        for (a, b) in back.cells().iter().zip(p.cells().iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    let passed = worst <= 1e-12 && seconds < 1.0;
    outcome(
        1,
        "exact inversion round trip",
        started,
        passed,
        format!("max cell deviation {worst:.2e} (limit 1e-12), {seconds:.3} s (limit 1 s)"),
    )
}

/// 2. The quantum simulation equals the spin-flip model applied to the
///    intrinsic distribution, to 1e-12, over a 10x10x3x3 parameter grid.
pub fn model_equivalence() -> CriterionOutcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
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
                    let flips =
                        forward_spin_flip_map(&intrinsic, &ErrorParams::from_apparatus(&cfg));
                    for (a, b) in quantum.cells().iter().zip(flips.cells().iter()) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    let passed = worst <= 1e-12 && seconds < 5.0;
    outcome(
        2,
        "quantum model equals spin-flip model",
        started,
        passed,
        format!("max cell deviation {worst:.2e} (limit 1e-12), {seconds:.3} s (limit 5 s)"),
    )
}

/// 3. Full sampled pipeline at defaults: the reconstructed `(-1, +1)` cell
///    sits within three standard errors of `(1 - sqrt(2))/4` at every angle,
///    and the across-angle spread of the means stays below 0.01.
pub fn intrinsic_negativity() -> CriterionOutcome {
    let started = Instant::now();
    let mut cfg = RunConfig::default();
    cfg.validate().expect("defaults are valid");

    let run = calibration_sweep(&cfg)
        .and_then(|(_, fit, _)| main_experiment(&cfg, &fit));
    let results = match run {
        Ok(r) => r,
        Err(e) => {
            return outcome(
                3,
                "intrinsic negativity across strengths",
                started,
                false,
                format!("pipeline failed: {e}"),
            )
        }
    };

    let mp = outcome_index(Sign::Minus, Sign::Plus);
    let mut means = Vec::new();
    let mut worst_pull = 0.0f64;
    let mut all_within = true;
    for r in &results {
        match &r.recon {
            Some(recon) => {
                let cell = recon.mean.cells()[mp];
                let se = recon.stderr[mp];
                means.push(cell);
                let pull = (cell - NEGATIVE_CELL).abs() / se.max(1e-15);
                worst_pull = worst_pull.max(pull);
                if pull > 3.0 {
                    all_within = false;
                }
            }
            None => all_within = false,
        }
    }
    let n = means.len() as f64;
    let mean_of_means = means.iter().sum::<f64>() / n;
    let spread = (means
        .iter()
        .map(|m| (m - mean_of_means).powi(2))
        .sum::<f64>()
        / (n - 1.0))
        .sqrt();

    let seconds = started.elapsed().as_secs_f64();
    let passed = all_within && spread < 0.01 && seconds < 120.0;
    outcome(
        3,
        "intrinsic negativity across strengths",
        started,
        passed,
        format!(
            "worst pull {worst_pull:.2} sigma (limit 3), across-angle spread {spread:.2e} \
             (limit 1e-2), {seconds:.1} s (limit 120 s)"
        ),
    )
}

/// 4. The maximal-violation margin from the reference correlations equals
///    `1 - sqrt(2)` to 1e-12.
pub fn lgi_margin() -> CriterionOutcome {
    let started = Instant::now();
    let k = CorrelationTriple::new(1.0 / SQRT_2, -1.0 / SQRT_2, 0.0).unwrap();
    let report = evaluate_from_correlations(&k);
    let deviation = (report.margin - (1.0 - SQRT_2)).abs();
    let passed = deviation <= 1e-12 && report.violated;
    outcome(
        4,
        "maximal inequality violation margin",
        started,
        passed,
        format!(
            "margin {:.12} vs 1 - sqrt(2), deviation {deviation:.2e} (limit 1e-12)",
            report.margin
        ),
    )
}

/// 5. Exact-mode calibration reproduces `epsilon = 0.853 sin(4 theta)` and
///    `1 - eta = 0.9997 cos(4 theta)` to 1e-12 at every sweep angle, and the
///    characteristic residual vanishes to 1e-12.
pub fn calibration_curves() -> CriterionOutcome {
    let started = Instant::now();
    let mut cfg = RunConfig {
        exact: true,
        ..RunConfig::default()
    };
    cfg.validate().expect("defaults are valid");
    let (points, _, _) = match calibration_sweep(&cfg) {
        Ok(x) => x,
        Err(e) => {
            return outcome(
                5,
                "exact calibration curves",
                started,
                false,
                format!("sweep failed: {e}"),
            )
        }
    };
    let mut worst_curve = 0.0f64;
    let mut worst_residual = 0.0f64;
    for p in &points {
        let eps_model = 0.853 * (4.0 * p.theta).sin();
        let keep_model = 0.9997 * (4.0 * p.theta).cos();
        worst_curve = worst_curve
            .max((p.epsilon.value - eps_model).abs())
            .max((1.0 - p.eta.value - keep_model).abs());
        let err = ErrorParams::new(
            p.epsilon.value.clamp(0.0, 1.0),
            p.eta.value.clamp(0.0, 1.0),
        )
        .unwrap();
        worst_residual = worst_residual.max(characteristic_residual(&err, 0.853, 0.9997).abs());
    }
    let passed = worst_curve <= 1e-12 && worst_residual <= 1e-12;
    outcome(
        5,
        "exact calibration curves",
        started,
        passed,
        format!(
            "max curve deviation {worst_curve:.2e}, max characteristic residual \
             {worst_residual:.2e} (limits 1e-12)"
        ),
    )
}

/// 6. Over 200 seeded repetitions at the default photon budget, the fitted
///    `v_pm` lands within +/-0.010 of the true value at least 95% of the time.
pub fn visibility_recovery() -> CriterionOutcome {
    let started = Instant::now();
    let base = RunConfig::default();
    let mut hits = 0usize;
    let reps = 200usize;
    for r in 0..reps {
        let mut cfg = RunConfig {
            base_seed: base
                .base_seed
                .wrapping_add((r as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..base.clone()
        };
        cfg.validate().expect("defaults are valid");
        match calibration_sweep(&cfg) {
            Ok((_, fit, _)) => {
                if (fit.v_pm.value - 0.853).abs() <= 0.010 {
                    hits += 1;
                }
            }
            Err(e) => {
                return outcome(
                    6,
                    "visibility recovery coverage",
                    started,
                    false,
                    format!("sweep failed: {e}"),
                )
            }
        }
    }
    let passed = hits * 100 >= reps * 95;
    outcome(
        6,
        "visibility recovery coverage",
        started,
        passed,
        format!("{hits}/{reps} fits within +/-0.010 of the true v_pm (need >= 190)"),
    )
}

/// 7. The exact-mode crossover of `P_exp(+1,+1)` and `P_exp(-1,-1)` sits at
///    `0.25 atan(v_hv / v_pm)` within 0.2 degrees, located by interpolation
///    on the sweep.
pub fn crossover() -> CriterionOutcome {
    let started = Instant::now();
    let cfg = RunConfig::default();
    let state = prepare_linear_polarization(cfg.phi_radians());
    let gap = |theta_deg: f64| {
        let apparatus =
            ApparatusConfig::new(theta_deg.to_radians(), cfg.v_pm, cfg.v_hv, 0.0, 1).unwrap();
        let p = noisy_joint_distribution(&state, &apparatus);
        p.get(Sign::Plus, Sign::Plus) - p.get(Sign::Minus, Sign::Minus)
    };

    let mut found = None;
    let sweep = &cfg.theta_sweep;
    for pair in sweep.windows(2) {
        let (a, b) = (gap(pair[0]), gap(pair[1]));
        if a <= 0.0 && b > 0.0 {
            found = Some(pair[0] + (pair[1] - pair[0]) * (-a) / (b - a));
            break;
        }
    }
    let target = 0.25 * (cfg.v_hv / cfg.v_pm).atan().to_degrees();
    let (passed, detail) = match found {
        Some(root) => {
            let deviation = (root - target).abs();
            (
                deviation <= 0.2,
                format!(
                    "interpolated crossover {root:.3} deg vs 0.25 atan(v_hv/v_pm) = \
                     {target:.3} deg, deviation {deviation:.3} (limit 0.2)"
                ),
            )
        }
        None => (false, "no sign change found in the sweep".to_string()),
    };
    outcome(7, "experimental probability crossover", started, passed, detail)
}

/// 8. The partial compensations change sign at the predicted angles:
///    `P_eta(-1,+1)` near 16.4 degrees and `P_eps(-1,+1)` near 7.3 degrees
///    (each within 0.5 degrees), with matching sign changes of the exact
///    curves across those angles.
pub fn partial_sign_changes() -> CriterionOutcome {
    let started = Instant::now();
    let cfg = RunConfig::default();
    let state = prepare_linear_polarization(cfg.phi_radians());
    let intrinsic = theoretical_intrinsic(&correlations_from_state(&state));

    let eta_star = eta_zero_crossing(&intrinsic);
    let eps_star = epsilon_zero_crossing(&intrinsic);
    let theta_eta = eta_star
        .and_then(|eta| theta_for_eta(eta, cfg.v_hv))
        .map(f64::to_degrees);
    let theta_eps = eps_star
        .and_then(|eps| theta_for_epsilon(eps, cfg.v_pm))
        .map(f64::to_degrees);

    let partial_cells = |theta_deg: f64| {
        let apparatus =
            ApparatusConfig::new(theta_deg.to_radians(), cfg.v_pm, cfg.v_hv, 0.0, 1).unwrap();
        let p = noisy_joint_distribution(&state, &apparatus);
        let p_eta = lgsim_core::spinflip::partial_invert_resolution_only(&p, apparatus.epsilon())
            .unwrap();
        let p_eps =
            lgsim_core::spinflip::partial_invert_backaction_only(&p, apparatus.eta()).unwrap();
        (
            p_eta.get(Sign::Minus, Sign::Plus),
            p_eps.get(Sign::Minus, Sign::Plus),
        )
    };
    let brackets = partial_cells(15.0).0 < 0.0
        && partial_cells(17.0).0 > 0.0
        && partial_cells(6.0).1 > 0.0
        && partial_cells(8.0).1 < 0.0;

    let (passed, detail) = match (theta_eta, theta_eps) {
        (Some(te), Some(tp)) => {
            let ok = (te - 16.4).abs() <= 0.5 && (tp - 7.3).abs() <= 0.5 && brackets;
            (
                ok,
                format!(
                    "back-action-limited crossing {te:.2} deg (16.4 +/- 0.5), \
                     resolution-limited crossing {tp:.2} deg (7.3 +/- 0.5), \
                     sign brackets {brackets}"
                ),
            )
        }
        _ => (false, "zero crossings not found".to_string()),
    };
    outcome(8, "partial compensation sign changes", started, passed, detail)
}

/// 9. Sampled experimental distributions have no negative cells and never
///    violate the inequality before reconstruction.
pub fn raw_positivity() -> CriterionOutcome {
    let started = Instant::now();
    let cfg = RunConfig::default();
    let state = prepare_linear_polarization(cfg.phi_radians());
    let mut min_cell = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for seed_offset in 0..3u64 {
        for (i, &theta_deg) in cfg.theta_sweep.iter().enumerate() {
            let apparatus = ApparatusConfig::new(
                theta_deg.to_radians(),
                cfg.v_pm,
                cfg.v_hv,
                cfg.delta,
                100_000,
            )
            .unwrap();
            let records: Vec<_> = Sign::BOTH
                .into_iter()
                .map(|sign| {
                    let sign_bit = matches!(sign, Sign::Minus) as u64;
                    simulate_counts(
                        &state,
                        &apparatus,
                        sign,
                        cfg.base_seed ^ (i as u64) ^ (seed_offset << 32) ^ (sign_bit << 63),
                    )
                })
                .collect();
            let (p_exp, _) = estimate_probabilities(&records).unwrap();
            min_cell = min_cell.min(p_exp.cells().iter().copied().fold(f64::INFINITY, f64::min));
            let report = lgsim_core::lgi::evaluate_from_distribution(&p_exp);
            min_margin = min_margin.min(report.margin);
        }
    }
    let passed = min_cell >= 0.0 && min_margin >= 0.0;
    outcome(
        9,
        "raw data positivity",
        started,
        passed,
        format!("min cell {min_cell:.3e}, min margin {min_margin:.3e} (both must be >= 0)"),
    )
}

/// 10. With a 5% detector imbalance, the sign-averaged estimator's bias is
///     below `delta^2` on every cell while the single-sign estimator is
///     biased by more than 1e-2, measured over 1e5 repetitions.
pub fn imbalance_compensation() -> CriterionOutcome {
    let started = Instant::now();
    let delta = 0.05;
    let cfg = RunConfig::default();
    let state = prepare_linear_polarization(cfg.phi_radians());
    let apparatus =
        ApparatusConfig::new(10f64.to_radians(), cfg.v_pm, cfg.v_hv, delta, 10_000).unwrap();
    let truth = noisy_joint_distribution(&state, &apparatus);

    let reps = 100_000u64;
    let mut averaged_sum = [0.0f64; 4];
    let mut single_sum = [0.0f64; 4];
    for r in 0..reps {
        let plus = simulate_counts(&state, &apparatus, Sign::Plus, 0x10_0000 + 2 * r);
        let minus = simulate_counts(&state, &apparatus, Sign::Minus, 0x10_0000 + 2 * r + 1);
        let records = [plus, minus];
        let (avg, _) = estimate_probabilities(&records).unwrap();
        let (single, _) = single_sign_estimate(&records[..1], Sign::Plus).unwrap();
        for i in 0..4 {
            averaged_sum[i] += avg.cells()[i];
            single_sum[i] += single.cells()[i];
        }
    }

    let mut worst_avg_bias = 0.0f64;
    let mut worst_single_bias = 0.0f64;
    for i in 0..4 {
        worst_avg_bias =
            worst_avg_bias.max((averaged_sum[i] / reps as f64 - truth.cells()[i]).abs());
        worst_single_bias =
            worst_single_bias.max((single_sum[i] / reps as f64 - truth.cells()[i]).abs());
    }
    let passed = worst_avg_bias < 2.5e-3 && worst_single_bias > 1e-2;
    outcome(
        10,
        "detector imbalance compensation",
        started,
        passed,
        format!(
            "averaged-estimator bias {worst_avg_bias:.2e} (limit 2.5e-3), \
             single-sign bias {worst_single_bias:.2e} (must exceed 1e-2)"
        ),
    )
}

/// Covariance of the reconstruction propagated in closed form from the
/// per-filter-run multinomial statistics of the given records.
#[allow(clippy::needless_range_loop)]
fn delta_method_stderr(
    records: &[lgsim_core::CountRecord],
    err: &ErrorParams,
) -> [f64; 4] {
    let n = records[0].config().photons_per_setting() as f64;
    let two_n = 2.0 * n;

    // Covariance of the per-budget averaged rates f = sum_s c_s / (2N).
    let mut cov_f = [[0.0f64; 4]; 4];
    for record in records {
        for s3 in Sign::BOTH {
            let cells = [
                outcome_index(Sign::Plus, s3),
                outcome_index(Sign::Minus, s3),
            ];
            let pi = [
                record.counts()[cells[0]] as f64 / n,
                record.counts()[cells[1]] as f64 / n,
            ];
            for a in 0..2 {
                for b in 0..2 {
                    let cov_counts = if a == b {
                        n * pi[a] * (1.0 - pi[a])
                    } else {
                        -n * pi[a] * pi[b]
                    };
                    cov_f[cells[a]][cells[b]] += cov_counts / (two_n * two_n);
                }
            }
        }
    }

    // Rates and their normalization.
    let mut f = [0.0f64; 4];
    for record in records {
        for i in 0..4 {
            f[i] += record.counts()[i] as f64 / two_n;
        }
    }
    let total: f64 = f.iter().sum();
    let p_hat: Vec<f64> = f.iter().map(|x| x / total).collect();

    // Jacobian of the normalization p = f / sum(f).
    let mut jac = [[0.0f64; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            jac[a][b] = ((a == b) as u64 as f64 - p_hat[a]) / total;
        }
    }
    let mut cov_p = [[0.0f64; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = 0.0;
            for u in 0..4 {
                for v in 0..4 {
                    acc += jac[a][u] * cov_f[u][v] * jac[b][v];
                }
            }
            cov_p[a][b] = acc;
        }
    }

    // Linear inversion coefficients.
    let eps = err.epsilon();
    let eta = err.eta();
    let denom = 4.0 * eps * (1.0 - eta);
    let mut inv = [[0.0f64; 4]; 4];
    for &(s2, s3) in OUTCOMES.iter() {
        let row = outcome_index(s2, s3);
        inv[row][outcome_index(s2, s3)] = (1.0 + eps) * (2.0 - eta) / denom;
        inv[row][outcome_index(s2.flip(), s3)] = -(1.0 - eps) * (2.0 - eta) / denom;
        inv[row][outcome_index(s2, s3.flip())] = -(1.0 + eps) * eta / denom;
        inv[row][outcome_index(s2.flip(), s3.flip())] = (1.0 - eps) * eta / denom;
    }

    let mut stderr = [0.0f64; 4];
    for (a, out) in stderr.iter_mut().enumerate() {
        let mut var = 0.0;
        for u in 0..4 {
            for v in 0..4 {
                var += inv[a][u] * cov_p[u][v] * inv[a][v];
            }
        }
        *out = var.max(0.0).sqrt();
    }
    stderr
}

/// 11. Bootstrap standard errors agree with the closed-form delta method
///     within 10% per cell when the calibration sigmas are off, and the
///     error profile over the sweep is minimal near the angle where the
///     resolution equals one minus the back-action.
pub fn bootstrap_validity() -> CriterionOutcome {
    let started = Instant::now();
    let cfg = RunConfig::default();
    let state = prepare_linear_polarization(cfg.phi_radians());
    let fit = VisibilityFit {
        v_pm: Estimate::new(cfg.v_pm, 0.0),
        v_hv: Estimate::new(cfg.v_hv, 0.0),
        residual_rms: 0.0,
    };
    let n = 100_000u64;

    let run_point = |theta_deg: f64, sigmas: (f64, f64), seed: u64| {
        let apparatus =
            ApparatusConfig::new(theta_deg.to_radians(), cfg.v_pm, cfg.v_hv, 0.0, n).unwrap();
        let records: Vec<_> = Sign::BOTH
            .into_iter()
            .enumerate()
            .map(|(i, sign)| simulate_counts(&state, &apparatus, sign, seed + i as u64))
            .collect();
        let err = ErrorParams::from_apparatus(&apparatus);
        let calib = CalibrationPoint {
            theta: apparatus.theta(),
            epsilon: Estimate::new(err.epsilon(), 0.0),
            eta: Estimate::new(err.eta(), 0.0),
        };
        let spec = BootstrapSpec::new(2000, seed ^ 0xB007_5EED, sigmas.0, sigmas.1).unwrap();
        let boot = bootstrap_reconstruction(&records, &calib, &fit, &spec).unwrap();
        (records, err, boot)
    };

    // (a) delta-method agreement at a mid-strength angle, sigmas off.
    let (records, err, boot) = run_point(10.0, (0.0, 0.0), 0x11CE);
    let delta_se = delta_method_stderr(&records, &err);
    let mut worst_ratio_dev = 0.0f64;
    for (b, d) in boot.stderr.iter().zip(delta_se.iter()) {
        worst_ratio_dev = worst_ratio_dev.max((b / d - 1.0).abs());
    }

    // (b) U-shaped error profile with the default calibration sigmas.
    let minimal_theta = 0.25 * (cfg.v_hv / cfg.v_pm).atan().to_degrees();
    let (_, _, boot_min) = run_point(minimal_theta, (cfg.v_pm_sigma, cfg.v_hv_sigma), 0x21CE);
    let (_, _, boot_weak) = run_point(3.0, (cfg.v_pm_sigma, cfg.v_hv_sigma), 0x31CE);
    let (_, _, boot_strong) = run_point(21.0, (cfg.v_pm_sigma, cfg.v_hv_sigma), 0x41CE);
    let u_shaped = (0..4).all(|i| {
        boot_min.stderr[i] < boot_weak.stderr[i] && boot_min.stderr[i] < boot_strong.stderr[i]
    });

    let passed = worst_ratio_dev <= 0.10 && u_shaped;
    outcome(
        11,
        "bootstrap error propagation",
        started,
        passed,
        format!(
            "max |bootstrap/delta-method - 1| = {worst_ratio_dev:.3} (limit 0.10), \
             stderr minimal near {minimal_theta:.2} deg: {u_shaped}"
        ),
    )
}

/// Runs every acceptance criterion in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        exact_inversion(),
        model_equivalence(),
        intrinsic_negativity(),
        lgi_margin(),
        calibration_curves(),
        visibility_recovery(),
        crossover(),
        partial_sign_changes(),
        raw_positivity(),
        imbalance_compensation(),
        bootstrap_validity(),
    ]
}
