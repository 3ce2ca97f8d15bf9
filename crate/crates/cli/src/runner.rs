//! Sweep orchestration: calibration runs, the main experiment and the
//! per-angle analysis products.
//!
//! Sweep points execute in parallel; every simulated run draws from its own
//! stream with a seed derived from `(base_seed, point index, role)`, so
//! results are independent of scheduling and reproducible bit-for-bit on
//! the same build.

use crate::config::RunConfig;
use lgsim_core::calibration::{
    estimate_epsilon, estimate_eta, fit_visibilities, characteristic_residual, CalibrationPoint,
    Estimate, FitError, VisibilityFit,
};
use lgsim_core::lgi::{evaluate_from_distribution, LgiReport};
use lgsim_core::measurement::{
    estimate_probabilities, noisy_joint_distribution, simulate_counts, ApparatusConfig,
    ApparatusError, EstimateError,
};
use lgsim_core::qubit::{prepare_linear_polarization, QubitState};
use lgsim_core::spinflip::{
    invert_spin_flip_map, partial_invert_backaction_only, partial_invert_resolution_only,
    ErrorParams,
};
use lgsim_core::uncertainty::{
    bootstrap_reconstruction, BootstrapError, BootstrapSpec, DistributionEstimate,
};
use lgsim_core::{CountRecord, JointDistribution, Sign};
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_4;
use thiserror::Error;

// Stream roles; combined with the point index they name every RNG stream
// of a run.
const ROLE_CALIB_P: u64 = 1;
const ROLE_CALIB_H: u64 = 2;
const ROLE_MAIN: u64 = 3;
const ROLE_BOOTSTRAP: u64 = 4;

fn stream_seed(base: u64, point: usize, role: u64, sign: Sign) -> u64 {
    let sign_bit = match sign {
        Sign::Plus => 0u64,
        Sign::Minus => 1u64,
    };
    base ^ point as u64 ^ (role.wrapping_mul(0x9E37_79B9_7F4A_7C15)) ^ (sign_bit << 63)
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Apparatus(#[from] ApparatusError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("reconstruction failed at every sweep angle")]
    AllPointsSingular,
}

fn apparatus_at(config: &RunConfig, theta_deg: f64) -> Result<ApparatusConfig, ApparatusError> {
    ApparatusConfig::new(
        theta_deg.to_radians(),
        config.v_pm,
        config.v_hv,
        config.delta,
        config.photons_per_setting,
    )
}

/// Simulates both HWP rotation directions for one input state and setting.
fn both_sign_records(
    state: &QubitState,
    apparatus: &ApparatusConfig,
    base: u64,
    point: usize,
    role: u64,
) -> Vec<CountRecord> {
    Sign::BOTH
        .into_iter()
        .map(|sign| {
            simulate_counts(
                state,
                apparatus,
                sign,
                stream_seed(base, point, role, sign),
            )
        })
        .collect()
}

/// Distribution, per-cell errors, and the raw records when sampling
/// (`None` in exact mode).
type Observation = (JointDistribution, [f64; 4], Option<Vec<CountRecord>>);

/// Measured (or exact) joint distribution for one input state.
fn observe(
    state: &QubitState,
    apparatus: &ApparatusConfig,
    config: &RunConfig,
    point: usize,
    role: u64,
) -> Result<Observation, RunError> {
    if config.exact {
        Ok((noisy_joint_distribution(state, apparatus), [0.0; 4], None))
    } else {
        let records = both_sign_records(state, apparatus, config.base_seed, point, role);
        let (p, se) = estimate_probabilities(&records)?;
        Ok((p, se, Some(records)))
    }
}

/// Reference-input sweep: estimates resolution and back-action at each
/// angle and fits the visibilities. Returns the per-angle points and the
/// fit, plus warnings for estimates outside [0, 1] (they are propagated,
/// not clipped).
pub fn calibration_sweep(
    config: &RunConfig,
) -> Result<(Vec<CalibrationPoint>, VisibilityFit, Vec<String>), RunError> {
    let points: Result<Vec<CalibrationPoint>, RunError> = config
        .theta_sweep
        .par_iter()
        .enumerate()
        .map(|(i, &theta_deg)| {
            let apparatus = apparatus_at(config, theta_deg)?;
            let p_input = prepare_linear_polarization(FRAC_PI_4);
            let (p_dist, p_se, _) = observe(&p_input, &apparatus, config, i, ROLE_CALIB_P)?;
            let epsilon = estimate_epsilon(&p_dist, &p_se);

            let h_input = QubitState::horizontal();
            let (h_dist, h_se, _) = observe(&h_input, &apparatus, config, i, ROLE_CALIB_H)?;
            let eta = estimate_eta(&h_dist, &h_se);

            Ok(CalibrationPoint {
                theta: apparatus.theta(),
                epsilon,
                eta,
            })
        })
        .collect();
    let points = points?;

    let mut warnings = Vec::new();
    for point in &points {
        let theta_deg = point.theta.to_degrees();
        if !(0.0..=1.0).contains(&point.epsilon.value) {
            warnings.push(format!(
                "epsilon estimate {:.6} at theta = {theta_deg:.3} deg outside [0, 1]",
                point.epsilon.value
            ));
        }
        if !(0.0..=1.0).contains(&point.eta.value) {
            warnings.push(format!(
                "eta estimate {:.6} at theta = {theta_deg:.3} deg outside [0, 1]",
                point.eta.value
            ));
        }
    }

    let fit = fit_visibilities(&points)?;
    Ok((points, fit, warnings))
}

/// Cells of the partial-compensation dataset at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialRow {
    pub pexp_mp: f64,
    pub ppsi_mp: f64,
    pub peps_mp: f64,
    pub peta_mp: f64,
}

/// Everything produced at one sweep angle.
#[derive(Debug, Clone)]
pub struct ThetaResult {
    pub theta_deg: f64,
    pub pexp: JointDistribution,
    pub pexp_se: [f64; 4],
    /// Model resolution used for the reconstruction at this angle.
    pub epsilon: f64,
    /// Model back-action used for the reconstruction at this angle.
    pub eta: f64,
    /// Distance of `(epsilon, eta)` from the visibility characteristic.
    pub residual: f64,
    pub recon: Option<DistributionEstimate>,
    pub partial: Option<PartialRow>,
    pub lgi: Option<LgiReport>,
}

impl ThetaResult {
    pub fn dropped_replicates(&self) -> usize {
        self.recon.as_ref().map_or(0, |r| r.dropped_replicates)
    }
}

/// Reconstruction of one angle in exact mode (no sampling, no bootstrap).
fn exact_reconstruction(
    p_exp: &JointDistribution,
    err: &ErrorParams,
) -> Option<DistributionEstimate> {
    invert_spin_flip_map(p_exp, err)
        .ok()
        .map(|mean| DistributionEstimate {
            mean,
            stderr: [0.0; 4],
            replicate_count: 0,
            dropped_replicates: 0,
        })
}

/// Main experiment: measures the configured input at every sweep angle,
/// reconstructs the intrinsic distribution with bootstrap errors, computes
/// the two partial compensations and evaluates the inequality. Angles whose
/// reconstruction is singular are reported with empty analysis instead of
/// aborting the run.
pub fn main_experiment(
    config: &RunConfig,
    fit: &VisibilityFit,
) -> Result<Vec<ThetaResult>, RunError> {
    let state = prepare_linear_polarization(config.phi_radians());
    let results: Result<Vec<ThetaResult>, RunError> = config
        .theta_sweep
        .par_iter()
        .enumerate()
        .map(|(i, &theta_deg)| {
            let apparatus = apparatus_at(config, theta_deg)?;
            let (p_exp, pexp_se, records) =
                observe(&state, &apparatus, config, i, ROLE_MAIN)?;

            // Error parameters from the fitted visibility model.
            let epsilon = (fit.v_pm.value * (4.0 * apparatus.theta()).sin()).clamp(0.0, 1.0);
            let eta = (1.0 - fit.v_hv.value * (4.0 * apparatus.theta()).cos()).clamp(0.0, 1.0);
            let residual = characteristic_residual(
                &ErrorParams::new(epsilon, eta).expect("clamped parameters are in range"),
                fit.v_pm.value,
                fit.v_hv.value,
            );

            let recon = match records {
                None => exact_reconstruction(
                    &p_exp,
                    &ErrorParams::new(epsilon, eta).expect("clamped parameters are in range"),
                ),
                Some(records) => {
                    let spec = BootstrapSpec::new(
                        config.bootstrap_replicates,
                        stream_seed(config.base_seed, i, ROLE_BOOTSTRAP, Sign::Plus),
                        config.v_pm_sigma,
                        config.v_hv_sigma,
                    )
                    .expect("replicate count and sigmas are validated");
                    let calib = CalibrationPoint {
                        theta: apparatus.theta(),
                        epsilon: Estimate::new(epsilon, fit.v_pm.std_err),
                        eta: Estimate::new(eta, fit.v_hv.std_err),
                    };
                    match bootstrap_reconstruction(&records, &calib, fit, &spec) {
                        Ok(estimate) => Some(estimate),
                        Err(BootstrapError::AllReplicatesSingular { .. }) => None,
                        Err(BootstrapError::Records(e)) => return Err(RunError::Estimate(e)),
                        Err(_) => None,
                    }
                }
            };

            let partial = recon.as_ref().and_then(|r| {
                let peps = partial_invert_backaction_only(&p_exp, eta).ok()?;
                let peta = partial_invert_resolution_only(&p_exp, epsilon).ok()?;
                Some(PartialRow {
                    pexp_mp: p_exp.get(Sign::Minus, Sign::Plus),
                    ppsi_mp: r.mean.get(Sign::Minus, Sign::Plus),
                    peps_mp: peps.get(Sign::Minus, Sign::Plus),
                    peta_mp: peta.get(Sign::Minus, Sign::Plus),
                })
            });

            let lgi = recon.as_ref().map(|r| evaluate_from_distribution(&r.mean));

            Ok(ThetaResult {
                theta_deg,
                pexp: p_exp,
                pexp_se,
                epsilon,
                eta,
                residual,
                recon,
                partial,
                lgi,
            })
        })
        .collect();
    let results = results?;

    if results.iter().all(|r| r.recon.is_none()) {
        return Err(RunError::AllPointsSingular);
    }
    Ok(results)
}
