//! Bootstrap propagation of counting statistics and calibration uncertainty
//! through the spin-flip reconstruction.
//!
//! Each replicate resamples every filter run multinomially, perturbs the
//! fitted visibilities by Gaussian draws (one draw per replicate, so the
//! calibration error is fully correlated across the four cells), rebuilds
//! the error parameters for the point's angle, and reruns estimation and
//! inversion. Replicates whose inversion is singular are dropped and
//! counted rather than clamped, so the negativity estimate stays unbiased.

use crate::calibration::{CalibrationPoint, VisibilityFit};
use crate::dist::{outcome_index, JointDistribution, Sign};
use crate::measurement::{estimate_probabilities, sample_multinomial, CountRecord, EstimateError};
use crate::spinflip::{invert_spin_flip_map, ErrorParams, SINGULAR_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BootstrapError {
    #[error("bootstrap needs at least 2 replicates, got {0}")]
    TooFewReplicates(usize),
    #[error("visibility sigma {name} = {value} must be non-negative and finite")]
    BadSigma { name: &'static str, value: f64 },
    #[error(transparent)]
    Records(#[from] EstimateError),
    #[error("all {attempted} replicates hit a singular reconstruction")]
    AllReplicatesSingular { attempted: usize },
}

/// Bootstrap configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSpec {
    replicates: usize,
    seed: u64,
    v_pm_sigma: f64,
    v_hv_sigma: f64,
}

impl BootstrapSpec {
    pub fn new(
        replicates: usize,
        seed: u64,
        v_pm_sigma: f64,
        v_hv_sigma: f64,
    ) -> Result<Self, BootstrapError> {
        if replicates < 2 {
            return Err(BootstrapError::TooFewReplicates(replicates));
        }
        for (name, value) in [("v_pm_sigma", v_pm_sigma), ("v_hv_sigma", v_hv_sigma)] {
            if !value.is_finite() || value < 0.0 {
                return Err(BootstrapError::BadSigma { name, value });
            }
        }
        Ok(Self {
            replicates,
            seed,
            v_pm_sigma,
            v_hv_sigma,
        })
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn v_pm_sigma(&self) -> f64 {
        self.v_pm_sigma
    }

    pub fn v_hv_sigma(&self) -> f64 {
        self.v_hv_sigma
    }
}

/// Reconstructed distribution with per-cell bootstrap standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionEstimate {
    pub mean: JointDistribution,
    pub stderr: [f64; 4],
    pub replicate_count: usize,
    pub dropped_replicates: usize,
}

/// Resamples each filter run of each record: the detected cells plus the
/// implicit discard category form a multinomial of size
/// `photons_per_setting`.
fn resample_record(rng: &mut ChaCha8Rng, record: &CountRecord) -> CountRecord {
    let n = record.config().photons_per_setting();
    let n_f = n as f64;
    let mut counts = [0u64; 4];
    for s3 in Sign::BOTH {
        let idx_plus = outcome_index(Sign::Plus, s3);
        let idx_minus = outcome_index(Sign::Minus, s3);
        let p_plus = record.counts()[idx_plus] as f64 / n_f;
        let p_minus = record.counts()[idx_minus] as f64 / n_f;
        let discard = (1.0 - p_plus - p_minus).max(0.0);
        let [c_plus, c_minus, _] = sample_multinomial(rng, n, &[p_plus, p_minus, discard]);
        counts[idx_plus] = c_plus;
        counts[idx_minus] = c_minus;
    }
    CountRecord::new(counts, record.hwp_sign(), record.seed(), *record.config())
        .expect("resampled counts stay within the photon budget")
}

/// Bootstrap reconstruction of the intrinsic distribution at one sweep
/// point. Per replicate: counts are resampled, the visibilities are
/// perturbed, `(epsilon, eta)` are rebuilt from the fitted model at
/// `calib.theta`, and the resampled estimate is inverted. Deterministic
/// for a fixed `spec.seed` (replicate seeds are `seed ^ replicate_index`).
pub fn bootstrap_reconstruction(
    records: &[CountRecord],
    calib: &CalibrationPoint,
    fit: &VisibilityFit,
    spec: &BootstrapSpec,
) -> Result<DistributionEstimate, BootstrapError> {
    // Surfaces missing-sign / mixed-config problems before any resampling.
    estimate_probabilities(records)?;

    let sin4t = (4.0 * calib.theta).sin();
    let cos4t = (4.0 * calib.theta).cos();

    let mut kept_cells: Vec<[f64; 4]> = Vec::with_capacity(spec.replicates());
    let mut dropped = 0usize;

    for replicate in 0..spec.replicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed() ^ replicate as u64);
        let resampled: Vec<CountRecord> =
            records.iter().map(|r| resample_record(&mut rng, r)).collect();

        let v_pm = perturb(&mut rng, fit.v_pm.value, spec.v_pm_sigma());
        let v_hv = perturb(&mut rng, fit.v_hv.value, spec.v_hv_sigma());
        let epsilon = (v_pm * sin4t).clamp(0.0, 1.0);
        let eta = (1.0 - v_hv * cos4t).clamp(0.0, 1.0);
        if epsilon <= SINGULAR_TOL || 1.0 - eta <= SINGULAR_TOL {
            dropped += 1;
            continue;
        }
        let err = ErrorParams::new(epsilon, eta).expect("clamped parameters are in range");

        let estimated = match estimate_probabilities(&resampled) {
            Ok((p, _)) => p,
            Err(_) => {
                dropped += 1;
                continue;
            }
        };
        match invert_spin_flip_map(&estimated, &err) {
            Ok(reconstructed) => kept_cells.push(*reconstructed.cells()),
            Err(_) => dropped += 1,
        }
    }

    let kept = kept_cells.len();
    if kept == 0 {
        return Err(BootstrapError::AllReplicatesSingular {
            attempted: spec.replicates(),
        });
    }

    let k = kept as f64;
    let mut mean_cells = [0.0f64; 4];
    for cells in kept_cells.iter() {
        for (m, &c) in mean_cells.iter_mut().zip(cells.iter()) {
            *m += c;
        }
    }
    for m in mean_cells.iter_mut() {
        *m /= k;
    }
    let mut stderr = [0.0f64; 4];
    if kept > 1 {
        for cells in kept_cells.iter() {
            for i in 0..4 {
                stderr[i] += (cells[i] - mean_cells[i]).powi(2);
            }
        }
        for s in stderr.iter_mut() {
            *s = (*s / (k - 1.0)).sqrt();
        }
    }

    let mean = JointDistribution::quasi(mean_cells)
        .expect("mean of valid quasi-distributions is valid");
    Ok(DistributionEstimate {
        mean,
        stderr,
        replicate_count: kept,
        dropped_replicates: dropped,
    })
}

fn perturb(rng: &mut ChaCha8Rng, center: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        let normal = Normal::new(center, sigma).expect("sigma is positive and finite");
        normal.sample(rng)
    } else {
        center
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::Estimate;
    use crate::measurement::ApparatusConfig;
    use approx::assert_abs_diff_eq;

    fn fit(v_pm: f64, v_hv: f64) -> VisibilityFit {
        VisibilityFit {
            v_pm: Estimate::new(v_pm, 0.0),
            v_hv: Estimate::new(v_hv, 0.0),
            residual_rms: 0.0,
        }
    }

    fn point(theta: f64, v_pm: f64, v_hv: f64) -> CalibrationPoint {
        CalibrationPoint {
            theta,
            epsilon: Estimate::new(v_pm * (4.0 * theta).sin(), 0.0),
            eta: Estimate::new(1.0 - v_hv * (4.0 * theta).cos(), 0.0),
        }
    }

    #[test]
    fn spec_validation() {
        assert!(BootstrapSpec::new(1, 0, 0.0, 0.0).is_err());
        assert!(BootstrapSpec::new(10, 0, -0.1, 0.0).is_err());
        assert!(BootstrapSpec::new(10, 0, 0.0, f64::NAN).is_err());
        assert!(BootstrapSpec::new(2, 0, 0.01, 0.0001).is_ok());
    }

    #[test]
    fn degenerate_counts_give_zero_stderr_and_the_exact_inversion() {
        // Every filter run detects all photons in one cell: resampling is
        // deterministic, so with zero sigmas the bootstrap collapses onto
        // the plain reconstruction.
        let theta = 0.15;
        let cfg = ApparatusConfig::new(theta, 1.0, 1.0, 0.0, 1000).unwrap();
        let records: Vec<CountRecord> = Sign::BOTH
            .into_iter()
            .map(|sign| CountRecord::new([1000, 0, 1000, 0], sign, 0, cfg).unwrap())
            .collect();
        let spec = BootstrapSpec::new(50, 9, 0.0, 0.0).unwrap();
        let out =
            bootstrap_reconstruction(&records, &point(theta, 1.0, 1.0), &fit(1.0, 1.0), &spec)
                .unwrap();
        assert_eq!(out.replicate_count, 50);
        assert_eq!(out.dropped_replicates, 0);
        for &s in out.stderr.iter() {
            assert!(s < 1e-15, "stderr {s} not at rounding level");
        }
        let (p, _) = estimate_probabilities(&records).unwrap();
        let err = ErrorParams::from_apparatus(&cfg);
        let exact = invert_spin_flip_map(&p, &err).unwrap();
        for (a, b) in out.mean.cells().iter().zip(exact.cells().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_strength_point_fails_with_all_replicates_singular() {
        let cfg = ApparatusConfig::new(0.0, 1.0, 1.0, 0.0, 100).unwrap();
        let records: Vec<CountRecord> = Sign::BOTH
            .into_iter()
            .map(|sign| CountRecord::new([25, 25, 25, 25], sign, 0, cfg).unwrap())
            .collect();
        let spec = BootstrapSpec::new(10, 1, 0.0, 0.0).unwrap();
        let out = bootstrap_reconstruction(&records, &point(0.0, 1.0, 1.0), &fit(1.0, 1.0), &spec);
        assert_eq!(
            out.unwrap_err(),
            BootstrapError::AllReplicatesSingular { attempted: 10 }
        );
    }

    #[test]
    fn record_problems_surface_before_resampling() {
        let cfg = ApparatusConfig::new(0.2, 1.0, 1.0, 0.0, 100).unwrap();
        let records = vec![CountRecord::new([25, 25, 25, 25], Sign::Plus, 0, cfg).unwrap()];
        let spec = BootstrapSpec::new(10, 1, 0.0, 0.0).unwrap();
        let out = bootstrap_reconstruction(&records, &point(0.2, 1.0, 1.0), &fit(1.0, 1.0), &spec);
        assert!(matches!(out, Err(BootstrapError::Records(_))));
    }

    #[test]
    fn bootstrap_is_deterministic_in_the_seed() {
        let theta = 0.2;
        let cfg = ApparatusConfig::new(theta, 0.853, 0.9997, 0.0, 10_000).unwrap();
        let state = crate::qubit::prepare_linear_polarization(0.37);
        let records: Vec<CountRecord> = Sign::BOTH
            .into_iter()
            .enumerate()
            .map(|(i, sign)| crate::measurement::simulate_counts(&state, &cfg, sign, 40 + i as u64))
            .collect();
        let spec = BootstrapSpec::new(100, 5, 0.01, 0.0001).unwrap();
        let calib = point(theta, 0.853, 0.9997);
        let f = fit(0.853, 0.9997);
        let a = bootstrap_reconstruction(&records, &calib, &f, &spec).unwrap();
        let b = bootstrap_reconstruction(&records, &calib, &f, &spec).unwrap();
        assert_eq!(a, b);
    }
}
