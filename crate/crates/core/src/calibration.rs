//! Estimation of resolution and back-action from reference inputs, and the
//! visibility fit across a strength sweep.
//!
//! A P-polarized input (`<S_PM> = 1`) turns the `s2` marginal directly into
//! the resolution; an H-polarized input (`<S_HV> = 1`) turns the `s3`
//! marginal into one minus the back-action. Across a sweep the two series
//! are linear in `sin(4 theta)` and `cos(4 theta)` with the visibilities as
//! slopes.

use crate::dist::JointDistribution;
use crate::spinflip::ErrorParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Regressor magnitudes at or below this value cannot carry a slope.
pub const DEGENERATE_TOL: f64 = 1e-9;

/// Weight floor applied when a standard error is zero (exact-mode points).
const SE_FLOOR: f64 = 1e-12;

/// A value with its one-sigma standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn new(value: f64, std_err: f64) -> Self {
        debug_assert!(std_err >= 0.0, "standard error must be non-negative");
        Self { value, std_err }
    }
}

/// Calibration result at one HWP angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    /// HWP angle, radians.
    pub theta: f64,
    pub epsilon: Estimate,
    pub eta: Estimate,
}

/// Visibilities fitted over a calibration sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityFit {
    pub v_pm: Estimate,
    pub v_hv: Estimate,
    pub residual_rms: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("no calibration points given")]
    NoPoints,
    #[error("degenerate fit: all {regressor} regressors below {DEGENERATE_TOL}")]
    Degenerate { regressor: &'static str },
    #[error("fitted visibility {name} = {value} outside the sanity range [0, 1.05]")]
    OutOfRange { name: &'static str, value: f64 },
}

/// Resolution from the measured joint distribution of a P-polarized input:
/// `epsilon = sum s2 P(s2, s3)`, the input expectation being one. The
/// standard error is the quadrature sum of the cell errors. Estimates are
/// not clipped to [0, 1]; statistical fluctuations are propagated as-is.
pub fn estimate_epsilon(p_exp: &JointDistribution, se: &[f64; 4]) -> Estimate {
    Estimate::new(p_exp.mean_s2(), quadrature(se))
}

/// Back-action from the measured joint distribution of an H-polarized
/// input: `eta = 1 - sum s3 P(s2, s3)`.
pub fn estimate_eta(p_exp: &JointDistribution, se: &[f64; 4]) -> Estimate {
    Estimate::new(1.0 - p_exp.mean_s3(), quadrature(se))
}

fn quadrature(se: &[f64; 4]) -> f64 {
    se.iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// Weighted least squares of a zero-intercept line `y = slope * x`,
/// weights `1 / sigma^2`. Returns the slope and its standard error from
/// the normal equations.
fn fit_through_origin(points: &[(f64, f64, f64)]) -> (f64, f64) {
    let mut sum_wxx = 0.0;
    let mut sum_wxy = 0.0;
    for &(x, y, sigma) in points {
        let w = 1.0 / sigma.max(SE_FLOOR).powi(2);
        sum_wxx += w * x * x;
        sum_wxy += w * x * y;
    }
    (sum_wxy / sum_wxx, (1.0 / sum_wxx).sqrt())
}

/// Fits `epsilon_hat = v_pm sin(4 theta)` and
/// `1 - eta_hat = v_hv cos(4 theta)` over the sweep.
pub fn fit_visibilities(points: &[CalibrationPoint]) -> Result<VisibilityFit, FitError> {
    if points.is_empty() {
        return Err(FitError::NoPoints);
    }

    let pm: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| ((4.0 * p.theta).sin(), p.epsilon.value, p.epsilon.std_err))
        .collect();
    let hv: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| ((4.0 * p.theta).cos(), 1.0 - p.eta.value, p.eta.std_err))
        .collect();

    for (series, name) in [(&pm, "sin(4 theta)"), (&hv, "cos(4 theta)")] {
        if series.iter().all(|&(x, _, _)| x.abs() <= DEGENERATE_TOL) {
            return Err(FitError::Degenerate { regressor: name });
        }
    }

    let (v_pm, v_pm_sigma) = fit_through_origin(&pm);
    let (v_hv, v_hv_sigma) = fit_through_origin(&hv);

    for (name, value) in [("v_pm", v_pm), ("v_hv", v_hv)] {
        if !(0.0..=1.05).contains(&value) {
            return Err(FitError::OutOfRange { name, value });
        }
    }

    let mut sum_sq = 0.0;
    for &(x, y, _) in pm.iter() {
        sum_sq += (y - v_pm * x).powi(2);
    }
    for &(x, y, _) in hv.iter() {
        sum_sq += (y - v_hv * x).powi(2);
    }
    let residual_rms = (sum_sq / (2 * points.len()) as f64).sqrt();

    Ok(VisibilityFit {
        v_pm: Estimate::new(v_pm, v_pm_sigma),
        v_hv: Estimate::new(v_hv, v_hv_sigma),
        residual_rms,
    })
}

/// Signed distance from the visibility-limited uncertainty characteristic:
/// `epsilon^2 / v_pm^2 + (1 - eta)^2 / v_hv^2 - 1`. Zero on the model
/// curve; with unit visibilities, values below zero lie inside the ideal
/// uncertainty region.
pub fn characteristic_residual(err: &ErrorParams, v_pm: f64, v_hv: f64) -> f64 {
    assert!(v_pm > 0.0 && v_hv > 0.0, "visibilities must be positive");
    let e = err.epsilon() / v_pm;
    let k = (1.0 - err.eta()) / v_hv;
    e * e + k * k - 1.0
}
