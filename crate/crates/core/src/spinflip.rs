//! Spin-flip error model: the forward map from intrinsic to observed joint
//! probabilities, its exact inversion, and the two partial compensations.
//!
//! A measurement with resolution `epsilon` flips the recorded `s2` with
//! probability `(1 - epsilon)/2`; a back-action `eta` flips the recorded
//! `s3` with probability `eta/2`. Both maps are affine and normalization
//! preserving, so the inversion is exact whenever `epsilon > 0` and
//! `eta < 1` - at the price of possibly negative reconstructed cells,
//! which are precisely the object of interest here.

use crate::dist::{outcome_index, DistributionError, JointDistribution, Sign, OUTCOMES};
use crate::measurement::ApparatusConfig;
use crate::qubit::{expectation, QubitState, SpinObservable};
use thiserror::Error;

/// Inversions are refused when `epsilon` or `1 - eta` falls at or below
/// this value; the Eq-coefficients then exceed ~1e6 and noise dominates.
pub const SINGULAR_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErrorParamsError {
    #[error("resolution epsilon = {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),
    #[error("back-action eta = {0} outside [0, 1]")]
    EtaOutOfRange(f64),
}

/// Resolution and back-action of the spin-flip model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorParams {
    epsilon: f64,
    eta: f64,
}

impl ErrorParams {
    pub fn new(epsilon: f64, eta: f64) -> Result<Self, ErrorParamsError> {
        if !epsilon.is_finite() || !(0.0..=1.0).contains(&epsilon) {
            return Err(ErrorParamsError::EpsilonOutOfRange(epsilon));
        }
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(ErrorParamsError::EtaOutOfRange(eta));
        }
        Ok(Self { epsilon, eta })
    }

    /// Model error rates of an apparatus setting:
    /// `epsilon = v_pm sin(4 theta)`, `eta = 1 - v_hv cos(4 theta)`.
    pub fn from_apparatus(config: &ApparatusConfig) -> Self {
        Self {
            epsilon: config.epsilon().clamp(0.0, 1.0),
            eta: config.eta().clamp(0.0, 1.0),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// True when the forward map can be inverted with bounded coefficients.
    pub fn is_invertible(&self) -> bool {
        self.epsilon > SINGULAR_TOL && 1.0 - self.eta > SINGULAR_TOL
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructionError {
    #[error("spin-flip map is singular: epsilon = {epsilon}, eta = {eta}")]
    Singular { epsilon: f64, eta: f64 },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// Applies the spin-flip error model to an intrinsic distribution:
/// each outcome receives weight `(1 +/- epsilon)/2` for the recorded `s2`
/// and `1 - eta/2` or `eta/2` for the recorded `s3`.
pub fn forward_spin_flip_map(p_psi: &JointDistribution, err: &ErrorParams) -> JointDistribution {
    let keep_s2 = (1.0 + err.epsilon()) / 2.0;
    let flip_s2 = (1.0 - err.epsilon()) / 2.0;
    let keep_s3 = 1.0 - err.eta() / 2.0;
    let flip_s3 = err.eta() / 2.0;

    let mut cells = [0.0f64; 4];
    for &(s2, s3) in OUTCOMES.iter() {
        cells[outcome_index(s2, s3)] = keep_s2 * keep_s3 * p_psi.get(s2, s3)
            + flip_s2 * keep_s3 * p_psi.get(s2.flip(), s3)
            + keep_s2 * flip_s3 * p_psi.get(s2, s3.flip())
            + flip_s2 * flip_s3 * p_psi.get(s2.flip(), s3.flip());
    }
    JointDistribution::classify(cells).expect("affine map preserves normalization")
}

/// Exact inversion of the spin-flip map, recovering the intrinsic joint
/// quasi-probability from observed statistics. Requires
/// `epsilon > SINGULAR_TOL` and `1 - eta > SINGULAR_TOL`.
pub fn invert_spin_flip_map(
    p_exp: &JointDistribution,
    err: &ErrorParams,
) -> Result<JointDistribution, ReconstructionError> {
    if !err.is_invertible() {
        return Err(ReconstructionError::Singular {
            epsilon: err.epsilon(),
            eta: err.eta(),
        });
    }
    let eps = err.epsilon();
    let eta = err.eta();
    let denom = 4.0 * eps * (1.0 - eta);
    let same_same = (1.0 + eps) * (2.0 - eta) / denom;
    let flip_same = -(1.0 - eps) * (2.0 - eta) / denom;
    let same_flip = -(1.0 + eps) * eta / denom;
    let flip_flip = (1.0 - eps) * eta / denom;

    let mut cells = [0.0f64; 4];
    for &(s2, s3) in OUTCOMES.iter() {
        cells[outcome_index(s2, s3)] = same_same * p_exp.get(s2, s3)
            + flip_same * p_exp.get(s2.flip(), s3)
            + same_flip * p_exp.get(s2, s3.flip())
            + flip_flip * p_exp.get(s2.flip(), s3.flip());
    }
    Ok(JointDistribution::quasi(cells)?)
}

/// Compensates only the finite resolution (inversion with the given
/// `epsilon` and `eta = 0`). The result still carries the back-action
/// errors of the measurement.
pub fn partial_invert_resolution_only(
    p_exp: &JointDistribution,
    epsilon: f64,
) -> Result<JointDistribution, ReconstructionError> {
    let err = ErrorParams::new(epsilon.clamp(0.0, 1.0), 0.0)
        .expect("clamped parameters are in range");
    if epsilon <= SINGULAR_TOL {
        return Err(ReconstructionError::Singular {
            epsilon,
            eta: 0.0,
        });
    }
    invert_spin_flip_map(p_exp, &err)
}

/// Compensates only the back-action (inversion with the given `eta` and
/// `epsilon = 1`). The result still carries the resolution errors.
pub fn partial_invert_backaction_only(
    p_exp: &JointDistribution,
    eta: f64,
) -> Result<JointDistribution, ReconstructionError> {
    let err =
        ErrorParams::new(1.0, eta.clamp(0.0, 1.0)).expect("clamped parameters are in range");
    if 1.0 - eta <= SINGULAR_TOL {
        return Err(ReconstructionError::Singular { epsilon: 1.0, eta });
    }
    invert_spin_flip_map(p_exp, &err)
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("correlation {name} = {value} outside [-1, 1]")]
pub struct CorrelationError {
    name: &'static str,
    value: f64,
}

/// Intrinsic spin correlations `K12 = <s1 s2>`, `K13 = <s1 s3>`,
/// `K23 = <s2 s3>` under the `s1 = +1` preparation convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTriple {
    k12: f64,
    k13: f64,
    k23: f64,
}

impl CorrelationTriple {
    pub fn new(k12: f64, k13: f64, k23: f64) -> Result<Self, CorrelationError> {
        for (name, value) in [("k12", k12), ("k13", k13), ("k23", k23)] {
            if !value.is_finite() || value.abs() > 1.0 {
                return Err(CorrelationError { name, value });
            }
        }
        Ok(Self { k12, k13, k23 })
    }

    pub fn k12(&self) -> f64 {
        self.k12
    }

    pub fn k13(&self) -> f64 {
        self.k13
    }

    pub fn k23(&self) -> f64 {
        self.k23
    }
}

/// Spin correlations of a state prepared as the `s1 = +1` eigenstate of its
/// own polarization direction: `K12 = <S_PM>`, `K13 = <S_HV>`, and
/// `K23 = 0` because the two measured spin components anti-commute.
pub fn correlations_from_state(state: &QubitState) -> CorrelationTriple {
    let k12 = expectation(state, &SpinObservable::pm()).clamp(-1.0, 1.0);
    let k13 = expectation(state, &SpinObservable::hv()).clamp(-1.0, 1.0);
    CorrelationTriple {
        k12,
        k13,
        k23: 0.0,
    }
}

/// Joint quasi-probability assigned to the spin correlations:
/// `P(s2, s3) = (1 + s2 K12 + s3 K13 + s2 s3 K23) / 4`.
pub fn theoretical_intrinsic(k: &CorrelationTriple) -> JointDistribution {
    let mut cells = [0.0f64; 4];
    for &(s2, s3) in OUTCOMES.iter() {
        cells[outcome_index(s2, s3)] = 0.25
            * (1.0 + s2.value() * k.k12() + s3.value() * k.k13()
                + s2.value() * s3.value() * k.k23());
    }
    JointDistribution::classify(cells).expect("correlation cells are normalized and bounded")
}

/// Back-action level at which the resolution-only reconstruction of the
/// `(-1, +1)` cell crosses zero, if the intrinsic cell is negative.
pub fn eta_zero_crossing(p_psi: &JointDistribution) -> Option<f64> {
    let a = p_psi.get(Sign::Minus, Sign::Plus);
    let b = p_psi.get(Sign::Minus, Sign::Minus);
    if a >= 0.0 {
        return None;
    }
    let eta = 2.0 * a / (a - b);
    (0.0..=1.0).contains(&eta).then_some(eta)
}

/// Resolution level at which the back-action-only reconstruction of the
/// `(-1, +1)` cell crosses zero, if the intrinsic cell is negative.
pub fn epsilon_zero_crossing(p_psi: &JointDistribution) -> Option<f64> {
    let a = p_psi.get(Sign::Minus, Sign::Plus);
    let c = p_psi.get(Sign::Plus, Sign::Plus);
    if a >= 0.0 {
        return None;
    }
    let eps = (a + c) / (c - a);
    (0.0..=1.0).contains(&eps).then_some(eps)
}
