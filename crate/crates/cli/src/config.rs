//! Run configuration: defaults, JSON loading and validation.
//!
//! The configuration file is a flat JSON document; every field can be
//! overridden by a CLI flag of the same name. Angles are degrees here and
//! converted to radians at the boundary to the simulation crate.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Upper edge of the strength sweep in degrees (the projective limit).
pub const THETA_MAX_DEGREES: f64 = 22.5;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("theta_sweep is empty")]
    EmptySweep,
    #[error("theta = {0} degrees outside [0, {THETA_MAX_DEGREES}]")]
    ThetaOutOfRange(f64),
    #[error("phi_degrees = {0} is not finite")]
    BadPhi(f64),
    #[error("visibility {name} = {value} outside [0, 1]")]
    BadVisibility { name: &'static str, value: f64 },
    #[error("delta = {0} outside (-1, 1)")]
    BadDelta(f64),
    #[error("photons_per_setting must be at least 1")]
    NoPhotons,
    #[error("bootstrap_replicates must be at least 2, got {0}")]
    TooFewReplicates(usize),
    #[error("{name} = {value} must be a non-negative finite number")]
    BadSigma { name: &'static str, value: f64 },
}

/// Full description of one batch run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input polarization angle from vertical, degrees.
    pub phi_degrees: f64,
    /// HWP angles to sweep, degrees.
    pub theta_sweep: Vec<f64>,
    pub v_pm: f64,
    pub v_hv: f64,
    /// Detector-efficiency imbalance of the output beam splitter.
    pub delta: f64,
    pub photons_per_setting: u64,
    pub bootstrap_replicates: usize,
    /// One-sigma calibration uncertainty applied to the fitted v_pm.
    pub v_pm_sigma: f64,
    /// One-sigma calibration uncertainty applied to the fitted v_hv.
    pub v_hv_sigma: f64,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Skip photon sampling and use analytic probabilities everywhere.
    pub exact: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            phi_degrees: 22.496,
            theta_sweep: (1..=11).map(|k| 2.0 * k as f64).collect(),
            v_pm: 0.853,
            v_hv: 0.9997,
            delta: 0.0,
            photons_per_setting: 1_000_000,
            bootstrap_replicates: 1000,
            v_pm_sigma: 0.010,
            v_hv_sigma: 0.0001,
            base_seed: 12345,
            output_dir: PathBuf::from("out"),
            exact: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Validates all ranges and puts the sweep into ascending order.
    pub fn validate(&mut self) -> Result<(), ConfigError> {
        if !self.phi_degrees.is_finite() {
            return Err(ConfigError::BadPhi(self.phi_degrees));
        }
        if self.theta_sweep.is_empty() {
            return Err(ConfigError::EmptySweep);
        }
        for &theta in &self.theta_sweep {
            if !theta.is_finite() || !(0.0..=THETA_MAX_DEGREES).contains(&theta) {
                return Err(ConfigError::ThetaOutOfRange(theta));
            }
        }
        for (name, value) in [("v_pm", self.v_pm), ("v_hv", self.v_hv)] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::BadVisibility { name, value });
            }
        }
        if !self.delta.is_finite() || self.delta.abs() >= 1.0 {
            return Err(ConfigError::BadDelta(self.delta));
        }
        if self.photons_per_setting == 0 {
            return Err(ConfigError::NoPhotons);
        }
        if self.bootstrap_replicates < 2 {
            return Err(ConfigError::TooFewReplicates(self.bootstrap_replicates));
        }
        for (name, value) in [
            ("v_pm_sigma", self.v_pm_sigma),
            ("v_hv_sigma", self.v_hv_sigma),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(ConfigError::BadSigma { name, value });
            }
        }
        self.theta_sweep.sort_by(f64::total_cmp);
        Ok(())
    }

    pub fn phi_radians(&self) -> f64 {
        self.phi_degrees.to_radians()
    }
}
