//! Simulation and analysis of a sequential measurement of two
//! non-commuting polarization components of a single photon.
//!
//! The pipeline mirrors the experiment it models: an interferometric
//! PM measurement of variable strength followed by a projective HV
//! measurement ([`measurement`]), calibration of the resulting resolution
//! and back-action from reference inputs ([`calibration`]), reconstruction
//! of the intrinsic joint quasi-probability by inverting the spin-flip
//! error model ([`spinflip`]), bootstrap error propagation
//! ([`uncertainty`]), and evaluation of the Leggett-Garg inequality
//! ([`lgi`]).

pub mod calibration;
pub mod dist;
pub mod lgi;
pub mod measurement;
pub mod qubit;
pub mod spinflip;
pub mod uncertainty;

pub use calibration::{CalibrationPoint, Estimate, VisibilityFit};
pub use dist::{Flavor, JointDistribution, Outcome, Sign, OUTCOMES};
pub use lgi::{LgiReport, LgiSource};
pub use measurement::{ApparatusConfig, CountRecord};
pub use qubit::{ComplexMatrix2, QubitState, SpinObservable};
pub use spinflip::{CorrelationTriple, ErrorParams};
pub use uncertainty::{BootstrapSpec, DistributionEstimate};
