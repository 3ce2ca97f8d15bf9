//! Binary outcome labels and the four-cell joint distribution over `(s2, s3)`.
//!
//! Distributions come in two flavors: `Proper` (all cells non-negative, the
//! kind produced by counting photons) and `Quasi` (signed cells, the kind
//! produced by error inversion). Both must be normalized.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the normalization of a distribution.
pub const SUM_TOL: f64 = 1e-9;
/// Tolerance below zero still accepted for a proper distribution cell.
pub const PROPER_NEG_TOL: f64 = 1e-12;

/// A binary spin outcome, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    /// Numeric value, `+1.0` or `-1.0`.
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value() as i8)
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match i8::deserialize(deserializer)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!(
                "expected +1 or -1, got {other}"
            ))),
        }
    }
}

/// Joint outcome `(s2, s3)` of the sequential measurement.
pub type Outcome = (Sign, Sign);

/// The four outcomes in canonical order: `(+,+), (-,+), (+,-), (-,-)`.
pub const OUTCOMES: [Outcome; 4] = [
    (Sign::Plus, Sign::Plus),
    (Sign::Minus, Sign::Plus),
    (Sign::Plus, Sign::Minus),
    (Sign::Minus, Sign::Minus),
];

/// Array index of an outcome in the canonical cell order.
pub fn outcome_index(s2: Sign, s3: Sign) -> usize {
    s2.index() + 2 * s3.index()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// All cells non-negative; directly observable frequencies.
    Proper,
    /// Signed cells; reconstructed intrinsic statistics.
    Quasi,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("cells sum to {sum}, expected 1 within {SUM_TOL}")]
    NotNormalized { sum: f64 },
    #[error("proper distribution has negative cell ({s2:?},{s3:?}) = {value}")]
    NegativeCell { s2: Sign, s3: Sign, value: f64 },
    #[error("cell ({s2:?},{s3:?}) = {value} outside [-1, 1]")]
    CellOutOfRange { s2: Sign, s3: Sign, value: f64 },
    #[error("cell ({s2:?},{s3:?}) is not finite")]
    NotFinite { s2: Sign, s3: Sign },
}

/// Normalized distribution over the four joint outcomes `(s2, s3)`.
///
/// Cells are stored in the canonical order `(+,+), (-,+), (+,-), (-,-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    cells: [f64; 4],
    flavor: Flavor,
}

impl JointDistribution {
    /// Builds a proper (non-negative) distribution.
    pub fn proper(cells: [f64; 4]) -> Result<Self, DistributionError> {
        Self::validate_common(&cells)?;
        for (&(s2, s3), &value) in OUTCOMES.iter().zip(cells.iter()) {
            if value < -PROPER_NEG_TOL {
                return Err(DistributionError::NegativeCell { s2, s3, value });
            }
        }
        Ok(Self {
            cells,
            flavor: Flavor::Proper,
        })
    }

    /// Builds a quasi-distribution; cells may be negative but must lie in [-1, 1].
    pub fn quasi(cells: [f64; 4]) -> Result<Self, DistributionError> {
        Self::validate_common(&cells)?;
        for (&(s2, s3), &value) in OUTCOMES.iter().zip(cells.iter()) {
            if value.abs() > 1.0 + PROPER_NEG_TOL {
                return Err(DistributionError::CellOutOfRange { s2, s3, value });
            }
        }
        Ok(Self {
            cells,
            flavor: Flavor::Quasi,
        })
    }

    /// Builds a proper distribution when all cells are non-negative, a
    /// quasi-distribution otherwise.
    pub fn classify(cells: [f64; 4]) -> Result<Self, DistributionError> {
        if cells.iter().all(|&c| c >= -PROPER_NEG_TOL) {
            Self::proper(cells)
        } else {
            Self::quasi(cells)
        }
    }

    fn validate_common(cells: &[f64; 4]) -> Result<(), DistributionError> {
        for (&(s2, s3), &value) in OUTCOMES.iter().zip(cells.iter()) {
            if !value.is_finite() {
                return Err(DistributionError::NotFinite { s2, s3 });
            }
        }
        let sum: f64 = cells.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(DistributionError::NotNormalized { sum });
        }
        Ok(())
    }

    /// Uniform distribution, 1/4 per cell.
    pub fn uniform() -> Self {
        Self {
            cells: [0.25; 4],
            flavor: Flavor::Proper,
        }
    }

    pub fn get(&self, s2: Sign, s3: Sign) -> f64 {
        self.cells[outcome_index(s2, s3)]
    }

    pub fn cells(&self) -> &[f64; 4] {
        &self.cells
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// First marginal moment `<s2>`.
    pub fn mean_s2(&self) -> f64 {
        OUTCOMES
            .iter()
            .zip(self.cells.iter())
            .map(|(&(s2, _), &p)| s2.value() * p)
            .sum()
    }

    /// Second marginal moment `<s3>`.
    pub fn mean_s3(&self) -> f64 {
        OUTCOMES
            .iter()
            .zip(self.cells.iter())
            .map(|(&(_, s3), &p)| s3.value() * p)
            .sum()
    }

    /// Mixed moment `<s2 s3>`.
    pub fn mean_s2s3(&self) -> f64 {
        OUTCOMES
            .iter()
            .zip(self.cells.iter())
            .map(|(&(s2, s3), &p)| s2.value() * s3.value() * p)
            .sum()
    }

    /// Cell with the most negative value, if any cell is negative.
    pub fn most_negative_cell(&self) -> Option<(Outcome, f64)> {
        OUTCOMES
            .iter()
            .zip(self.cells.iter())
            .filter(|(_, &p)| p < 0.0)
            .min_by(|(_, a), (_, b)| a.total_cmp(b))
            .map(|(&o, &p)| (o, p))
    }
}
