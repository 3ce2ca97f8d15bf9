//! Evaluation of the Leggett-Garg inequality `1 + K13 >= K12 + K23`.
//!
//! The inequality is the positivity requirement on the `(-1, +1)` cell of
//! the joint quasi-probability: its margin equals `4 P(-1, +1)`.

use crate::dist::{JointDistribution, Sign};
use crate::spinflip::{theoretical_intrinsic, CorrelationTriple};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LgiSource {
    FromCorrelations,
    FromQuasiDistribution,
}

/// A negative quasi-probability cell and its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativeCell {
    pub s2: Sign,
    pub s3: Sign,
    pub value: f64,
}

/// Outcome of one inequality evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LgiReport {
    /// `1 + K13`.
    pub lhs: f64,
    /// `K12 + K23`.
    pub rhs: f64,
    /// `lhs - rhs`; negative means the inequality is violated.
    pub margin: f64,
    pub violated: bool,
    /// Most negative cell of the associated quasi-distribution, if any.
    pub negative_cell: Option<NegativeCell>,
    pub source: LgiSource,
}

fn negative_cell_of(p: &JointDistribution) -> Option<NegativeCell> {
    p.most_negative_cell()
        .map(|((s2, s3), value)| NegativeCell { s2, s3, value })
}

/// Evaluates the inequality from separately measured spin correlations.
pub fn evaluate_from_correlations(k: &CorrelationTriple) -> LgiReport {
    let lhs = 1.0 + k.k13();
    let rhs = k.k12() + k.k23();
    let margin = lhs - rhs;
    LgiReport {
        lhs,
        rhs,
        margin,
        violated: margin < 0.0,
        negative_cell: negative_cell_of(&theoretical_intrinsic(k)),
        source: LgiSource::FromCorrelations,
    }
}

/// Evaluates the inequality from a joint (quasi-)distribution, reading the
/// correlations off as moments. The margin is reported as `4 P(-1, +1)`,
/// which equals `lhs - rhs` identically for normalized distributions.
pub fn evaluate_from_distribution(p: &JointDistribution) -> LgiReport {
    let k12 = p.mean_s2();
    let k13 = p.mean_s3();
    let k23 = p.mean_s2s3();
    let margin = 4.0 * p.get(Sign::Minus, Sign::Plus);
    LgiReport {
        lhs: 1.0 + k13,
        rhs: k12 + k23,
        margin,
        violated: margin < 0.0,
        negative_cell: negative_cell_of(p),
        source: LgiSource::FromQuasiDistribution,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    #[test]
    fn maximal_violation_from_correlations() {
        let k = CorrelationTriple::new(1.0 / SQRT_2, -1.0 / SQRT_2, 0.0).unwrap();
        let report = evaluate_from_correlations(&k);
        assert_abs_diff_eq!(report.margin, 1.0 - SQRT_2, epsilon = 1e-12);
        assert!(report.violated);
        let cell = report.negative_cell.unwrap();
        assert_eq!((cell.s2, cell.s3), (Sign::Minus, Sign::Plus));
    }

    #[test]
    fn uncorrelated_spins_do_not_violate() {
        let k = CorrelationTriple::new(0.0, 0.0, 0.0).unwrap();
        let report = evaluate_from_correlations(&k);
        assert_abs_diff_eq!(report.margin, 1.0, epsilon = 1e-15);
        assert!(!report.violated);
        assert!(report.negative_cell.is_none());
    }

    #[test]
    fn classical_extreme_sits_on_the_boundary() {
        let k = CorrelationTriple::new(1.0, 0.0, 0.0).unwrap();
        let report = evaluate_from_correlations(&k);
        assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-15);
        assert!(!report.violated);
    }

    #[test]
    fn reconstructed_distribution_reproduces_the_maximal_margin() {
        let p = JointDistribution::quasi([
            0.25,
            -0.10355339059327379,
            0.6035533905932737,
            0.25,
        ])
        .unwrap();
        let report = evaluate_from_distribution(&p);
        assert_abs_diff_eq!(report.margin, 1.0 - SQRT_2, epsilon = 1e-12);
        assert!(report.violated);
        assert_eq!(report.source, LgiSource::FromQuasiDistribution);
        let cell = report.negative_cell.unwrap();
        assert_eq!((cell.s2, cell.s3), (Sign::Minus, Sign::Plus));
        assert_abs_diff_eq!(cell.value, (1.0 - SQRT_2) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn margin_matches_four_times_the_cell_and_the_correlation_form() {
        let p = JointDistribution::quasi([0.31, -0.04, 0.48, 0.25]).unwrap();
        let report = evaluate_from_distribution(&p);
        assert_abs_diff_eq!(report.margin, 4.0 * p.get(Sign::Minus, Sign::Plus), epsilon = 0.0);
        assert_abs_diff_eq!(report.margin, report.lhs - report.rhs, epsilon = 1e-12);
    }

    #[test]
    fn proper_distributions_never_violate() {
        let uniform = JointDistribution::uniform();
        let report = evaluate_from_distribution(&uniform);
        assert_abs_diff_eq!(report.margin, 1.0, epsilon = 1e-15);
        assert!(!report.violated);
        assert!(report.negative_cell.is_none());

        let skewed = JointDistribution::proper([0.0, 0.1, 0.6, 0.3]).unwrap();
        assert!(!evaluate_from_distribution(&skewed).violated);
        assert!(evaluate_from_distribution(&skewed).margin >= 0.0);
    }
}
