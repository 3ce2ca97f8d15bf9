//! Dataset writers. One CSV per figure-style dataset plus two JSON
//! documents; every float is serialized with nine significant digits and
//! angles are in degrees.

use crate::runner::ThetaResult;
use lgsim_core::calibration::{CalibrationPoint, VisibilityFit};
use lgsim_core::dist::outcome_index;
use lgsim_core::lgi::LgiReport;
use lgsim_core::Sign;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("cannot write {path}: {source}")]
pub struct WriteError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

/// Nine significant digits, scientific notation; used for every CSV float.
fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Rounds to nine significant digits for JSON serialization.
fn sig9(x: f64) -> f64 {
    fmt9(x).parse().expect("formatted float parses back")
}

fn write_file(path: &Path, contents: &str) -> Result<(), WriteError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| WriteError {
            path: path.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| WriteError {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_calibration_csv(dir: &Path, points: &[CalibrationPoint]) -> Result<PathBuf, WriteError> {
    let mut out = String::from("theta_deg,epsilon_hat,epsilon_se,eta_hat,eta_se\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt9(p.theta.to_degrees()),
            fmt9(p.epsilon.value),
            fmt9(p.epsilon.std_err),
            fmt9(p.eta.value),
            fmt9(p.eta.std_err),
        ));
    }
    let path = dir.join("calibration.csv");
    write_file(&path, &out)?;
    Ok(path)
}

#[derive(Serialize)]
struct FitDocument {
    v_pm: f64,
    v_pm_sigma: f64,
    v_hv: f64,
    v_hv_sigma: f64,
    residual_rms: f64,
}

pub fn write_visibility_fit_json(dir: &Path, fit: &VisibilityFit) -> Result<PathBuf, WriteError> {
    let doc = FitDocument {
        v_pm: sig9(fit.v_pm.value),
        v_pm_sigma: sig9(fit.v_pm.std_err),
        v_hv: sig9(fit.v_hv.value),
        v_hv_sigma: sig9(fit.v_hv.std_err),
        residual_rms: sig9(fit.residual_rms),
    };
    let path = dir.join("visibility_fit.json");
    let text = serde_json::to_string_pretty(&doc).expect("fit document serializes");
    write_file(&path, &format!("{text}\n"))?;
    Ok(path)
}

/// Reads a previously written visibility fit.
pub fn read_visibility_fit_json(dir: &Path) -> std::io::Result<VisibilityFit> {
    let path = dir.join("visibility_fit.json");
    let text = fs::read_to_string(&path)?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    let field = |name: &str| -> std::io::Result<f64> {
        doc.get(name)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("missing field {name} in {}", path.display()),
                )
            })
    };
    Ok(VisibilityFit {
        v_pm: lgsim_core::Estimate::new(field("v_pm")?, field("v_pm_sigma")?),
        v_hv: lgsim_core::Estimate::new(field("v_hv")?, field("v_hv_sigma")?),
        residual_rms: field("residual_rms")?,
    })
}

const CELL_HEADER: &str = "pp,pp_se,mp,mp_se,pm,pm_se,mm,mm_se";
const CELL_ORDER: [(Sign, Sign); 4] = [
    (Sign::Plus, Sign::Plus),
    (Sign::Minus, Sign::Plus),
    (Sign::Plus, Sign::Minus),
    (Sign::Minus, Sign::Minus),
];

fn cell_row(theta_deg: f64, cells: &[f64; 4], se: &[f64; 4]) -> String {
    let mut row = fmt9(theta_deg);
    for &(s2, s3) in CELL_ORDER.iter() {
        let i = outcome_index(s2, s3);
        row.push(',');
        row.push_str(&fmt9(cells[i]));
        row.push(',');
        row.push_str(&fmt9(se[i]));
    }
    row.push('\n');
    row
}

/// Observed joint probabilities per angle.
pub fn write_pexp_csv(dir: &Path, results: &[ThetaResult]) -> Result<PathBuf, WriteError> {
    let mut out = format!("theta_deg,{CELL_HEADER}\n");
    for r in results {
        out.push_str(&cell_row(r.theta_deg, r.pexp.cells(), &r.pexp_se));
    }
    let path = dir.join("pexp.csv");
    write_file(&path, &out)?;
    Ok(path)
}

/// Reconstructed intrinsic quasi-probabilities per angle. Angles whose
/// reconstruction failed are omitted (they are flagged in the report).
pub fn write_ppsi_csv(dir: &Path, results: &[ThetaResult]) -> Result<PathBuf, WriteError> {
    let mut out = format!("theta_deg,{CELL_HEADER}\n");
    for r in results {
        if let Some(recon) = &r.recon {
            out.push_str(&cell_row(r.theta_deg, recon.mean.cells(), &recon.stderr));
        }
    }
    let path = dir.join("ppsi.csv");
    write_file(&path, &out)?;
    Ok(path)
}

/// The `(-1, +1)` cell under no, full, and the two partial compensations.
pub fn write_partial_csv(dir: &Path, results: &[ThetaResult]) -> Result<PathBuf, WriteError> {
    let mut out = String::from("theta_deg,pexp_mp,ppsi_mp,peps_mp,peta_mp\n");
    for r in results {
        if let Some(partial) = &r.partial {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt9(r.theta_deg),
                fmt9(partial.pexp_mp),
                fmt9(partial.ppsi_mp),
                fmt9(partial.peps_mp),
                fmt9(partial.peta_mp),
            ));
        }
    }
    let path = dir.join("partial.csv");
    write_file(&path, &out)?;
    Ok(path)
}

/// Model error parameters and their distance from the visibility
/// characteristic, per angle.
pub fn write_characteristic_csv(dir: &Path, results: &[ThetaResult]) -> Result<PathBuf, WriteError> {
    let mut out = String::from("theta_deg,epsilon,one_minus_eta,residual\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt9(r.theta_deg),
            fmt9(r.epsilon),
            fmt9(1.0 - r.eta),
            fmt9(r.residual),
        ));
    }
    let path = dir.join("characteristic.csv");
    write_file(&path, &out)?;
    Ok(path)
}

#[derive(Serialize)]
struct LgiPointDocument {
    theta_deg: f64,
    reconstruction_failed: bool,
    bootstrap_dropped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<LgiReportDocument>,
}

#[derive(Serialize)]
struct LgiReportDocument {
    lhs: f64,
    rhs: f64,
    margin: f64,
    violated: bool,
    negative_cell: Option<NegativeCellDocument>,
    source: String,
}

#[derive(Serialize)]
struct NegativeCellDocument {
    s2: i8,
    s3: i8,
    value: f64,
}

#[derive(Serialize)]
struct LgiSummaryDocument {
    min_margin: Option<f64>,
    theta_deg_at_min: Option<f64>,
    violations: usize,
    total_bootstrap_dropped: usize,
    failed_points: usize,
}

#[derive(Serialize)]
struct LgiFileDocument {
    error_method: &'static str,
    points: Vec<LgiPointDocument>,
    summary: LgiSummaryDocument,
}

fn report_document(report: &LgiReport) -> LgiReportDocument {
    LgiReportDocument {
        lhs: sig9(report.lhs),
        rhs: sig9(report.rhs),
        margin: sig9(report.margin),
        violated: report.violated,
        negative_cell: report.negative_cell.map(|c| NegativeCellDocument {
            s2: c.s2.value() as i8,
            s3: c.s3.value() as i8,
            value: sig9(c.value),
        }),
        source: format!("{:?}", report.source),
    }
}

pub fn write_lgi_report_json(dir: &Path, results: &[ThetaResult]) -> Result<PathBuf, WriteError> {
    let points: Vec<LgiPointDocument> = results
        .iter()
        .map(|r| LgiPointDocument {
            theta_deg: sig9(r.theta_deg),
            reconstruction_failed: r.recon.is_none(),
            bootstrap_dropped: r.dropped_replicates(),
            report: r.lgi.as_ref().map(report_document),
        })
        .collect();

    let min = results
        .iter()
        .filter_map(|r| r.lgi.map(|l| (r.theta_deg, l.margin)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let summary = LgiSummaryDocument {
        min_margin: min.map(|(_, m)| sig9(m)),
        theta_deg_at_min: min.map(|(t, _)| sig9(t)),
        violations: results
            .iter()
            .filter(|r| r.lgi.is_some_and(|l| l.violated))
            .count(),
        total_bootstrap_dropped: results.iter().map(|r| r.dropped_replicates()).sum(),
        failed_points: results.iter().filter(|r| r.recon.is_none()).count(),
    };

    let doc = LgiFileDocument {
        error_method: "bootstrap resampling with Gaussian calibration perturbation",
        points,
        summary,
    };
    let path = dir.join("lgi_report.json");
    let text = serde_json::to_string_pretty(&doc).expect("report document serializes");
    write_file(&path, &format!("{text}\n"))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(0.42677669529663687), "4.26776695e-1");
        assert_eq!(fmt9(-0.10355339059327379), "-1.03553391e-1");
        assert_eq!(fmt9(2.0), "2.00000000e0");
        assert_eq!(sig9(0.42677669529663687), 0.426776695);
    }
}
