//! Command-line entry point.
//!
//! Exit codes: 0 success, 2 configuration error, 3 singular-reconstruction
//! or degenerate-fit failure, 4 I/O error.

use clap::{Args, Parser, Subcommand};
use lgsim_cli::config::{ConfigError, RunConfig};
use lgsim_cli::runner::{calibration_sweep, main_experiment, RunError};
use lgsim_cli::{acceptance, output};
use lgsim_core::calibration::FitError;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_SINGULAR: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "lgsim",
    about = "Sequential polarization measurement simulator: calibration, \
             quasi-probability reconstruction and Leggett-Garg reports",
    version
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// JSON configuration file; flat document mirroring the run settings.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Base RNG seed for every derived stream.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
    /// Output directory for datasets and reports.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Skip photon sampling; use analytic probabilities (no error bars).
    #[arg(long, global = true)]
    exact: bool,
    /// Input polarization angle from vertical, degrees.
    #[arg(long, global = true, value_name = "DEG")]
    phi_degrees: Option<f64>,
    /// Comma-separated HWP sweep angles, degrees.
    #[arg(long, global = true, value_name = "DEG,DEG,...", value_delimiter = ',')]
    theta_sweep: Option<Vec<f64>>,
    /// PM interference visibility.
    #[arg(long, global = true, value_name = "V")]
    v_pm: Option<f64>,
    /// HV coherence visibility.
    #[arg(long, global = true, value_name = "V")]
    v_hv: Option<f64>,
    /// Detector-efficiency imbalance.
    #[arg(long, global = true, value_name = "D")]
    delta: Option<f64>,
    /// Photons per polarizer setting.
    #[arg(long, global = true, value_name = "N")]
    photons_per_setting: Option<u64>,
    /// Bootstrap replicates per sweep angle.
    #[arg(long, global = true, value_name = "B")]
    bootstrap_replicates: Option<usize>,
    /// One-sigma uncertainty on the fitted v_pm.
    #[arg(long, global = true, value_name = "S")]
    v_pm_sigma: Option<f64>,
    /// One-sigma uncertainty on the fitted v_hv.
    #[arg(long, global = true, value_name = "S")]
    v_hv_sigma: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the reference-input sweep and fit the visibilities.
    Calibrate,
    /// Run the main experiment using an existing visibility fit.
    Run,
    /// Calibrate, then run the main experiment.
    Full,
    /// Run the acceptance checks and print one line per criterion.
    Check,
}

fn build_config(overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &overrides.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = overrides.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.output_dir = out.clone();
    }
    if overrides.exact {
        cfg.exact = true;
    }
    if let Some(phi) = overrides.phi_degrees {
        cfg.phi_degrees = phi;
    }
    if let Some(sweep) = &overrides.theta_sweep {
        cfg.theta_sweep = sweep.clone();
    }
    if let Some(v) = overrides.v_pm {
        cfg.v_pm = v;
    }
    if let Some(v) = overrides.v_hv {
        cfg.v_hv = v;
    }
    if let Some(d) = overrides.delta {
        cfg.delta = d;
    }
    if let Some(n) = overrides.photons_per_setting {
        cfg.photons_per_setting = n;
    }
    if let Some(b) = overrides.bootstrap_replicates {
        cfg.bootstrap_replicates = b;
    }
    if let Some(s) = overrides.v_pm_sigma {
        cfg.v_pm_sigma = s;
    }
    if let Some(s) = overrides.v_hv_sigma {
        cfg.v_hv_sigma = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_error_code(err: &RunError) -> u8 {
    match err {
        RunError::Fit(FitError::Degenerate { .. }) => EXIT_SINGULAR,
        RunError::AllPointsSingular => EXIT_SINGULAR,
        // Apparatus and estimation failures mean the configuration asked
        // for something the simulation cannot provide.
        _ => EXIT_CONFIG,
    }
}

fn calibrate(cfg: &RunConfig) -> Result<lgsim_core::VisibilityFit, u8> {
    let (points, fit, warnings) = calibration_sweep(cfg).map_err(|e| {
        eprintln!("error: {e}");
        run_error_code(&e)
    })?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let written = [
        output::write_calibration_csv(&cfg.output_dir, &points).map(|p| p.display().to_string()),
        output::write_visibility_fit_json(&cfg.output_dir, &fit)
            .map(|p| p.display().to_string()),
    ];
    for result in written {
        match result {
            Ok(path) => println!("wrote {path}"),
            Err(e) => {
                eprintln!("error: {e}");
                return Err(EXIT_IO);
            }
        }
    }
    println!(
        "fit: v_pm = {:.6} +/- {:.6}, v_hv = {:.6} +/- {:.6}, residual rms = {:.3e}",
        fit.v_pm.value, fit.v_pm.std_err, fit.v_hv.value, fit.v_hv.std_err, fit.residual_rms
    );
    Ok(fit)
}

fn run_main(cfg: &RunConfig, fit: &lgsim_core::VisibilityFit) -> Result<(), u8> {
    let results = main_experiment(cfg, fit).map_err(|e| {
        eprintln!("error: {e}");
        run_error_code(&e)
    })?;
    let written = [
        output::write_pexp_csv(&cfg.output_dir, &results),
        output::write_ppsi_csv(&cfg.output_dir, &results),
        output::write_partial_csv(&cfg.output_dir, &results),
        output::write_characteristic_csv(&cfg.output_dir, &results),
        output::write_lgi_report_json(&cfg.output_dir, &results),
    ];
    for result in written {
        match result {
            Ok(path) => println!("wrote {}", path.display()),
            Err(e) => {
                eprintln!("error: {e}");
                return Err(EXIT_IO);
            }
        }
    }
    let failed = results.iter().filter(|r| r.recon.is_none()).count();
    if failed > 0 {
        eprintln!("warning: reconstruction failed at {failed} sweep angle(s); see lgi_report.json");
    }
    if let Some(min) = results
        .iter()
        .filter_map(|r| r.lgi.map(|l| (r.theta_deg, l.margin)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
    {
        println!("minimum margin {:.6} at theta = {} deg", min.1, min.0);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if matches!(cli.command, Command::Check) {
        let outcomes = acceptance::run_all();
        let mut all_passed = true;
        for outcome in &outcomes {
            println!("{outcome}");
            all_passed &= outcome.passed;
        }
        return if all_passed {
            println!("all {} criteria passed", outcomes.len());
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        };
    }

    let cfg = match build_config(&cli.overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let status = match cli.command {
        Command::Calibrate => calibrate(&cfg).map(|_| ()),
        Command::Full => calibrate(&cfg).and_then(|fit| run_main(&cfg, &fit)),
        Command::Run => match output::read_visibility_fit_json(&cfg.output_dir) {
            Ok(fit) => run_main(&cfg, &fit),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                eprintln!(
                    "configuration error: no visibility_fit.json in {}; run `calibrate` \
                     first or use `full`",
                    cfg.output_dir.display()
                );
                Err(EXIT_CONFIG)
            }
            Err(e) => {
                eprintln!("error: cannot read visibility fit: {e}");
                Err(EXIT_IO)
            }
        },
        Command::Check => unreachable!("handled above"),
    };

    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
