//! Command-line front end for the singlet-projection DOP meter model.
//!
//! Exit codes: 0 success, 2 configuration error, 3 physics-domain error
//! (no phase match, scan band exceeded, degenerate fit).

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use singlet_dop::analysis::FitModel;

use config::{resolve, CommonOverrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Physics(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Physics(m) | CliError::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "singlet-dop",
    version,
    about = "Simulator and analysis toolkit for a two-crystal singlet-projection DOP meter"
)]
struct Cli {
    #[command(flatten)]
    common: CommonOverrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phase-matching angles of both SFG assignments versus lambda2
    PmCurve(RangeArgs),
    /// Perturbing-process weight alpha(lambda2) with the crystal tuned to the
    /// desired process
    AlphaCurve(RangeArgs),
    /// Photon-count sweep over the (theta, phi) grid with per-phi statistics
    Sweep(SweepArgs),
    /// Std-over-theta curves for the four standard instrument imperfections
    Sensitivity,
    /// Fit a count-rate model to sweep data and report the visibility
    Fit(FitArgs),
    /// Lambda1/Lambda2 limits and regime classification for a wavelength
    /// separation
    Regimes(RegimesArgs),
}

#[derive(Args)]
struct RangeArgs {
    /// Start of the lambda2 scan in nm
    #[arg(long, value_name = "NM")]
    lambda2_start_nm: Option<f64>,
    /// End of the lambda2 scan in nm
    #[arg(long, value_name = "NM")]
    lambda2_stop_nm: Option<f64>,
    /// Scan step in nm
    #[arg(long, value_name = "NM")]
    lambda2_step_nm: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Integration time per grid cell in seconds
    #[arg(long, value_name = "S")]
    integration_s: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV file with a phi_deg column (e.g. sweep output)
    input: PathBuf,
    /// Fit model
    #[arg(long, default_value = "sin2")]
    model: String,
    /// Column holding the values to fit
    #[arg(long, default_value = "mean_counts")]
    y_column: String,
}

#[derive(Args)]
struct RegimesArgs {
    /// Wavelength separation to classify, in nm (defaults to lambda2 - lambda1)
    #[arg(long, value_name = "NM")]
    queried_dl_nm: Option<f64>,
    /// SNR threshold defining Lambda2
    #[arg(long, value_name = "X")]
    snr_threshold: Option<f64>,
}

fn apply_range_args(cfg: &mut RunConfig, args: &RangeArgs) {
    if let Some(v) = args.lambda2_start_nm {
        cfg.lambda2_range_nm.start = v;
    }
    if let Some(v) = args.lambda2_stop_nm {
        cfg.lambda2_range_nm.stop = v;
    }
    if let Some(v) = args.lambda2_step_nm {
        cfg.lambda2_range_nm.step = v;
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let registry = RunConfig::registry()?;
    let mut cfg = resolve(&cli.common)?;
    let format = cli.common.format;
    match &cli.command {
        Command::PmCurve(args) => {
            apply_range_args(&mut cfg, args);
            let material = cfg.validate(&registry)?;
            validate_range_in_window(&cfg, material)?;
            commands::cmd_pm_curve(&cfg, material, format)
        }
        Command::AlphaCurve(args) => {
            apply_range_args(&mut cfg, args);
            let material = cfg.validate(&registry)?;
            validate_range_in_window(&cfg, material)?;
            commands::cmd_alpha_curve(&cfg, material, format)
        }
        Command::Sweep(args) => {
            if let Some(v) = args.integration_s {
                cfg.integration_s = v;
            }
            let material = cfg.validate(&registry)?;
            commands::cmd_sweep(&cfg, material, format)
        }
        Command::Sensitivity => {
            let material = cfg.validate(&registry)?;
            commands::cmd_sensitivity(&cfg, material, format)
        }
        Command::Fit(args) => {
            let model = FitModel::from_id(&args.model)
                .map_err(|e| CliError::Config(e.to_string()))?;
            commands::cmd_fit(&args.input, model, &args.y_column, format)
        }
        Command::Regimes(args) => {
            if let Some(v) = args.queried_dl_nm {
                cfg.queried_dl_nm = Some(v);
            }
            if let Some(v) = args.snr_threshold {
                cfg.snr_threshold = v;
            }
            let material = cfg.validate(&registry)?;
            commands::cmd_regimes(&cfg, material, format)
        }
    }
}

/// The lambda2 scan endpoints (and the sum-frequency wavelengths they imply)
/// must stay inside the material validity window.
fn validate_range_in_window(
    cfg: &RunConfig,
    material: &singlet_dop::dispersion::Material<f64>,
) -> Result<(), CliError> {
    let (lo, hi) = material.validity_um;
    let range = cfg.lambda2_range_nm;
    for nm in [range.start, range.stop] {
        let um = nm * 1e-3;
        let lam3_um = cfg.lambda1_nm * nm / (cfg.lambda1_nm + nm) * 1e-3;
        if !(um >= lo && um <= hi) || !(lam3_um >= lo && lam3_um <= hi) {
            return Err(CliError::Config(format!(
                "lambda2 scan endpoint {nm} nm (or its sum frequency) is outside the validity window [{lo}, {hi}] um of {}",
                material.name
            )));
        }
        if nm < cfg.lambda1_nm {
            return Err(CliError::Config(format!(
                "lambda2 scan endpoint {nm} nm is below lambda1",
            )));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            if let Some(path) = &cli.common.out {
                if let Err(e) = std::fs::write(path, output) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(output.as_bytes()).is_err() {
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
