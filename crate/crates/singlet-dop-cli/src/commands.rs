//! The six subcommands: curve and report generation on top of the library.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use singlet_dop::analysis::{
    self, fit_shifted, fit_sin2, visibility, FitModel, FitResult, Perturbation,
};
use singlet_dop::dispersion::Material;
use singlet_dop::phasematch::{self, PhaseMatchError};
use singlet_dop::polarization::LinearPolPair;
use singlet_dop::projection::{sweep, SourceConfig};

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

fn physics(e: impl std::fmt::Display) -> CliError {
    CliError::Physics(e.to_string())
}

/// Derived or overridden perturbing-process weight for the configured source.
fn resolve_alpha(cfg: &RunConfig, material: &Material<f64>) -> Result<f64, CliError> {
    match cfg.alpha_override {
        Some(a) => Ok(a),
        None => phasematch::alpha(material, cfg.lambda1_m(), cfg.lambda2_m(), cfg.length_m())
            .map_err(physics),
    }
}

fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "NaN".into()
    }
}

fn csv_opt(x: Option<f64>) -> String {
    csv_num(x.unwrap_or(f64::NAN))
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

// ---------------------------------------------------------------------------
// pm-curve

#[derive(Serialize)]
struct PmCurveJson {
    lambda1_nm: f64,
    length_mm: f64,
    points: Vec<PmPointJson>,
}

#[derive(Serialize)]
struct PmPointJson {
    lambda2_nm: f64,
    theta_a_deg: Option<f64>,
    theta_b_deg: Option<f64>,
    separation_deg: Option<f64>,
    fwhm_deg: Option<f64>,
}

pub fn cmd_pm_curve(
    cfg: &RunConfig,
    material: &Material<f64>,
    format: OutputFormat,
) -> Result<String, CliError> {
    let grid_nm = cfg.lambda2_grid_nm();
    let grid_m: Vec<f64> = grid_nm.iter().map(|nm| nm * 1e-9).collect();
    let curve =
        phasematch::pm_curve(material, cfg.lambda1_m(), &grid_m, cfg.length_m()).map_err(physics)?;
    let points: Vec<PmPointJson> = grid_nm
        .iter()
        .zip(&curve.points)
        .map(|(&nm, p)| PmPointJson {
            lambda2_nm: nm,
            theta_a_deg: p.theta_a.map(f64::to_degrees),
            theta_b_deg: p.theta_b.map(f64::to_degrees),
            separation_deg: p.separation().map(f64::to_degrees),
            fwhm_deg: p.fwhm.map(f64::to_degrees),
        })
        .collect();
    match format {
        OutputFormat::Json => to_json(&PmCurveJson {
            lambda1_nm: cfg.lambda1_nm,
            length_mm: cfg.length_mm,
            points,
        }),
        OutputFormat::Csv => {
            let mut out = String::from("lambda2_nm,theta_A_deg,theta_B_deg,separation_deg,fwhm_deg\n");
            for p in &points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    csv_num(p.lambda2_nm),
                    csv_opt(p.theta_a_deg),
                    csv_opt(p.theta_b_deg),
                    csv_opt(p.separation_deg),
                    csv_opt(p.fwhm_deg),
                );
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// alpha-curve

#[derive(Serialize)]
struct AlphaCurveJson {
    lambda1_nm: f64,
    length_mm: f64,
    points: Vec<AlphaPointJson>,
}

#[derive(Serialize)]
struct AlphaPointJson {
    lambda2_nm: f64,
    alpha: f64,
    alpha_sq: f64,
}

pub fn cmd_alpha_curve(
    cfg: &RunConfig,
    material: &Material<f64>,
    format: OutputFormat,
) -> Result<String, CliError> {
    let mut points = Vec::new();
    for lambda2_nm in cfg.lambda2_grid_nm() {
        let a = match phasematch::alpha(material, cfg.lambda1_m(), lambda2_nm * 1e-9, cfg.length_m())
        {
            Ok(a) => a,
            Err(PhaseMatchError::NoPhaseMatch { .. }) => f64::NAN,
            Err(e) => return Err(physics(e)),
        };
        points.push(AlphaPointJson {
            lambda2_nm,
            alpha: a,
            alpha_sq: a * a,
        });
    }
    match format {
        OutputFormat::Json => to_json(&AlphaCurveJson {
            lambda1_nm: cfg.lambda1_nm,
            length_mm: cfg.length_mm,
            points,
        }),
        OutputFormat::Csv => {
            let mut out = String::from("lambda2_nm,alpha,alpha_sq\n");
            for p in &points {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    csv_num(p.lambda2_nm),
                    csv_num(p.alpha),
                    csv_num(p.alpha_sq)
                );
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Serialize)]
struct SweepJson {
    lambda1_nm: f64,
    lambda2_nm: f64,
    alpha: f64,
    integration_s: f64,
    seed: u64,
    theta_deg: Vec<f64>,
    phi_deg: Vec<f64>,
    intensity: Vec<Vec<f64>>,
    counts: Vec<Vec<u64>>,
    mean_intensity: Vec<f64>,
    std_intensity: Vec<f64>,
    mean_counts: Vec<f64>,
    std_counts: Vec<f64>,
}

pub fn cmd_sweep(
    cfg: &RunConfig,
    material: &Material<f64>,
    format: OutputFormat,
) -> Result<String, CliError> {
    let alpha = resolve_alpha(cfg, material)?;
    let template = SourceConfig::new(
        cfg.lambda1_m(),
        cfg.lambda2_m(),
        LinearPolPair::new(0.0, 0.0, cfg.e1, cfg.e2).map_err(|e| CliError::Config(e.to_string()))?,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let result = sweep(
        &template,
        &cfg.instrument(alpha),
        &cfg.theta_grid(),
        &cfg.phi_grid(),
        cfg.integration_s,
        cfg.seed,
    )
    .map_err(physics)?;

    match format {
        OutputFormat::Json => to_json(&SweepJson {
            lambda1_nm: cfg.lambda1_nm,
            lambda2_nm: cfg.lambda2_nm,
            alpha,
            integration_s: result.integration_time,
            seed: result.seed,
            theta_deg: result.theta.iter().map(|t| t.to_degrees()).collect(),
            phi_deg: result.phi.iter().map(|p| p.to_degrees()).collect(),
            intensity: result.intensity.clone(),
            counts: result.counts.clone(),
            mean_intensity: result.mean_intensity.clone(),
            std_intensity: result.std_intensity.clone(),
            mean_counts: result.mean_counts.clone(),
            std_counts: result.std_counts.clone(),
        }),
        OutputFormat::Csv => {
            let mut out = String::from(
                "phi_deg,theta_deg,intensity,counts,mean_intensity,std_intensity,mean_counts,std_counts\n",
            );
            for (i_phi, &phi) in result.phi.iter().enumerate() {
                for (i_theta, &theta) in result.theta.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        csv_num(phi.to_degrees()),
                        csv_num(theta.to_degrees()),
                        csv_num(result.intensity[i_phi][i_theta]),
                        result.counts[i_phi][i_theta],
                        csv_num(result.mean_intensity[i_phi]),
                        csv_num(result.std_intensity[i_phi]),
                        csv_num(result.mean_counts[i_phi]),
                        csv_num(result.std_counts[i_phi]),
                    );
                }
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// sensitivity

#[derive(Serialize)]
struct SensitivityJson {
    alpha: f64,
    phi_deg: Vec<f64>,
    crystal2_rot: Vec<f64>,
    waveplate_axis: Vec<f64>,
    polarizer: Vec<f64>,
    visibility: Vec<f64>,
}

pub fn cmd_sensitivity(
    cfg: &RunConfig,
    material: &Material<f64>,
    format: OutputFormat,
) -> Result<String, CliError> {
    let alpha = resolve_alpha(cfg, material)?;
    let phi = cfg.sensitivity_phi_grid();
    let theta = cfg.theta_grid();
    // each curve applies exactly one imperfection to the aligned instrument
    let base = singlet_dop::projection::InstrumentConfig::ideal();
    let mut curves = Vec::new();
    for p in Perturbation::standard_set() {
        curves.push(
            analysis::theta_stddev_curve(&base, p, &phi, &theta, alpha).map_err(physics)?,
        );
    }
    let phi_deg: Vec<f64> = phi.iter().map(|p| p.to_degrees()).collect();
    match format {
        OutputFormat::Json => to_json(&SensitivityJson {
            alpha,
            phi_deg,
            crystal2_rot: curves[0].clone(),
            waveplate_axis: curves[1].clone(),
            polarizer: curves[2].clone(),
            visibility: curves[3].clone(),
        }),
        OutputFormat::Csv => {
            let mut out = String::from(
                "phi_deg,std_crystal2_rot,std_waveplate_axis,std_polarizer,std_visibility\n",
            );
            for (k, &p) in phi_deg.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    csv_num(p),
                    csv_num(curves[0][k]),
                    csv_num(curves[1][k]),
                    csv_num(curves[2][k]),
                    csv_num(curves[3][k]),
                );
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// fit

#[derive(Serialize)]
struct FitJson {
    model: &'static str,
    n_points: usize,
    params: FitParamsJson,
    stderr: FitParamsJson,
    residual_rms: f64,
    visibility: f64,
}

#[derive(Serialize)]
struct FitParamsJson {
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    d_deg: Option<f64>,
}

/// Read (phi_deg, y) pairs from a CSV file with a header row; consecutive
/// rows repeating the same φ (the per-θ rows of a sweep file) collapse to one.
pub fn read_phi_series(path: &Path, y_column: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let phi_idx = cols
        .iter()
        .position(|&c| c == "phi_deg")
        .ok_or_else(|| CliError::Config(format!("{}: no phi_deg column", path.display())))?;
    let y_idx = cols
        .iter()
        .position(|&c| c == y_column)
        .ok_or_else(|| {
            CliError::Config(format!("{}: no {y_column} column", path.display()))
        })?;
    let mut phi = Vec::new();
    let mut y = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |idx: usize| -> Result<f64, CliError> {
            fields
                .get(idx)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "{}: line {}: cannot parse column {}",
                        path.display(),
                        lineno + 2,
                        idx + 1
                    ))
                })
        };
        let p = parse(phi_idx)?;
        if phi.last() == Some(&p) {
            continue;
        }
        phi.push(p);
        y.push(parse(y_idx)?);
    }
    Ok((phi, y))
}

fn fit_json(fit: &FitResult<f64>, n_points: usize, vis: f64) -> FitJson {
    FitJson {
        model: fit.model.id(),
        n_points,
        params: FitParamsJson {
            a: Some(fit.a),
            b: Some(fit.b),
            c: fit.c,
            d_deg: fit.d.map(f64::to_degrees),
        },
        stderr: FitParamsJson {
            a: finite_or_none(fit.stderr_a),
            b: finite_or_none(fit.stderr_b),
            c: fit.stderr_c.and_then(finite_or_none),
            d_deg: fit.stderr_d.map(f64::to_degrees).and_then(finite_or_none),
        },
        residual_rms: fit.residual_rms,
        visibility: vis,
    }
}

pub fn cmd_fit(
    input: &Path,
    model: FitModel,
    y_column: &str,
    format: OutputFormat,
) -> Result<String, CliError> {
    let (phi_deg, y) = read_phi_series(input, y_column)?;
    let phi: Vec<f64> = phi_deg.iter().map(|p| p.to_radians()).collect();
    let fit = match model {
        FitModel::Sin2 => fit_sin2(&phi, &y),
        FitModel::ShiftedSin2 => fit_shifted(&phi, &y),
    }
    .map_err(physics)?;
    let vis = visibility(&y).map_err(physics)?;
    let report = fit_json(&fit, phi.len(), vis);
    match format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => {
            let mut out = String::from("quantity,value,stderr\n");
            let _ = writeln!(out, "a,{},{}", csv_num(fit.a), csv_opt(report.stderr.a));
            let _ = writeln!(out, "b,{},{}", csv_num(fit.b), csv_opt(report.stderr.b));
            if let Some(c) = fit.c {
                let _ = writeln!(out, "c,{},{}", csv_num(c), csv_opt(report.stderr.c));
            }
            if let Some(d) = fit.d {
                let _ = writeln!(
                    out,
                    "d_deg,{},{}",
                    csv_num(d.to_degrees()),
                    csv_opt(report.stderr.d_deg)
                );
            }
            let _ = writeln!(out, "residual_rms,{},", csv_num(fit.residual_rms));
            let _ = writeln!(out, "visibility,{},", csv_num(vis));
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// regimes

#[derive(Serialize)]
struct RegimesJson {
    material: String,
    lambda1_nm: f64,
    length_mm: f64,
    visibility: f64,
    snr_threshold: f64,
    queried_dl_nm: f64,
    lambda1_limit_nm: f64,
    lambda2_limit_nm: f64,
    classification: String,
}

pub fn cmd_regimes(
    cfg: &RunConfig,
    material: &Material<f64>,
    format: OutputFormat,
) -> Result<String, CliError> {
    let queried_dl_nm = cfg
        .queried_dl_nm
        .unwrap_or(cfg.lambda2_nm - cfg.lambda1_nm);
    if queried_dl_nm < 0.0 {
        return Err(CliError::Config(format!(
            "queried wavelength separation must be >= 0, got {queried_dl_nm} nm"
        )));
    }
    if cfg.snr_threshold != 1.0 {
        // the classifier itself is defined at threshold 1; Lambda2 for other
        // thresholds is available below
        return Err(CliError::Config(
            "regimes is defined for snr_threshold = 1; use the library lambda2_limit for other thresholds"
                .into(),
        ));
    }
    let report = analysis::regimes(
        material,
        cfg.lambda1_m(),
        cfg.length_m(),
        cfg.visibility,
        queried_dl_nm * 1e-9,
    )
    .map_err(physics)?;
    let json = RegimesJson {
        material: material.name.clone(),
        lambda1_nm: cfg.lambda1_nm,
        length_mm: cfg.length_mm,
        visibility: cfg.visibility,
        snr_threshold: cfg.snr_threshold,
        queried_dl_nm,
        lambda1_limit_nm: report.lambda1_limit * 1e9,
        lambda2_limit_nm: report.lambda2_limit * 1e9,
        classification: report.regime.to_string(),
    };
    match format {
        OutputFormat::Json => to_json(&json),
        OutputFormat::Csv => {
            let mut out = String::from(
                "material,lambda1_nm,length_mm,visibility,queried_dl_nm,lambda1_limit_nm,lambda2_limit_nm,classification\n",
            );
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                json.material,
                csv_num(json.lambda1_nm),
                csv_num(json.length_mm),
                csv_num(json.visibility),
                csv_num(json.queried_dl_nm),
                csv_num(json.lambda1_limit_nm),
                csv_num(json.lambda2_limit_nm),
                json.classification,
            );
            Ok(out)
        }
    }
}

fn to_json<S: Serialize>(value: &S) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Io(format!("JSON serialization failed: {e}")))
}
