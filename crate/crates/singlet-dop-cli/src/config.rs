//! Run configuration: defaults matching the modeled instrument, optionally
//! overlaid by a JSON config file and then by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use singlet_dop::dispersion::{Material, MaterialRegistry};
use singlet_dop::projection::InstrumentConfig;

use crate::CliError;

/// Environment variable naming a directory of extra material JSON files.
pub const MATERIAL_DIR_ENV: &str = "SINGLET_DOP_MATERIAL_DIR";

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// On-disk configuration; every field optional except the schema version.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema: Option<u32>,
    pub material: Option<String>,
    pub lambda1_nm: Option<f64>,
    pub lambda2_nm: Option<f64>,
    pub lambda2_range_nm: Option<RangeSpec>,
    pub length_mm: Option<f64>,
    pub alpha: Option<f64>,
    pub crystal2_rot_err_deg: Option<f64>,
    pub waveplate_axis_err_deg: Option<f64>,
    pub waveplate_retardance_deg: Option<f64>,
    pub polarizer_angle_deg: Option<f64>,
    pub visibility: Option<f64>,
    pub count_scale: Option<f64>,
    pub dark_rate: Option<f64>,
    pub theta_deg: Option<Vec<f64>>,
    pub phi_deg: Option<Vec<f64>>,
    pub integration_s: Option<f64>,
    pub seed: Option<u64>,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub snr_threshold: Option<f64>,
    pub queried_dl_nm: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Fully resolved run configuration. Wavelengths are kept in nm and the
/// crystal length in mm (the units of the config file and of all emitted
/// columns); angles are radians. SI accessors convert at the physics
/// boundary.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub material: String,
    pub lambda1_nm: f64,
    pub lambda2_nm: f64,
    pub lambda2_range_nm: RangeSpec,
    pub length_mm: f64,
    /// Explicit perturbing-process weight; derived from the wavelengths when
    /// absent.
    pub alpha_override: Option<f64>,
    pub crystal2_rot_err: f64,
    pub waveplate_axis_err: f64,
    pub waveplate_retardance: f64,
    pub polarizer_angle: f64,
    pub visibility: f64,
    pub count_scale: f64,
    pub dark_rate: f64,
    /// θ samples in radians; None means the per-command default grid.
    pub theta: Option<Vec<f64>>,
    /// φ samples in radians; None means the per-command default grid.
    pub phi: Option<Vec<f64>>,
    pub integration_s: f64,
    pub seed: u64,
    pub e1: f64,
    pub e2: f64,
    pub snr_threshold: f64,
    pub queried_dl_nm: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            material: "KTP".into(),
            lambda1_nm: 1542.0,
            lambda2_nm: 1560.0,
            lambda2_range_nm: RangeSpec {
                start: 1542.0,
                stop: 1562.0,
                step: 0.5,
            },
            length_mm: 3.0,
            alpha_override: None,
            crystal2_rot_err: 0.0,
            waveplate_axis_err: 0.0,
            waveplate_retardance: std::f64::consts::PI,
            polarizer_angle: std::f64::consts::FRAC_PI_4,
            visibility: 0.9,
            count_scale: 1e5,
            dark_rate: 10.0,
            theta: None,
            phi: None,
            integration_s: 1.0,
            seed: 1542,
            e1: 1.0,
            e2: 1.0,
            snr_threshold: 1.0,
            queried_dl_nm: None,
        }
    }
}

/// Flag-level overrides shared by all subcommands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonOverrides {
    /// JSON configuration file; flags override file values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Material name in the registry
    #[arg(long, global = true, value_name = "NAME")]
    pub material: Option<String>,
    /// Lower source wavelength in nm
    #[arg(long, global = true, value_name = "NM")]
    pub lambda1_nm: Option<f64>,
    /// Upper source wavelength in nm
    #[arg(long, global = true, value_name = "NM")]
    pub lambda2_nm: Option<f64>,
    /// Crystal length in mm
    #[arg(long, global = true, value_name = "MM")]
    pub length_mm: Option<f64>,
    /// Mutual coherence of the two sum-frequency fields, in [0, 1]
    #[arg(long, global = true, value_name = "V")]
    pub visibility: Option<f64>,
    /// Explicit perturbing-process weight, overriding the derived value
    #[arg(long, global = true, value_name = "A")]
    pub alpha: Option<f64>,
    /// RNG seed for photon-count simulation
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output path (stdout when omitted)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: FileConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
    match cfg.schema {
        Some(CONFIG_SCHEMA_VERSION) => Ok(cfg),
        Some(v) => Err(CliError::Config(format!(
            "unsupported config schema {v}, expected {CONFIG_SCHEMA_VERSION}"
        ))),
        None => Err(CliError::Config(
            "config file must declare \"schema\": 1".into(),
        )),
    }
}

fn deg_vec_to_rad(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(f64::to_radians).collect()
}

/// Defaults, overlaid by the optional file, overlaid by flags.
pub fn resolve(common: &CommonOverrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();

    if let Some(path) = &common.config {
        let file = load_file_config(path)?;
        if let Some(v) = file.material {
            cfg.material = v;
        }
        if let Some(v) = file.lambda1_nm {
            cfg.lambda1_nm = v;
        }
        if let Some(v) = file.lambda2_nm {
            cfg.lambda2_nm = v;
        }
        if let Some(v) = file.lambda2_range_nm {
            cfg.lambda2_range_nm = v;
        }
        if let Some(v) = file.length_mm {
            cfg.length_mm = v;
        }
        if let Some(v) = file.alpha {
            cfg.alpha_override = Some(v);
        }
        if let Some(v) = file.crystal2_rot_err_deg {
            cfg.crystal2_rot_err = v.to_radians();
        }
        if let Some(v) = file.waveplate_axis_err_deg {
            cfg.waveplate_axis_err = v.to_radians();
        }
        if let Some(v) = file.waveplate_retardance_deg {
            cfg.waveplate_retardance = v.to_radians();
        }
        if let Some(v) = file.polarizer_angle_deg {
            cfg.polarizer_angle = v.to_radians();
        }
        if let Some(v) = file.visibility {
            cfg.visibility = v;
        }
        if let Some(v) = file.count_scale {
            cfg.count_scale = v;
        }
        if let Some(v) = file.dark_rate {
            cfg.dark_rate = v;
        }
        if let Some(v) = file.theta_deg {
            cfg.theta = Some(deg_vec_to_rad(v));
        }
        if let Some(v) = file.phi_deg {
            cfg.phi = Some(deg_vec_to_rad(v));
        }
        if let Some(v) = file.integration_s {
            cfg.integration_s = v;
        }
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        if let Some(v) = file.e1 {
            cfg.e1 = v;
        }
        if let Some(v) = file.e2 {
            cfg.e2 = v;
        }
        if let Some(v) = file.snr_threshold {
            cfg.snr_threshold = v;
        }
        if let Some(v) = file.queried_dl_nm {
            cfg.queried_dl_nm = Some(v);
        }
    }

    if let Some(v) = &common.material {
        cfg.material = v.clone();
    }
    if let Some(v) = common.lambda1_nm {
        cfg.lambda1_nm = v;
    }
    if let Some(v) = common.lambda2_nm {
        cfg.lambda2_nm = v;
    }
    if let Some(v) = common.length_mm {
        cfg.length_mm = v;
    }
    if let Some(v) = common.visibility {
        cfg.visibility = v;
    }
    if let Some(v) = common.alpha {
        cfg.alpha_override = Some(v);
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    Ok(cfg)
}

impl RunConfig {
    /// Material registry: built-in records plus any JSON documents found in
    /// the directory named by `SINGLET_DOP_MATERIAL_DIR` (those replace
    /// same-named built-ins).
    pub fn registry() -> Result<MaterialRegistry<f64>, CliError> {
        let mut reg = MaterialRegistry::builtin();
        if let Some(dir) = std::env::var_os(MATERIAL_DIR_ENV) {
            reg.load_dir(Path::new(&dir))
                .map_err(|e| CliError::Config(format!("loading {MATERIAL_DIR_ENV}: {e}")))?;
        }
        Ok(reg)
    }

    /// Validate physics inputs against the chosen material; returns the
    /// material record for downstream computations.
    pub fn validate<'r>(
        &self,
        registry: &'r MaterialRegistry<f64>,
    ) -> Result<&'r Material<f64>, CliError> {
        let material = registry
            .get(&self.material)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.lambda1_nm > 0.0 && self.lambda2_nm >= self.lambda1_nm) {
            return Err(CliError::Config(format!(
                "wavelengths must satisfy lambda2 >= lambda1 > 0, got {} and {} nm",
                self.lambda1_nm, self.lambda2_nm
            )));
        }
        let lambda3_nm =
            self.lambda1_nm * self.lambda2_nm / (self.lambda1_nm + self.lambda2_nm);
        for (label, nm) in [
            ("lambda1", self.lambda1_nm),
            ("lambda2", self.lambda2_nm),
            ("sum-frequency wavelength", lambda3_nm),
        ] {
            let um = nm * 1e-3;
            let (lo, hi) = material.validity_um;
            if !(um >= lo && um <= hi) {
                return Err(CliError::Config(format!(
                    "{label} {um} um outside validity window [{lo}, {hi}] um of {}",
                    material.name
                )));
            }
        }
        if self.length_mm.is_nan() || self.length_mm <= 0.0 {
            return Err(CliError::Config("crystal length must be positive".into()));
        }
        if let Some(a) = self.alpha_override {
            if !(0.0..=1.0).contains(&a) {
                return Err(CliError::Config(format!(
                    "alpha override must lie in [0, 1], got {a}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(CliError::Config(format!(
                "visibility must lie in [0, 1], got {}",
                self.visibility
            )));
        }
        if self.count_scale < 0.0 || self.dark_rate < 0.0 {
            return Err(CliError::Config(
                "count_scale and dark_rate must be non-negative".into(),
            ));
        }
        if self.integration_s < 0.0 {
            return Err(CliError::Config("integration time must be >= 0".into()));
        }
        if !(self.e1 >= 0.0 && self.e2 >= 0.0) {
            return Err(CliError::Config("amplitudes e1, e2 must be >= 0".into()));
        }
        let r = self.lambda2_range_nm;
        if !(r.step > 0.0 && r.stop >= r.start) {
            return Err(CliError::Config(format!(
                "invalid lambda2 range: start {} stop {} step {}",
                r.start, r.stop, r.step
            )));
        }
        if let Some(grid) = &self.theta {
            if grid.is_empty() {
                return Err(CliError::Config("theta_deg grid must be non-empty".into()));
            }
        }
        if let Some(grid) = &self.phi {
            if grid.is_empty() {
                return Err(CliError::Config("phi_deg grid must be non-empty".into()));
            }
        }
        Ok(material)
    }

    pub fn lambda1_m(&self) -> f64 {
        self.lambda1_nm * 1e-9
    }

    pub fn lambda2_m(&self) -> f64 {
        self.lambda2_nm * 1e-9
    }

    pub fn length_m(&self) -> f64 {
        self.length_mm * 1e-3
    }

    /// λ2 grid in nm from the configured range (inclusive endpoints).
    pub fn lambda2_grid_nm(&self) -> Vec<f64> {
        let r = self.lambda2_range_nm;
        let n = ((r.stop - r.start) / r.step).round() as usize;
        (0..=n)
            .map(|k| r.start + k as f64 * r.step)
            .filter(|&l| l <= r.stop + 1e-12)
            .collect()
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        self.theta.clone().unwrap_or_else(|| {
            (0..5).map(|k| (k as f64 * 22.5).to_radians()).collect()
        })
    }

    pub fn phi_grid(&self) -> Vec<f64> {
        self.phi.clone().unwrap_or_else(|| {
            (0..13)
                .map(|k| (-90.0 + k as f64 * 15.0).to_radians())
                .collect()
        })
    }

    /// Fine φ grid for sensitivity curves when none is configured.
    pub fn sensitivity_phi_grid(&self) -> Vec<f64> {
        self.phi.clone().unwrap_or_else(|| {
            (0..=90).map(|k| (k as f64).to_radians()).collect()
        })
    }

    pub fn instrument(&self, alpha: f64) -> InstrumentConfig<f64> {
        InstrumentConfig::ideal()
            .with_alpha(alpha)
            .with_crystal2_rot_err(self.crystal2_rot_err)
            .with_waveplate_axis_err(self.waveplate_axis_err)
            .with_waveplate_retardance(self.waveplate_retardance)
            .with_polarizer_angle(self.polarizer_angle)
            .with_visibility(self.visibility)
            .with_count_scale(self.count_scale)
            .with_dark_rate(self.dark_rate)
    }
}
