//! Refractive-index model for biaxial crystals: principal Sellmeier indices,
//! the extraordinary index for propagation in the XZ plane, and the spatial
//! walk-off angle.
//!
//! Material data is loaded from JSON documents; a KTP record is built in. The
//! shipped KTP coefficients are the flux-grown set of Fan et al. (Appl. Opt.
//! 26, 2390, 1987). The geometry convention throughout: propagation in the XZ
//! plane at angle θ from the crystal z axis, the "ordinary" wave polarized
//! along y, the "extraordinary" wave polarized in the XZ plane.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Built-in KTP material record (also shipped as `data/ktp.json`).
pub const KTP_JSON: &str = include_str!("../data/ktp.json");

#[derive(Debug, Error)]
pub enum DispersionError {
    #[error("wavelength {wavelength_um} um outside validity window [{lo_um}, {hi_um}] um of {material}")]
    WavelengthOutOfRange {
        material: String,
        wavelength_um: f64,
        lo_um: f64,
        hi_um: f64,
    },
    #[error("propagation angle {0} rad outside [0, pi/2]")]
    AngleOutOfRange(f64),
    #[error("evaluated index {value} for axis {axis:?} outside the physical range (1, 3)")]
    UnphysicalIndex { axis: Axis, value: f64 },
    #[error("unknown Sellmeier form id {0:?}")]
    UnknownForm(String),
    #[error("form {form} expects {expected} coefficients per axis, axis {axis:?} has {got}")]
    WrongCoefficientCount {
        form: &'static str,
        expected: usize,
        axis: Axis,
        got: usize,
    },
    #[error("invalid validity window [{0}, {1}] um")]
    InvalidValidity(f64, f64),
    #[error("material {0:?} already registered")]
    DuplicateMaterial(String),
    #[error("material {0:?} not found in registry")]
    UnknownMaterial(String),
    #[error("failed to parse material file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("failed to read material file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Principal dielectric axis of a biaxial crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Supported Sellmeier variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SellmeierForm {
    /// n² = c0 + c1/(λ² − c2) + c3·λ², λ in micrometers.
    FourTerm,
}

impl SellmeierForm {
    pub fn id(&self) -> &'static str {
        match self {
            SellmeierForm::FourTerm => "sellmeier-4term",
        }
    }

    pub fn from_id(id: &str) -> Result<Self, DispersionError> {
        match id {
            "sellmeier-4term" => Ok(SellmeierForm::FourTerm),
            other => Err(DispersionError::UnknownForm(other.to_string())),
        }
    }

    fn coefficient_count(&self) -> usize {
        match self {
            SellmeierForm::FourTerm => 4,
        }
    }
}

/// On-disk material document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaterialFile {
    pub name: String,
    pub form: String,
    pub axes: AxesFile,
    pub validity_um: [f64; 2],
    pub source: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxesFile {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

/// Per-axis dispersion coefficients for one material.
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierCoeffs<T: Real> {
    pub form: SellmeierForm,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Real> SellmeierCoeffs<T> {
    fn axis(&self, axis: Axis) -> &[T] {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }

    fn eval_n_squared(&self, axis: Axis, lambda_um: T) -> T {
        match self.form {
            SellmeierForm::FourTerm => {
                let c = self.axis(axis);
                let l2 = lambda_um * lambda_um;
                c[0] + c[1] / (l2 - c[2]) + c[3] * l2
            }
        }
    }
}

/// A registered crystal with its dispersion data and validity window.
#[derive(Debug, Clone, PartialEq)]
pub struct Material<T: Real> {
    pub name: String,
    pub coeffs: SellmeierCoeffs<T>,
    /// Wavelength validity window in micrometers.
    pub validity_um: (T, T),
    pub source: String,
}

const METERS_PER_MICROMETER: f64 = 1e-6;

impl<T: Real> Material<T> {
    pub fn from_file_record(record: &MaterialFile) -> Result<Self, DispersionError> {
        let form = SellmeierForm::from_id(&record.form)?;
        let expected = form.coefficient_count();
        for (axis, coeffs) in [
            (Axis::X, &record.axes.x),
            (Axis::Y, &record.axes.y),
            (Axis::Z, &record.axes.z),
        ] {
            if coeffs.len() != expected {
                return Err(DispersionError::WrongCoefficientCount {
                    form: form.id(),
                    expected,
                    axis,
                    got: coeffs.len(),
                });
            }
        }
        let [lo, hi] = record.validity_um;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(DispersionError::InvalidValidity(lo, hi));
        }
        let conv = |v: &[f64]| v.iter().map(|&c| T::of(c)).collect::<Vec<T>>();
        Ok(Self {
            name: record.name.clone(),
            coeffs: SellmeierCoeffs {
                form,
                x: conv(&record.axes.x),
                y: conv(&record.axes.y),
                z: conv(&record.axes.z),
            },
            validity_um: (T::of(lo), T::of(hi)),
            source: record.source.clone(),
        })
    }

    pub fn from_json(json: &str) -> Result<Self, DispersionError> {
        let record: MaterialFile = serde_json::from_str(json)?;
        Self::from_file_record(&record)
    }

    /// The built-in KTP record.
    pub fn ktp() -> Self {
        Self::from_json(KTP_JSON).expect("embedded KTP data is valid")
    }

    fn check_wavelength(&self, wavelength_m: T) -> Result<T, DispersionError> {
        let lambda_um = wavelength_m / T::of(METERS_PER_MICROMETER);
        let (lo, hi) = self.validity_um;
        if !(lambda_um >= lo && lambda_um <= hi) {
            return Err(DispersionError::WavelengthOutOfRange {
                material: self.name.clone(),
                wavelength_um: lambda_um.as_f64(),
                lo_um: lo.as_f64(),
                hi_um: hi.as_f64(),
            });
        }
        Ok(lambda_um)
    }

    /// Principal refractive index along `axis` at vacuum wavelength
    /// `wavelength_m` (meters).
    pub fn index(&self, axis: Axis, wavelength_m: T) -> Result<T, DispersionError> {
        let lambda_um = self.check_wavelength(wavelength_m)?;
        let n2 = self.coeffs.eval_n_squared(axis, lambda_um);
        if !(n2 > T::one() && n2 < T::of(9.0)) {
            return Err(DispersionError::UnphysicalIndex {
                axis,
                value: n2.as_f64().max(0.0).sqrt(),
            });
        }
        Ok(n2.sqrt())
    }

    /// Index of the extraordinary wave for propagation in the XZ plane at
    /// angle `theta` from the z axis (polarization in the XZ plane):
    /// 1/n² = cos²θ/n_x² + sin²θ/n_z².
    pub fn index_e_xz(&self, theta: T, wavelength_m: T) -> Result<T, DispersionError> {
        if !(theta >= T::zero() && theta <= T::FRAC_PI_2()) {
            return Err(DispersionError::AngleOutOfRange(theta.as_f64()));
        }
        let nx = self.index(Axis::X, wavelength_m)?;
        let nz = self.index(Axis::Z, wavelength_m)?;
        let (s, c) = theta.sin_cos();
        let inv = c * c / (nx * nx) + s * s / (nz * nz);
        Ok(inv.sqrt().recip())
    }

    /// Spatial walk-off angle of the extraordinary wave in the XZ plane:
    /// ρ = |atan((n_e(θ)²/2)·(1/n_z² − 1/n_x²)·sin 2θ)|.
    pub fn walkoff_xz(&self, theta: T, wavelength_m: T) -> Result<T, DispersionError> {
        let ne = self.index_e_xz(theta, wavelength_m)?;
        let nx = self.index(Axis::X, wavelength_m)?;
        let nz = self.index(Axis::Z, wavelength_m)?;
        let two = T::of(2.0);
        let tan_rho =
            ne * ne / two * ((nz * nz).recip() - (nx * nx).recip()) * (two * theta).sin();
        Ok(tan_rho.atan().abs())
    }
}

/// Read-only collection of materials, keyed by name.
#[derive(Debug, Clone, Default)]
pub struct MaterialRegistry<T: Real> {
    materials: BTreeMap<String, Material<T>>,
}

impl<T: Real> MaterialRegistry<T> {
    pub fn empty() -> Self {
        Self {
            materials: BTreeMap::new(),
        }
    }

    /// Registry with the built-in materials (currently KTP).
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.insert(Material::ktp()).expect("empty registry");
        reg
    }

    /// Insert a material; names must be unique.
    pub fn insert(&mut self, material: Material<T>) -> Result<(), DispersionError> {
        if self.materials.contains_key(&material.name) {
            return Err(DispersionError::DuplicateMaterial(material.name));
        }
        self.materials.insert(material.name.clone(), material);
        Ok(())
    }

    /// Insert a material, replacing any existing record with the same name.
    pub fn insert_replacing(&mut self, material: Material<T>) {
        self.materials.insert(material.name.clone(), material);
    }

    pub fn get(&self, name: &str) -> Result<&Material<T>, DispersionError> {
        self.materials
            .get(name)
            .ok_or_else(|| DispersionError::UnknownMaterial(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(String::as_str)
    }

    /// Load every `*.json` material document in `dir`, replacing same-named
    /// records already present.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, DispersionError> {
        let entries = fs::read_dir(dir).map_err(|source| DispersionError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
            .collect();
        paths.sort();
        let mut loaded = 0;
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|source| DispersionError::Io {
                path: path.display().to_string(),
                source,
            })?;
            self.insert_replacing(Material::from_json(&text)?);
            loaded += 1;
        }
        Ok(loaded)
    }
}
