//! Two-crystal singlet-projection instrument model: sum-frequency amplitudes
//! generated in each crystal, the phase-plate + 45° polarizer detection chain
//! with misalignments and partial mutual coherence, and Poisson photon-count
//! simulation.
//!
//! Sign conventions: both crystal amplitudes are returned positive for the
//! aligned instrument; the π phase that makes the two fields interfere
//! destructively is carried by the nominal half-wave retarder in the
//! detection chain. With the nominal configuration (retardance π, axes
//! aligned, polarizer at 45°, visibility 1) the chain reproduces
//! I = (E1·E2)²/2 · (1−α)² · sin²φ exactly, and the degenerate
//! (equal-wavelength) amplitudes cancel identically.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error;

use crate::polarization::LinearPolPair;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("degenerate amplitudes require lambda1 = lambda2, got {lambda1_nm} nm and {lambda2_nm} nm")]
    WavelengthMismatch { lambda1_nm: f64, lambda2_nm: f64 },
    #[error("sweep grids must be non-empty: {0} grid is empty")]
    EmptyGrid(&'static str),
    #[error("invalid instrument configuration: {0}")]
    InvalidConfig(String),
}

/// The bichromatic source feeding the instrument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig<T: Real> {
    /// Lower wavelength (meters).
    pub lambda1: T,
    /// Upper wavelength (meters), λ2 ≥ λ1.
    pub lambda2: T,
    pub pol: LinearPolPair<T>,
}

impl<T: Real> SourceConfig<T> {
    pub fn new(lambda1: T, lambda2: T, pol: LinearPolPair<T>) -> Result<Self, ProjectionError> {
        if !(lambda1 > T::zero() && lambda2 >= lambda1) {
            return Err(ProjectionError::InvalidConfig(format!(
                "wavelengths must satisfy lambda2 >= lambda1 > 0, got ({}, {})",
                lambda1, lambda2
            )));
        }
        Ok(Self {
            lambda1,
            lambda2,
            pol,
        })
    }
}

/// All misalignment and noise parameters of the interferometric chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstrumentConfig<T: Real> {
    /// Perturbing-process amplitude weight, in [0, 1].
    pub alpha: T,
    /// Deviation of crystal 2 from its nominal 90° rotation (radians).
    pub crystal2_rot_err: T,
    /// Deviation of the retarder axes from the crystal axes (radians).
    pub waveplate_axis_err: T,
    /// Retardance of the phase plates (radians, nominally π).
    pub waveplate_retardance: T,
    /// Polarizer transmission axis (radians, nominally π/4).
    pub polarizer_angle: T,
    /// Mutual coherence of the two sum-frequency fields, in [0, 1].
    pub visibility: T,
    /// Detected counts per unit intensity per unit time.
    pub count_scale: T,
    /// Dark counts per unit time.
    pub dark_rate: T,
}

impl<T: Real> InstrumentConfig<T> {
    /// Perfectly aligned chain: no misalignments, full visibility, unit count
    /// scale, no dark counts, α = 0.
    pub fn ideal() -> Self {
        Self {
            alpha: T::zero(),
            crystal2_rot_err: T::zero(),
            waveplate_axis_err: T::zero(),
            waveplate_retardance: T::PI(),
            polarizer_angle: T::FRAC_PI_4(),
            visibility: T::one(),
            count_scale: T::one(),
            dark_rate: T::zero(),
        }
    }

    pub fn with_alpha(mut self, alpha: T) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_crystal2_rot_err(mut self, err: T) -> Self {
        self.crystal2_rot_err = err;
        self
    }

    pub fn with_waveplate_axis_err(mut self, err: T) -> Self {
        self.waveplate_axis_err = err;
        self
    }

    pub fn with_waveplate_retardance(mut self, retardance: T) -> Self {
        self.waveplate_retardance = retardance;
        self
    }

    pub fn with_polarizer_angle(mut self, angle: T) -> Self {
        self.polarizer_angle = angle;
        self
    }

    pub fn with_visibility(mut self, visibility: T) -> Self {
        self.visibility = visibility;
        self
    }

    pub fn with_count_scale(mut self, scale: T) -> Self {
        self.count_scale = scale;
        self
    }

    pub fn with_dark_rate(mut self, rate: T) -> Self {
        self.dark_rate = rate;
        self
    }

    pub fn validate(&self) -> Result<(), ProjectionError> {
        let unit = T::zero()..=T::one();
        if !unit.contains(&self.alpha) {
            return Err(ProjectionError::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !unit.contains(&self.visibility) {
            return Err(ProjectionError::InvalidConfig(format!(
                "visibility must lie in [0, 1], got {}",
                self.visibility
            )));
        }
        if self.count_scale < T::zero() || self.dark_rate < T::zero() {
            return Err(ProjectionError::InvalidConfig(
                "count_scale and dark_rate must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// The two sum-frequency fields, each tagged with its lab-frame polarization
/// axis so misalignment rotations survive into the detection chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPair<T: Real> {
    /// Crystal-1 field amplitude, nominally along lab y.
    pub e_y: Complex<T>,
    /// Crystal-2 field amplitude, nominally along lab x.
    pub e_x: Complex<T>,
    pub axis_y: [T; 2],
    pub axis_x: [T; 2],
}

/// Scalar sum-frequency amplitude produced by one crystal for inputs at
/// angles `theta` and `theta + phi` in that crystal's own frame.
fn crystal_amplitude<T: Real>(theta: T, phi: T, e1: T, e2: T, alpha: T) -> T {
    let two = T::of(2.0);
    e1 * e2
        * ((T::one() - alpha) * theta.cos() * (theta + phi).sin()
            + alpha * (two * theta + phi).sin())
}

/// Sum-frequency amplitudes from the two crossed crystals for non-degenerate
/// wavelengths (self-SHG of each input is rejected by the monochromator and
/// not modeled here).
pub fn sfg_amplitudes<T: Real>(
    src: &SourceConfig<T>,
    cfg: &InstrumentConfig<T>,
) -> FieldPair<T> {
    let LinearPolPair { theta, phi, e1, e2 } = src.pol;
    let eps = cfg.crystal2_rot_err;
    let e_y = crystal_amplitude(theta, phi, e1, e2, cfg.alpha);
    // crystal 2 frame sits at 90° + eps from the lab; its output axis maps
    // back to −(cos eps, sin eps), folded into the amplitude sign
    let theta2 = theta - T::FRAC_PI_2() - eps;
    let e_x = -crystal_amplitude(theta2, phi, e1, e2, cfg.alpha);
    FieldPair {
        e_y: Complex::new(e_y, T::zero()),
        e_x: Complex::new(e_x, T::zero()),
        axis_y: [T::zero(), T::one()],
        axis_x: [eps.cos(), eps.sin()],
    }
}

/// Equal-wavelength amplitudes where SFG and self-SHG are indistinguishable;
/// the ideal 45° projection of these cancels identically.
pub fn degenerate_amplitudes<T: Real>(
    src: &SourceConfig<T>,
    cfg: &InstrumentConfig<T>,
) -> Result<FieldPair<T>, ProjectionError> {
    if src.lambda1 != src.lambda2 {
        return Err(ProjectionError::WavelengthMismatch {
            lambda1_nm: src.lambda1.as_f64() * 1e9,
            lambda2_nm: src.lambda2.as_f64() * 1e9,
        });
    }
    let LinearPolPair { theta, phi, e1, e2 } = src.pol;
    let two = T::of(2.0);
    let bracket = |t: T| {
        e1 * e1 / two * (two * t).sin()
            + e2 * e2 / two * (two * (t + phi)).sin()
            + e1 * e2 * (two * t + phi).sin()
    };
    let eps = cfg.crystal2_rot_err;
    let theta2 = theta - T::FRAC_PI_2() - eps;
    Ok(FieldPair {
        e_y: Complex::new(bracket(theta), T::zero()),
        e_x: Complex::new(-bracket(theta2), T::zero()),
        axis_y: [T::zero(), T::one()],
        axis_x: [eps.cos(), eps.sin()],
    })
}

type CVec2<T> = [Complex<T>; 2];

/// Retarder Jones matrix R(ψ)·diag(1, e^{iΓ})·R(−ψ).
fn retarder<T: Real>(axis_angle: T, retardance: T) -> [CVec2<T>; 2] {
    let (s, c) = axis_angle.sin_cos();
    let (s, c) = (Complex::new(s, T::zero()), Complex::new(c, T::zero()));
    let e = Complex::new(retardance.cos(), retardance.sin());
    let one = Complex::new(T::one(), T::zero());
    let off = (one - e) * s * c;
    [[c * c + e * s * s, off], [off, s * s + e * c * c]]
}

fn mat_vec<T: Real>(m: &[CVec2<T>; 2], v: &CVec2<T>) -> CVec2<T> {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Propagate both fields through the retarder and polarizer and combine them
/// with partial mutual coherence:
/// I = |a|² + |b|² + 2·visibility·Re(a·conj(b)).
pub fn detect_intensity<T: Real>(fields: &FieldPair<T>, cfg: &InstrumentConfig<T>) -> T {
    let w = retarder(cfg.waveplate_axis_err, cfg.waveplate_retardance);
    let v_a = mat_vec(
        &w,
        &[fields.e_y * fields.axis_y[0], fields.e_y * fields.axis_y[1]],
    );
    let v_b = mat_vec(
        &w,
        &[fields.e_x * fields.axis_x[0], fields.e_x * fields.axis_x[1]],
    );
    let (ps, pc) = cfg.polarizer_angle.sin_cos();
    let (ps, pc) = (Complex::new(ps, T::zero()), Complex::new(pc, T::zero()));
    let a = pc * v_a[0] + ps * v_a[1];
    let b = pc * v_b[0] + ps * v_b[1];
    a.norm_sqr() + b.norm_sqr() + T::of(2.0) * cfg.visibility * (a * b.conj()).re
}

/// Detected intensity of the full chain for a non-degenerate source.
pub fn intensity<T: Real>(src: &SourceConfig<T>, cfg: &InstrumentConfig<T>) -> T {
    detect_intensity(&sfg_amplitudes(src, cfg), cfg)
}

/// Deterministic per-cell RNG seed for sweep grids (splitmix64 mixing).
pub fn cell_seed(seed: u64, i_theta: usize, i_phi: usize) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mixed = seed
        ^ (i_phi as u64).wrapping_mul(0xA076_1D64_78BD_642F)
        ^ (i_theta as u64).wrapping_mul(0xE703_7ED1_A0B4_28DB);
    splitmix64(splitmix64(mixed))
}

fn poisson_draw(mean: f64, seed: u64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(&mut rng) as u64
}

/// Photon counts over `integration_time`, drawn from a Poisson law with mean
/// count_scale·I·t + dark_rate·t, deterministically from `seed`.
pub fn simulate_counts<T: Real>(
    src: &SourceConfig<T>,
    cfg: &InstrumentConfig<T>,
    integration_time: T,
    seed: u64,
) -> u64 {
    let mean = (cfg.count_scale * intensity(src, cfg) + cfg.dark_rate) * integration_time;
    poisson_draw(mean.as_f64(), seed)
}

/// Measurement grid over (θ, φ) with per-φ statistics over θ.
///
/// Matrices are φ-major: `intensity[i_phi][i_theta]`. Statistics use the
/// population convention (divide by N) since the θ samples are a designed
/// grid rather than a random sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T: Real> {
    pub theta: Vec<T>,
    pub phi: Vec<T>,
    pub integration_time: T,
    pub seed: u64,
    pub intensity: Vec<Vec<T>>,
    pub counts: Vec<Vec<u64>>,
    pub mean_intensity: Vec<T>,
    pub std_intensity: Vec<T>,
    pub mean_counts: Vec<T>,
    pub std_counts: Vec<T>,
}

pub(crate) fn population_stats<T: Real>(xs: &[T]) -> (T, T) {
    let n = T::of(xs.len() as f64);
    let mean = xs.iter().copied().sum::<T>() / n;
    let var = xs
        .iter()
        .map(|&x| (x - mean) * (x - mean))
        .sum::<T>()
        / n;
    (mean, var.sqrt())
}

/// Evaluate the chain over a (θ, φ) grid, recording both the noiseless
/// intensity and a Poisson-sampled count per cell. Cells are independent;
/// each derives its own RNG stream from (seed, iθ, iφ), so parallel and
/// serial evaluation produce identical grids.
pub fn sweep<T: Real>(
    src_template: &SourceConfig<T>,
    cfg: &InstrumentConfig<T>,
    theta_set: &[T],
    phi_set: &[T],
    integration_time: T,
    seed: u64,
) -> Result<SweepResult<T>, ProjectionError> {
    if theta_set.is_empty() {
        return Err(ProjectionError::EmptyGrid("theta"));
    }
    if phi_set.is_empty() {
        return Err(ProjectionError::EmptyGrid("phi"));
    }
    cfg.validate()?;
    let n_theta = theta_set.len();
    let cells: Vec<(T, u64)> = (0..phi_set.len() * n_theta)
        .into_par_iter()
        .map(|idx| {
            let (i_phi, i_theta) = (idx / n_theta, idx % n_theta);
            let pol = LinearPolPair {
                theta: theta_set[i_theta],
                phi: phi_set[i_phi],
                e1: src_template.pol.e1,
                e2: src_template.pol.e2,
            };
            let src = SourceConfig { pol, ..*src_template };
            let i = intensity(&src, cfg);
            let mean = (cfg.count_scale * i + cfg.dark_rate) * integration_time;
            let counts = poisson_draw(mean.as_f64(), cell_seed(seed, i_theta, i_phi));
            (i, counts)
        })
        .collect();

    let mut result = SweepResult {
        theta: theta_set.to_vec(),
        phi: phi_set.to_vec(),
        integration_time,
        seed,
        intensity: Vec::with_capacity(phi_set.len()),
        counts: Vec::with_capacity(phi_set.len()),
        mean_intensity: Vec::with_capacity(phi_set.len()),
        std_intensity: Vec::with_capacity(phi_set.len()),
        mean_counts: Vec::with_capacity(phi_set.len()),
        std_counts: Vec::with_capacity(phi_set.len()),
    };
    for i_phi in 0..phi_set.len() {
        let row = &cells[i_phi * n_theta..(i_phi + 1) * n_theta];
        let intensities: Vec<T> = row.iter().map(|&(i, _)| i).collect();
        let counts: Vec<u64> = row.iter().map(|&(_, c)| c).collect();
        let count_vals: Vec<T> = counts.iter().map(|&c| T::of(c as f64)).collect();
        let (mi, si) = population_stats(&intensities);
        let (mc, sc) = population_stats(&count_vals);
        result.intensity.push(intensities);
        result.counts.push(counts);
        result.mean_intensity.push(mi);
        result.std_intensity.push(si);
        result.mean_counts.push(mc);
        result.std_counts.push(sc);
    }
    Ok(result)
}
