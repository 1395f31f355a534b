//! Analysis of measurement grids: the fringe-visibility metric, the two
//! count-rate fit models, misalignment sensitivity curves, the
//! wavelength-separation limits Λ1/Λ2, operating-regime classification, and
//! DOP extraction from a fitted sweep.

use thiserror::Error;

use crate::dispersion::Material;
use crate::phasematch::{self, PhaseMatchError};
use crate::polarization::LinearPolPair;
use crate::projection::{intensity, population_stats, InstrumentConfig, SourceConfig};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("phi and y lengths differ: {phi} vs {y}")]
    LengthMismatch { phi: usize, y: usize },
    #[error("degenerate fit: design matrix is rank deficient")]
    DegenerateFit,
    #[error("visibility undefined: maximum and minimum mean are both zero")]
    UndefinedVisibility,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    PhaseMatch(#[from] PhaseMatchError),
}

/// Fringe visibility V = (N_max − N_min)/(N_max + N_min) of per-φ means.
pub fn visibility<T: Real>(per_phi_means: &[T]) -> Result<T, AnalysisError> {
    if per_phi_means.len() < 2 {
        return Err(AnalysisError::InsufficientData {
            needed: 2,
            got: per_phi_means.len(),
        });
    }
    let mut max = per_phi_means[0];
    let mut min = per_phi_means[0];
    for &m in per_phi_means {
        max = max.max(m);
        min = min.min(m);
    }
    if max + min <= T::zero() {
        return Err(AnalysisError::UndefinedVisibility);
    }
    Ok((max - min) / (max + min))
}

/// Count-rate models fitted to per-φ means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// a·sin²φ + b
    Sin2,
    /// a + b·sin²φ + c·sin²(φ + 2d)
    ShiftedSin2,
}

impl FitModel {
    pub fn id(&self) -> &'static str {
        match self {
            FitModel::Sin2 => "sin2",
            FitModel::ShiftedSin2 => "shifted_sin2",
        }
    }

    pub fn from_id(id: &str) -> Result<Self, AnalysisError> {
        match id {
            "sin2" => Ok(FitModel::Sin2),
            "shifted_sin2" | "shifted" => Ok(FitModel::ShiftedSin2),
            other => Err(AnalysisError::InvalidParameter(format!(
                "unknown fit model {other:?} (expected sin2 or shifted_sin2)"
            ))),
        }
    }
}

/// Fitted parameters with 1σ half-widths from the linear least-squares
/// covariance (noise variance estimated from the residuals).
///
/// Parameter roles follow the model definition: for [`FitModel::Sin2`],
/// `a` is the sin²φ amplitude and `b` the offset; for
/// [`FitModel::ShiftedSin2`], `a` is the offset, `b` the sin²φ amplitude and
/// `c`, `d` the shifted-term amplitude and shift angle. The shifted model is
/// reported canonically with c ≥ 0 and d in (−45°, 45°].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<T: Real> {
    pub model: FitModel,
    pub a: T,
    pub b: T,
    pub c: Option<T>,
    pub d: Option<T>,
    pub residual_rms: T,
    pub stderr_a: T,
    pub stderr_b: T,
    pub stderr_c: Option<T>,
    pub stderr_d: Option<T>,
}

impl<T: Real> FitResult<T> {
    /// Model prediction at polarization difference `phi`.
    pub fn predict(&self, phi: T) -> T {
        let s2 = phi.sin() * phi.sin();
        match self.model {
            FitModel::Sin2 => self.a * s2 + self.b,
            FitModel::ShiftedSin2 => {
                let d = self.d.unwrap_or_else(T::zero);
                let c = self.c.unwrap_or_else(T::zero);
                let shifted = (phi + T::of(2.0) * d).sin();
                self.a + self.b * s2 + c * shifted * shifted
            }
        }
    }
}

/// Linear least squares of y on {sin²φ, 1}; exact on noiseless model data.
/// The amplitude is clamped to a ≥ 0 (boundary solution b = mean) since a
/// negative projection amplitude is unphysical.
pub fn fit_sin2<T: Real>(phi: &[T], y: &[T]) -> Result<FitResult<T>, AnalysisError> {
    if phi.len() != y.len() {
        return Err(AnalysisError::LengthMismatch {
            phi: phi.len(),
            y: y.len(),
        });
    }
    let n_pts = phi.len();
    if n_pts < 3 {
        return Err(AnalysisError::InsufficientData {
            needed: 3,
            got: n_pts,
        });
    }
    let n = T::of(n_pts as f64);
    let mut s11 = T::zero();
    let mut s10 = T::zero();
    let mut b1 = T::zero();
    let mut b0 = T::zero();
    for (&p, &yi) in phi.iter().zip(y) {
        let f = p.sin() * p.sin();
        s11 = s11 + f * f;
        s10 = s10 + f;
        b1 = b1 + f * yi;
        b0 = b0 + yi;
    }
    let det = n * s11 - s10 * s10;
    if det.abs() <= T::of(1e-12) * (n * s11).max(T::one() + s10 * s10) {
        return Err(AnalysisError::DegenerateFit);
    }
    let mut a = (n * b1 - s10 * b0) / det;
    let mut b = (s11 * b0 - s10 * b1) / det;
    if a < T::zero() {
        a = T::zero();
        b = b0 / n;
    }
    let sse = phi
        .iter()
        .zip(y)
        .map(|(&p, &yi)| {
            let r = yi - (a * p.sin() * p.sin() + b);
            r * r
        })
        .sum::<T>();
    let dof = T::of((n_pts - 2) as f64);
    let s2 = sse / dof;
    Ok(FitResult {
        model: FitModel::Sin2,
        a,
        b,
        c: None,
        d: None,
        residual_rms: (sse / n).sqrt(),
        stderr_a: (s2 * n / det).max(T::zero()).sqrt(),
        stderr_b: (s2 * s11 / det).max(T::zero()).sqrt(),
        stderr_c: None,
        stderr_d: None,
    })
}

/// Solve the symmetric 3×3 system m·x = rhs by Gaussian elimination with
/// partial pivoting; `None` when rank deficient.
#[allow(clippy::needless_range_loop)]
fn solve3<T: Real>(mut m: [[T; 3]; 3], mut rhs: [T; 3]) -> Option<[T; 3]> {
    let scale = m
        .iter()
        .flatten()
        .fold(T::zero(), |acc, &v| acc.max(v.abs()))
        .max(T::one());
    let tol = scale * T::of(1e-12);
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].abs() <= tol {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] = m[row][k] - f * m[col][k];
            }
            rhs[row] = rhs[row] - f * rhs[col];
        }
    }
    let mut x = [T::zero(); 3];
    for col in (0..3).rev() {
        let mut acc = rhs[col];
        for k in col + 1..3 {
            acc = acc - m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}

fn shifted_design<T: Real>(phi: &[T], y: &[T], d: T) -> ([[T; 3]; 3], [T; 3]) {
    let mut xtx = [[T::zero(); 3]; 3];
    let mut xty = [T::zero(); 3];
    for (&p, &yi) in phi.iter().zip(y) {
        let s2 = p.sin() * p.sin();
        let sh = (p + T::of(2.0) * d).sin();
        let row = [T::one(), s2, sh * sh];
        for i in 0..3 {
            for j in 0..3 {
                xtx[i][j] = xtx[i][j] + row[i] * row[j];
            }
            xty[i] = xty[i] + row[i] * yi;
        }
    }
    (xtx, xty)
}

fn shifted_sse<T: Real>(phi: &[T], y: &[T], d: T, params: &[T; 3]) -> T {
    phi.iter()
        .zip(y)
        .map(|(&p, &yi)| {
            let s2 = p.sin() * p.sin();
            let sh = (p + T::of(2.0) * d).sin();
            let r = yi - (params[0] + params[1] * s2 + params[2] * sh * sh);
            r * r
        })
        .sum()
}

fn shifted_solve_at<T: Real>(phi: &[T], y: &[T], d: T) -> Option<([T; 3], T)> {
    let (xtx, xty) = shifted_design(phi, y, d);
    let params = solve3(xtx, xty)?;
    Some((params, shifted_sse(phi, y, d, &params)))
}

/// Least squares of y on {1, sin²φ, sin²(φ+2d)}: the shift d is found by a
/// grid scan over (−45°, 45°] followed by golden-section refinement, the
/// linear parameters by a direct solve at each candidate d.
///
/// The three basis functions span the same space for almost every d, so only
/// the fitted curve (equivalently its constant/cos 2φ/sin 2φ components) is
/// identifiable from data; the reported tuple is the canonical representative
/// with c ≥ 0 and d in (−45°, 45°].
pub fn fit_shifted<T: Real>(phi: &[T], y: &[T]) -> Result<FitResult<T>, AnalysisError> {
    if phi.len() != y.len() {
        return Err(AnalysisError::LengthMismatch {
            phi: phi.len(),
            y: y.len(),
        });
    }
    let n_pts = phi.len();
    if n_pts < 5 {
        return Err(AnalysisError::InsufficientData {
            needed: 5,
            got: n_pts,
        });
    }

    // grid centers avoid the rank-deficient shifts d = 0 and d = ±45°
    let quarter = T::FRAC_PI_4();
    let n_grid = 180;
    let step = quarter * T::of(2.0) / T::of(n_grid as f64);
    let mut best: Option<(T, T)> = None; // (sse, d)
    for k in 0..n_grid {
        let d = -quarter + (T::of(k as f64) + T::of(0.5)) * step;
        if let Some((_, sse)) = shifted_solve_at(phi, y, d) {
            if best.is_none_or(|(b, _)| sse < b) {
                best = Some((sse, d));
            }
        }
    }
    let (_, d_grid) = best.ok_or(AnalysisError::DegenerateFit)?;

    // golden-section refinement inside one grid cell
    let inv_phi_ratio = T::of(0.618_033_988_749_894_8);
    let eps = T::of(1e-3);
    let mut lo = (d_grid - step).max(-quarter + step * eps);
    let mut hi = (d_grid + step).min(quarter - step * eps);
    let sse_at = |d: T| {
        shifted_solve_at(phi, y, d)
            .map(|(_, sse)| sse)
            .unwrap_or_else(T::infinity)
    };
    let mut x1 = hi - inv_phi_ratio * (hi - lo);
    let mut x2 = lo + inv_phi_ratio * (hi - lo);
    let mut f1 = sse_at(x1);
    let mut f2 = sse_at(x2);
    for _ in 0..80 {
        if hi - lo < T::of(1e-12) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi_ratio * (hi - lo);
            f1 = sse_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi_ratio * (hi - lo);
            f2 = sse_at(x2);
        }
    }
    let mut d = (lo + hi) / T::of(2.0);
    let (mut params, mut sse) = shifted_solve_at(phi, y, d).ok_or(AnalysisError::DegenerateFit)?;
    if let Some((p_grid, s_grid)) = shifted_solve_at(phi, y, d_grid) {
        // keep the grid candidate when refinement did not improve on it
        if s_grid < sse {
            params = p_grid;
            sse = s_grid;
            d = d_grid;
        }
    }

    // canonical form: fold a negative shifted amplitude into the offset
    let (mut a, b, mut c) = (params[0], params[1], params[2]);
    if c < T::zero() {
        a = a + c;
        c = -c;
        d = d + quarter;
    }
    while d > quarter {
        d = d - T::FRAC_PI_2();
    }
    while d <= -quarter {
        d = d + T::FRAC_PI_2();
    }

    let n = T::of(n_pts as f64);
    let dof = T::of((n_pts.max(5) - 4) as f64);
    let s2 = sse / dof;
    // conditional covariance of (a, b, c) at the fitted d
    let (xtx, _) = shifted_design(phi, y, d);
    let diag_inv = |i: usize| -> T {
        let mut unit = [T::zero(); 3];
        unit[i] = T::one();
        solve3(xtx, unit).map_or(T::infinity(), |col| col[i])
    };
    // curvature of the profiled objective gives the half-width of d
    let h = T::of(1e-4);
    let sse_p = sse_at(d + h);
    let sse_m = sse_at(d - h);
    let curvature = (sse_p - sse - sse + sse_m) / (h * h);
    let stderr_d = if curvature > T::zero() {
        (T::of(2.0) * s2 / curvature).sqrt()
    } else {
        T::infinity()
    };

    Ok(FitResult {
        model: FitModel::ShiftedSin2,
        a,
        b,
        c: Some(c),
        d: Some(d),
        residual_rms: (sse / n).sqrt(),
        stderr_a: (s2 * diag_inv(0)).max(T::zero()).sqrt(),
        stderr_b: (s2 * diag_inv(1)).max(T::zero()).sqrt(),
        stderr_c: Some((s2 * diag_inv(2)).max(T::zero()).sqrt()),
        stderr_d: Some(stderr_d),
    })
}

/// A single instrument imperfection applied on top of a base configuration.
///
/// Angular variants carry the error angle itself; `Visibility` carries the
/// reduced visibility value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation<T: Real> {
    None,
    Crystal2Rot(T),
    WaveplateAxis(T),
    PolarizerOffset(T),
    Visibility(T),
}

impl<T: Real> Perturbation<T> {
    pub fn apply(&self, base: &InstrumentConfig<T>) -> InstrumentConfig<T> {
        let mut cfg = *base;
        match *self {
            Perturbation::None => {}
            Perturbation::Crystal2Rot(err) => cfg.crystal2_rot_err = err,
            Perturbation::WaveplateAxis(err) => cfg.waveplate_axis_err = err,
            Perturbation::PolarizerOffset(err) => {
                cfg.polarizer_angle = cfg.polarizer_angle + err
            }
            Perturbation::Visibility(v) => cfg.visibility = v,
        }
        cfg
    }

    pub fn label(&self) -> &'static str {
        match self {
            Perturbation::None => "none",
            Perturbation::Crystal2Rot(_) => "crystal2_rot",
            Perturbation::WaveplateAxis(_) => "waveplate_axis",
            Perturbation::PolarizerOffset(_) => "polarizer",
            Perturbation::Visibility(_) => "visibility",
        }
    }

    /// The four standard imperfections studied for the instrument: 1° on each
    /// angular alignment, or visibility reduced to 0.9.
    pub fn standard_set() -> [Perturbation<T>; 4] {
        let one_deg = T::of(1.0_f64.to_radians());
        [
            Perturbation::Crystal2Rot(one_deg),
            Perturbation::WaveplateAxis(one_deg),
            Perturbation::PolarizerOffset(one_deg),
            Perturbation::Visibility(T::of(0.9)),
        ]
    }
}

/// Population standard deviation over the θ samples of the noiseless
/// intensity, per φ, with one perturbation applied to the base configuration.
pub fn theta_stddev_curve<T: Real>(
    base: &InstrumentConfig<T>,
    perturbation: Perturbation<T>,
    phi_grid: &[T],
    theta_samples: &[T],
    alpha: T,
) -> Result<Vec<T>, AnalysisError> {
    if theta_samples.len() < 2 {
        return Err(AnalysisError::InsufficientData {
            needed: 2,
            got: theta_samples.len(),
        });
    }
    let cfg = perturbation.apply(&base.with_alpha(alpha));
    let curve = phi_grid
        .iter()
        .map(|&phi| {
            let vals: Vec<T> = theta_samples
                .iter()
                .map(|&theta| {
                    let src = SourceConfig {
                        lambda1: T::of(1542e-9),
                        lambda2: T::of(1560e-9),
                        pol: LinearPolPair {
                            theta,
                            phi,
                            e1: T::one(),
                            e2: T::one(),
                        },
                    };
                    intensity(&src, &cfg)
                })
                .collect();
            population_stats(&vals).1
        })
        .collect();
    Ok(curve)
}

/// Λ2: wavelength separation at which the signal-to-noise ratio
/// SNR = (1−α)² / ((1−v)·α²) reaches `snr_threshold` (unit peak values of the
/// signal and noise angular factors). Returns 0 for visibility 1, where the
/// imperfect-cancellation noise term vanishes.
pub fn lambda2_limit<T: Real>(
    material: &Material<T>,
    lambda1: T,
    length: T,
    visibility: T,
    snr_threshold: T,
) -> Result<T, AnalysisError> {
    if !(visibility >= T::zero() && visibility <= T::one()) {
        return Err(AnalysisError::InvalidParameter(format!(
            "visibility must lie in [0, 1], got {visibility}"
        )));
    }
    if snr_threshold.is_nan() || snr_threshold <= T::zero() {
        return Err(AnalysisError::InvalidParameter(format!(
            "SNR threshold must be positive, got {snr_threshold}"
        )));
    }
    if visibility == T::one() {
        return Ok(T::zero());
    }
    let validity_hi = material.validity_um.1 * T::of(1e-6);
    let g = |dl: T| -> Result<T, PhaseMatchError> {
        let a = phasematch::alpha(material, lambda1, lambda1 + dl, length)?;
        if a <= T::zero() {
            return Ok(T::infinity());
        }
        let snr = (T::one() - a) * (T::one() - a) / ((T::one() - visibility) * a * a);
        Ok(snr - snr_threshold)
    };
    Ok(phasematch::first_crossing(
        lambda1,
        validity_hi,
        g,
        "SNR threshold",
    )?)
}

/// Operating domain of the projection for a given wavelength separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// dλ > Λ1: the projection is unperturbed.
    Clean,
    /// Λ2 < dλ ≤ Λ1: noisy but the DOP can still be extracted.
    NoisyButUsable,
    /// dλ ≤ Λ2: the signal is immersed in the noise.
    Immersed,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Clean => "clean",
            Regime::NoisyButUsable => "noisy-but-usable",
            Regime::Immersed => "immersed",
        })
    }
}

/// Λ1/Λ2 limits plus the classification of a queried wavelength separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport<T: Real> {
    /// Λ1 (meters).
    pub lambda1_limit: T,
    /// Λ2 (meters).
    pub lambda2_limit: T,
    /// The queried separation dλ (meters).
    pub queried_dl: T,
    pub regime: Regime,
}

/// Classify a wavelength separation against the Λ1/Λ2 limits. Boundary values
/// are assigned to the less favorable domain.
pub fn regimes<T: Real>(
    material: &Material<T>,
    lambda1: T,
    length: T,
    visibility: T,
    queried_dl: T,
) -> Result<RegimeReport<T>, AnalysisError> {
    let l1 = phasematch::lambda1_limit(material, lambda1, length)?;
    let l2 = lambda2_limit(material, lambda1, length, visibility, T::one())?;
    let regime = if queried_dl > l1 {
        Regime::Clean
    } else if queried_dl > l2 {
        Regime::NoisyButUsable
    } else {
        Regime::Immersed
    };
    Ok(RegimeReport {
        lambda1_limit: l1,
        lambda2_limit: l2,
        queried_dl,
        regime,
    })
}

/// DOP at a queried φ from a sin² fit: with the dark offset removed, the
/// counts are proportional to 1 − DOP², normalized by the calibration level
/// `reference_max` (the count level at DOP = 0, i.e. φ = 90° with equal
/// powers).
pub fn dop_estimate<T: Real>(
    fit: &FitResult<T>,
    reference_max: T,
    phi: T,
) -> Result<T, AnalysisError> {
    if fit.model != FitModel::Sin2 {
        return Err(AnalysisError::InvalidParameter(
            "dop_estimate requires a sin2-model fit".into(),
        ));
    }
    if reference_max.is_nan() || reference_max <= T::zero() {
        return Err(AnalysisError::InvalidParameter(format!(
            "reference_max must be positive, got {reference_max}"
        )));
    }
    let s = phi.sin();
    let arg = T::one() - fit.a * s * s / reference_max;
    Ok(arg.max(T::zero()).min(T::one()).sqrt())
}
