//! Type-II sum-frequency phase matching in the XZ plane of a biaxial crystal:
//! collinear mismatch Δk, the phase-matching angle, the angular acceptance
//! δθ½, the perturbing-process weight α, and the wavelength-separation limit
//! Λ1 above which the perturbing process is angularly resolved.
//!
//! Conventions: the two inputs are orthogonally polarized, one ordinary
//! (y-polarized, index n_y) and one extraordinary (XZ plane, index n_e(θ));
//! the generated sum-frequency wave is ordinary. With the shipped KTP data
//! this is the only output polarization class that phase-matches near
//! λ3 ≈ 0.775 µm, so the o + e → o convention is fixed here once.

use thiserror::Error;

use crate::dispersion::{Axis, DispersionError, Material};
use crate::scalar::{sinc, Real, HALF_POWER_SINC_ARG};

#[derive(Debug, Error)]
pub enum PhaseMatchError {
    #[error("invalid process: {0}")]
    InvalidProcess(String),
    #[error("no phase-matching angle in (0.5 deg, 89.5 deg) for lambda1 = {lambda1_nm} nm, lambda2 = {lambda2_nm} nm")]
    NoPhaseMatch { lambda1_nm: f64, lambda2_nm: f64 },
    #[error("criterion not met inside the scan band: {0}")]
    BandExceeded(String),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

/// Which input wavelength takes the ordinary polarization.
///
/// `Desired` is the process the crystal is tuned for (λ1 ordinary, λ2
/// extraordinary); `Perturbing` is the reversed assignment that contaminates
/// the projection as λ2 → λ1. In curve outputs these are the A and B columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfgAssignment {
    Desired,
    Perturbing,
}

/// One collinear type-II SFG configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfgProcess<T: Real> {
    /// Lower-frequency input wavelength (meters).
    pub lambda1: T,
    /// Second input wavelength (meters), λ2 ≥ λ1.
    pub lambda2: T,
    pub assignment: SfgAssignment,
    /// Crystal length (meters).
    pub length: T,
    /// Propagation angle in the XZ plane the crystal is set to (radians).
    pub tune_angle: T,
}

impl<T: Real> SfgProcess<T> {
    /// New desired-assignment process with the tuning angle left at a
    /// placeholder of π/4; call [`pm_angle`] / [`Self::with_tune_angle`] to
    /// set it.
    pub fn new(lambda1: T, lambda2: T, length: T) -> Result<Self, PhaseMatchError> {
        if !(lambda1 > T::zero() && lambda2 >= lambda1) {
            return Err(PhaseMatchError::InvalidProcess(format!(
                "wavelengths must satisfy lambda2 >= lambda1 > 0, got ({}, {})",
                lambda1, lambda2
            )));
        }
        if length.is_nan() || length <= T::zero() {
            return Err(PhaseMatchError::InvalidProcess(format!(
                "crystal length must be positive, got {}",
                length
            )));
        }
        Ok(Self {
            lambda1,
            lambda2,
            assignment: SfgAssignment::Desired,
            length,
            tune_angle: T::FRAC_PI_4(),
        })
    }

    pub fn with_assignment(mut self, assignment: SfgAssignment) -> Self {
        self.assignment = assignment;
        self
    }

    pub fn with_tune_angle(mut self, tune_angle: T) -> Result<Self, PhaseMatchError> {
        if !(tune_angle > T::zero() && tune_angle < T::FRAC_PI_2()) {
            return Err(PhaseMatchError::InvalidProcess(format!(
                "tune angle must lie in (0, pi/2), got {}",
                tune_angle
            )));
        }
        self.tune_angle = tune_angle;
        Ok(self)
    }

    /// Sum-frequency output wavelength, 1/λ3 = 1/λ1 + 1/λ2.
    pub fn sfg_wavelength(&self) -> T {
        self.lambda1 * self.lambda2 / (self.lambda1 + self.lambda2)
    }

    /// Input wavelength on the ordinary (y-polarized) axis.
    pub fn ordinary_wavelength(&self) -> T {
        match self.assignment {
            SfgAssignment::Desired => self.lambda1,
            SfgAssignment::Perturbing => self.lambda2,
        }
    }

    /// Input wavelength on the extraordinary (XZ-plane) axis.
    pub fn extraordinary_wavelength(&self) -> T {
        match self.assignment {
            SfgAssignment::Desired => self.lambda2,
            SfgAssignment::Perturbing => self.lambda1,
        }
    }
}

/// Phase-matching angles of both assignments over a λ2 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PmCurve<T: Real> {
    pub lambda1: T,
    pub length: T,
    pub points: Vec<PmPoint<T>>,
}

/// One λ2 grid point; angles are `None` where no phase match exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmPoint<T: Real> {
    pub lambda2: T,
    pub theta_a: Option<T>,
    pub theta_b: Option<T>,
    /// Angular acceptance δθ½ of the desired process.
    pub fwhm: Option<T>,
}

impl<T: Real> PmPoint<T> {
    pub fn separation(&self) -> Option<T> {
        match (self.theta_a, self.theta_b) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        }
    }
}

fn delta_k_roles<T: Real>(
    material: &Material<T>,
    lambda_o: T,
    lambda_e: T,
    lambda_out: T,
    theta: T,
) -> Result<T, PhaseMatchError> {
    let n_out = material.index(Axis::Y, lambda_out)?;
    let n_o = material.index(Axis::Y, lambda_o)?;
    let n_e = material.index_e_xz(theta, lambda_e)?;
    let two_pi = T::of(2.0) * T::PI();
    Ok(two_pi * (n_out / lambda_out - n_o / lambda_o - n_e / lambda_e))
}

/// Collinear phase mismatch Δk(θ) in rad/m for the given process.
pub fn delta_k<T: Real>(
    material: &Material<T>,
    process: &SfgProcess<T>,
    theta: T,
) -> Result<T, PhaseMatchError> {
    delta_k_roles(
        material,
        process.ordinary_wavelength(),
        process.extraordinary_wavelength(),
        process.sfg_wavelength(),
        theta,
    )
}

/// Conversion efficiency profile η(θ) = sinc²(Δk(θ)·L/2), normalized to 1 at
/// exact phase matching.
pub fn efficiency<T: Real>(
    material: &Material<T>,
    process: &SfgProcess<T>,
    theta: T,
) -> Result<T, PhaseMatchError> {
    let x = delta_k(material, process, theta)? * process.length / T::of(2.0);
    let s = sinc(x);
    Ok(s * s)
}

// Solver resolutions: tuning angles refine to 1e-10 rad, wavelength
// separations to 1e-13 m (1e-4 nm).
const ANGLE_TOL_RAD: f64 = 1e-10;
const SEPARATION_TOL_M: f64 = 1e-13;

// Search interval for the tuning angle.
fn search_interval<T: Real>() -> (T, T) {
    (T::of(0.5_f64.to_radians()), T::of(89.5_f64.to_radians()))
}

fn bisect<T, F>(
    mut lo: T,
    mut hi: T,
    mut f_lo: T,
    mut f: F,
    tol: T,
) -> Result<T, PhaseMatchError>
where
    T: Real,
    F: FnMut(T) -> Result<T, PhaseMatchError>,
{
    debug_assert!(lo < hi);
    let tol = tol.max(T::epsilon() * T::of(8.0));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / T::of(2.0);
        let f_mid = f(mid)?;
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if (f_mid > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::of(2.0))
}

/// Tuning angle at which the process is phase matched (Δk = 0), found by
/// bracketed bisection on (0.5°, 89.5°).
pub fn pm_angle<T: Real>(
    material: &Material<T>,
    process: &SfgProcess<T>,
) -> Result<T, PhaseMatchError> {
    let (lo, hi) = search_interval::<T>();
    let f = |theta: T| delta_k(material, process, theta);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if (f_lo > T::zero()) == (f_hi > T::zero()) {
        return Err(PhaseMatchError::NoPhaseMatch {
            lambda1_nm: process.lambda1.as_f64() * 1e9,
            lambda2_nm: process.lambda2.as_f64() * 1e9,
        });
    }
    bisect(lo, hi, f_lo, f, T::of(ANGLE_TOL_RAD))
}

/// Find where |Δk(θ)|·L/2 reaches the half-power argument on one side of the
/// phase-matching angle. `dir` is +1 or −1.
fn half_power_angle<T: Real>(
    material: &Material<T>,
    process: &SfgProcess<T>,
    theta_pm: T,
    dir: T,
) -> Result<T, PhaseMatchError> {
    let half = T::of(HALF_POWER_SINC_ARG);
    let half_len = process.length / T::of(2.0);
    let g = |theta: T| -> Result<T, PhaseMatchError> {
        Ok(delta_k(material, process, theta)?.abs() * half_len - half)
    };
    let (lo_bound, hi_bound) = search_interval::<T>();
    let limit = if dir > T::zero() { hi_bound } else { lo_bound };
    // exponential march outward to bracket the crossing
    let mut step = T::of(0.005_f64.to_radians());
    let mut prev = theta_pm;
    let mut g_prev = g(prev)?;
    for _ in 0..64 {
        let mut next = prev + dir * step;
        if (dir > T::zero() && next > limit) || (dir < T::zero() && next < limit) {
            next = limit;
        }
        let g_next = g(next)?;
        if g_next >= T::zero() {
            // bisect on the bracket [min, max]
            let (a, b, ga) = if dir > T::zero() {
                (prev, next, g_prev)
            } else {
                (next, prev, g_next)
            };
            return bisect(a, b, ga, g, T::of(ANGLE_TOL_RAD));
        }
        if next == limit {
            return Err(PhaseMatchError::BandExceeded(format!(
                "half-power point not reached before the {} search bound",
                if dir > T::zero() { "upper" } else { "lower" }
            )));
        }
        prev = next;
        g_prev = g_next;
        step = step * T::of(2.0);
    }
    Err(PhaseMatchError::BandExceeded(
        "half-power bracketing did not converge".into(),
    ))
}

/// Angular acceptance δθ½: full width in tuning angle over which
/// η(θ) = sinc²(Δk·L/2) stays above one half.
pub fn angular_fwhm<T: Real>(
    material: &Material<T>,
    process: &SfgProcess<T>,
) -> Result<T, PhaseMatchError> {
    let theta_pm = pm_angle(material, process)?;
    let above = half_power_angle(material, process, theta_pm, T::one())?;
    let below = half_power_angle(material, process, theta_pm, -T::one())?;
    Ok(above - below)
}

/// Relative amplitude weight of the perturbing (reversed-assignment) process
/// with the crystal tuned to the desired process.
///
/// α = sinc(|Δk_perturbing(θ*)|·L/2) on the central lobe and 0 beyond its
/// first null, so that α falls monotonically from 1 at degeneracy to full
/// suppression; side lobes of the conversion profile are treated as
/// suppressed. At λ2 = λ1 the two assignments are the same process and α = 1
/// exactly.
pub fn alpha<T: Real>(
    material: &Material<T>,
    lambda1: T,
    lambda2: T,
    length: T,
) -> Result<T, PhaseMatchError> {
    let desired = SfgProcess::new(lambda1, lambda2, length)?;
    if lambda2 == lambda1 {
        return Ok(T::one());
    }
    let theta_star = pm_angle(material, &desired)?;
    let perturbing = desired.with_assignment(SfgAssignment::Perturbing);
    let x = (delta_k(material, &perturbing, theta_star)? * length / T::of(2.0)).abs();
    if x >= T::PI() {
        Ok(T::zero())
    } else {
        Ok(sinc(x).max(T::zero()))
    }
}

const LIMIT_SCAN_CAP_M: f64 = 40e-9;
const LIMIT_SCAN_STEP_M: f64 = 0.25e-9;

/// March `g` over dλ from ~0 up to the scan cap and bisect its first sign
/// change from negative to positive. Shared by the Λ1 and Λ2 searches.
pub(crate) fn first_crossing<T, F>(
    lambda1: T,
    validity_hi_m: T,
    mut g: F,
    what: &str,
) -> Result<T, PhaseMatchError>
where
    T: Real,
    F: FnMut(T) -> Result<T, PhaseMatchError>,
{
    let cap = T::of(LIMIT_SCAN_CAP_M).min(validity_hi_m - lambda1);
    let step = T::of(LIMIT_SCAN_STEP_M);
    let mut prev = step / T::of(4.0);
    let mut g_prev = g(prev)?;
    if g_prev >= T::zero() {
        return Ok(prev);
    }
    let mut dl = step;
    loop {
        if dl > cap {
            return Err(PhaseMatchError::BandExceeded(format!(
                "{what} not reached for separations up to {:.1} nm",
                cap.as_f64() * 1e9
            )));
        }
        let g_here = g(dl)?;
        if g_here >= T::zero() {
            return bisect(prev, dl, g_prev, g, T::of(SEPARATION_TOL_M));
        }
        prev = dl;
        g_prev = g_here;
        dl = dl + step;
    }
}

/// Λ1: smallest wavelength separation dλ at which the phase-matching angles
/// of the two assignments differ by at least the angular acceptance δθ½ of
/// the desired process.
pub fn lambda1_limit<T: Real>(
    material: &Material<T>,
    lambda1: T,
    length: T,
) -> Result<T, PhaseMatchError> {
    let validity_hi = material.validity_um.1 * T::of(1e-6);
    let g = |dl: T| -> Result<T, PhaseMatchError> {
        let lambda2 = lambda1 + dl;
        let desired = SfgProcess::new(lambda1, lambda2, length)?;
        let theta_a = pm_angle(material, &desired)?;
        let theta_b = pm_angle(
            material,
            &desired.with_assignment(SfgAssignment::Perturbing),
        )?;
        let fwhm = angular_fwhm(material, &desired)?;
        Ok((theta_a - theta_b).abs() - fwhm)
    };
    first_crossing(lambda1, validity_hi, g, "angular separation of the two processes")
}

/// Evaluate both phase-matching angle curves over a λ2 grid. Grid points with
/// no phase match are flagged with `None` rather than failing the curve.
pub fn pm_curve<T: Real>(
    material: &Material<T>,
    lambda1: T,
    lambda2_grid: &[T],
    length: T,
) -> Result<PmCurve<T>, PhaseMatchError> {
    let mut points = Vec::with_capacity(lambda2_grid.len());
    for &lambda2 in lambda2_grid {
        let process = SfgProcess::new(lambda1, lambda2, length)?;
        let solve = |assignment: SfgAssignment| -> Result<Option<T>, PhaseMatchError> {
            match pm_angle(material, &process.with_assignment(assignment)) {
                Ok(theta) => Ok(Some(theta)),
                Err(PhaseMatchError::NoPhaseMatch { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        };
        let theta_a = solve(SfgAssignment::Desired)?;
        let theta_b = solve(SfgAssignment::Perturbing)?;
        let fwhm = if theta_a.is_some() {
            match angular_fwhm(material, &process) {
                Ok(w) => Some(w),
                Err(PhaseMatchError::BandExceeded(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        points.push(PmPoint {
            lambda2,
            theta_a,
            theta_b,
            fwhm,
        });
    }
    Ok(PmCurve {
        lambda1,
        length,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::Material;
    use approx::assert_relative_eq;

    const LAMBDA1: f64 = 1542e-9;
    const LENGTH: f64 = 3e-3;

    fn ktp() -> Material<f64> {
        Material::ktp()
    }

    fn process(lambda2_nm: f64) -> SfgProcess<f64> {
        SfgProcess::new(LAMBDA1, lambda2_nm * 1e-9, LENGTH).unwrap()
    }

    #[test]
    fn process_validation() {
        assert!(SfgProcess::new(1542e-9, 1500e-9, LENGTH).is_err());
        assert!(SfgProcess::new(0.0, 1542e-9, LENGTH).is_err());
        assert!(SfgProcess::new(1542e-9, 1542e-9, -1.0).is_err());
        assert!(process(1542.0).with_tune_angle(0.0).is_err());
        assert!(process(1542.0).with_tune_angle(1.6).is_err());
        let p = process(1560.0);
        assert_relative_eq!(p.sfg_wavelength(), 775.4738878142489e-9, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_pm_angle_exists_with_small_residual() {
        let m = ktp();
        let p = process(1542.0);
        let theta = pm_angle(&m, &p).unwrap();
        assert!(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2);
        // regression against the pinned data set
        assert_relative_eq!(theta.to_degrees(), 53.8895, epsilon = 0.01);
        let residual = (delta_k(&m, &p, theta).unwrap() * LENGTH / 2.0).abs();
        assert!(residual < 1e-6, "residual {residual}");
    }

    #[test]
    fn delta_k_changes_sign_across_pm_angle() {
        let m = ktp();
        let p = process(1560.0);
        let theta = pm_angle(&m, &p).unwrap();
        let before = delta_k(&m, &p, theta - 0.01).unwrap();
        let after = delta_k(&m, &p, theta + 0.01).unwrap();
        assert!(before * after < 0.0);
    }

    #[test]
    fn assignments_coincide_at_degeneracy() {
        let m = ktp();
        let p = process(1542.0);
        let q = p.with_assignment(SfgAssignment::Perturbing);
        for k in 1..20 {
            let theta = k as f64 * std::f64::consts::FRAC_PI_2 / 21.0;
            assert_eq!(
                delta_k(&m, &p, theta).unwrap(),
                delta_k(&m, &q, theta).unwrap()
            );
        }
    }

    #[test]
    fn separation_grows_with_wavelength_split() {
        let m = ktp();
        let mut prev = 0.0;
        for lambda2_nm in [1544.0, 1548.0, 1552.0, 1556.0, 1560.0] {
            let p = process(lambda2_nm);
            let a = pm_angle(&m, &p).unwrap();
            let b = pm_angle(&m, &p.with_assignment(SfgAssignment::Perturbing)).unwrap();
            let sep = (a - b).abs();
            assert!(sep > prev, "separation must grow with dl");
            prev = sep;
        }
    }

    #[test]
    fn no_phase_match_far_outside_band() {
        let m = ktp();
        let p = SfgProcess::new(LAMBDA1, 3.4e-6, LENGTH).unwrap();
        assert!(matches!(
            pm_angle(&m, &p),
            Err(PhaseMatchError::NoPhaseMatch { .. })
        ));
    }

    #[test]
    fn swapping_wavelengths_swaps_assignments() {
        // the role-resolved mismatch depends only on which wavelength is
        // ordinary, so {theta_A, theta_B} is unchanged under a swap
        let m = ktp();
        let p = process(1556.0);
        let theta_a = pm_angle(&m, &p).unwrap();
        let theta_b = pm_angle(&m, &p.with_assignment(SfgAssignment::Perturbing)).unwrap();
        let lam3 = p.sfg_wavelength();
        let direct_a = |theta: f64| delta_k_roles(&m, LAMBDA1, 1556e-9, lam3, theta).unwrap();
        let direct_b = |theta: f64| delta_k_roles(&m, 1556e-9, LAMBDA1, lam3, theta).unwrap();
        assert!(direct_a(theta_a).abs() < 1e-5);
        assert!(direct_b(theta_b).abs() < 1e-5);
    }

    #[test]
    fn angular_fwhm_matches_pinned_value() {
        let m = ktp();
        let w = angular_fwhm(&m, &process(1560.0)).unwrap().to_degrees();
        // a 3 mm KTP crystal accepts a few tenths of a degree
        assert!((0.28..=0.46).contains(&w), "fwhm {w} deg");
        // regression against the pinned data set
        assert_relative_eq!(w, 0.31467, epsilon = 1e-3);
    }

    #[test]
    fn doubling_length_halves_fwhm() {
        let m = ktp();
        let w1 = angular_fwhm(&m, &process(1560.0)).unwrap();
        let w2 = angular_fwhm(
            &m,
            &SfgProcess::new(LAMBDA1, 1560e-9, 2.0 * LENGTH).unwrap(),
        )
        .unwrap();
        assert!(w1 > 0.0 && w2 > 0.0);
        assert!((w1 / w2 - 2.0).abs() < 0.2, "ratio {}", w1 / w2);
    }

    #[test]
    fn efficiency_self_consistency_at_half_power() {
        let m = ktp();
        let p = process(1560.0);
        let theta = pm_angle(&m, &p).unwrap();
        let w = angular_fwhm(&m, &p).unwrap();
        assert_relative_eq!(efficiency(&m, &p, theta).unwrap(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(
            efficiency(&m, &p, theta + w / 2.0).unwrap(),
            0.5,
            epsilon = 1e-3
        );
        assert_relative_eq!(
            efficiency(&m, &p, theta - w / 2.0).unwrap(),
            0.5,
            epsilon = 1e-3
        );
    }

    #[test]
    fn alpha_boundary_values() {
        let m = ktp();
        assert_eq!(alpha(&m, LAMBDA1, LAMBDA1, LENGTH).unwrap(), 1.0);
        let a18 = alpha(&m, LAMBDA1, 1560e-9, LENGTH).unwrap();
        assert!(a18 * a18 < 0.05, "alpha^2 at 18 nm separation: {}", a18 * a18);
    }

    #[test]
    fn alpha_monotone_non_increasing_on_half_nm_grid() {
        let m = ktp();
        let mut prev = 1.0_f64 + 1e-15;
        for k in 0..=36 {
            let lambda2 = 1542e-9 + k as f64 * 0.5e-9;
            let a = alpha(&m, LAMBDA1, lambda2, LENGTH).unwrap();
            assert!((0.0..=1.0).contains(&a));
            assert!(a <= prev, "alpha must not increase, got {a} after {prev}");
            prev = a;
        }
        assert!(prev < 0.2, "alpha must decay toward 0 across the band");
    }

    #[test]
    fn alpha_spot_values_regression() {
        let m = ktp();
        let a8 = alpha(&m, LAMBDA1, 1550e-9, LENGTH).unwrap();
        assert_relative_eq!(a8 * a8, 0.3914, epsilon = 5e-3);
        let a4 = alpha(&m, LAMBDA1, 1546e-9, LENGTH).unwrap();
        assert_relative_eq!(a4 * a4, 0.8037, epsilon = 5e-3);
    }

    #[test]
    fn lambda1_limit_in_band_and_monotone_in_length() {
        let m = ktp();
        let l1 = lambda1_limit(&m, LAMBDA1, LENGTH).unwrap() * 1e9;
        assert!((13.0..=23.0).contains(&l1), "Lambda1 {l1} nm");
        assert_relative_eq!(l1, 14.144, epsilon = 0.05);
        let l1_long = lambda1_limit(&m, LAMBDA1, 2.0 * LENGTH).unwrap() * 1e9;
        assert!(l1_long < l1, "longer crystal must give smaller Lambda1");
        assert!(l1_long > 0.0);
    }

    #[test]
    fn band_exceeded_reported_for_degenerate_searches() {
        let m = ktp();
        // a micrometer-scale crystal accepts the whole angular interval, so
        // no half-power point exists inside it
        let p = SfgProcess::new(LAMBDA1, 1560e-9, 1e-6).unwrap();
        assert!(matches!(
            angular_fwhm(&m, &p),
            Err(PhaseMatchError::BandExceeded(_))
        ));
        // with that acceptance the process separation never wins either
        assert!(matches!(
            lambda1_limit(&m, LAMBDA1, 1e-6),
            Err(PhaseMatchError::BandExceeded(_))
        ));
    }

    #[test]
    fn pm_curve_shapes() {
        let m = ktp();
        let grid: Vec<f64> = vec![1542e-9, 1550e-9, 1560e-9];
        let curve = pm_curve(&m, LAMBDA1, &grid, LENGTH).unwrap();
        assert_eq!(curve.points.len(), 3);
        let p0 = &curve.points[0];
        assert_relative_eq!(p0.theta_a.unwrap(), p0.theta_b.unwrap(), epsilon = 1e-9);
        let p_1550 = &curve.points[1];
        assert!(p_1550.separation().unwrap() < p_1550.fwhm.unwrap());
        let p_1560 = &curve.points[2];
        assert!(p_1560.separation().unwrap() >= p_1560.fwhm.unwrap());

        let single = pm_curve(&m, LAMBDA1, &[1554e-9], LENGTH).unwrap();
        assert_eq!(single.points.len(), 1);

        let flagged = pm_curve(&m, LAMBDA1, &[3.4e-6], LENGTH).unwrap();
        assert!(flagged.points[0].theta_a.is_none());
        assert!(flagged.points[0].separation().is_none());
    }
}
