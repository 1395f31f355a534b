//! Jones-vector algebra, the bichromatic degree-of-polarization formula, and
//! the ideal singlet-projection overlap.
//!
//! Phase convention is e^{−iωt}; only relative phases matter anywhere in this
//! crate. Polarization angles are reported in (−π/2, π/2] because a linear
//! polarization is a ray, not a vector.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolarizationError {
    #[error("amplitude must be non-negative, got {0}")]
    NegativeAmplitude(f64),
    #[error("field components must be finite")]
    NonFinite,
    #[error("undefined input: both intensities are zero")]
    ZeroIntensity,
    #[error("intensities must be non-negative, got ({0}, {1})")]
    NegativeIntensity(f64, f64),
}

/// Complex transverse field amplitude pair in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector<T: Real> {
    pub ex: Complex<T>,
    pub ey: Complex<T>,
}

impl<T: Real> JonesVector<T> {
    pub fn new(ex: Complex<T>, ey: Complex<T>) -> Result<Self, PolarizationError> {
        let finite =
            ex.re.is_finite() && ex.im.is_finite() && ey.re.is_finite() && ey.im.is_finite();
        if !finite {
            return Err(PolarizationError::NonFinite);
        }
        Ok(Self { ex, ey })
    }

    /// Linear state at `angle` from the lab x axis with the given amplitude.
    pub fn from_linear(angle: T, amplitude: T) -> Result<Self, PolarizationError> {
        if amplitude < T::zero() {
            return Err(PolarizationError::NegativeAmplitude(amplitude.as_f64()));
        }
        Ok(Self {
            ex: Complex::new(amplitude * angle.cos(), T::zero()),
            ey: Complex::new(amplitude * angle.sin(), T::zero()),
        })
    }

    /// Rotate the field by `angle` in the transverse plane. Intensity is
    /// preserved.
    pub fn rotate(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let (s, c) = (Complex::new(s, T::zero()), Complex::new(c, T::zero()));
        Self {
            ex: c * self.ex - s * self.ey,
            ey: s * self.ex + c * self.ey,
        }
    }

    /// |ex|² + |ey|².
    pub fn intensity(&self) -> T {
        self.ex.norm_sqr() + self.ey.norm_sqr()
    }
}

/// Projection weight of the pair (a, b) onto the antisymmetric two-photon
/// polarization singlet: |a_x·b_y − a_y·b_x|² / 2.
///
/// Invariant under simultaneous rotation of both states; zero iff the states
/// are parallel as rays.
pub fn singlet_overlap<T: Real>(a: &JonesVector<T>, b: &JonesVector<T>) -> T {
    let det = a.ex * b.ey - a.ey * b.ex;
    det.norm_sqr() / T::of(2.0)
}

/// Degree of polarization of a two-wavelength source with intensities `i1`,
/// `i2` and relative linear polarization angle `phi`:
///
/// DOP = √((I1+I2)² − 4·I1·I2·sin²φ) / (I1+I2)
pub fn dop_bichromatic<T: Real>(i1: T, i2: T, phi: T) -> Result<T, PolarizationError> {
    if i1 < T::zero() || i2 < T::zero() {
        return Err(PolarizationError::NegativeIntensity(
            i1.as_f64(),
            i2.as_f64(),
        ));
    }
    let total = i1 + i2;
    if total <= T::zero() {
        return Err(PolarizationError::ZeroIntensity);
    }
    let s = phi.sin();
    let arg = total * total - T::of(4.0) * i1 * i2 * s * s;
    // arg ≥ 0 analytically; guard the rounding of (i1+i2)² − 4 i1 i2
    Ok(arg.max(T::zero()).sqrt() / total)
}

/// Normalize a polarization-axis angle into (−π/2, π/2].
pub fn normalize_axis_angle<T: Real>(angle: T) -> T {
    let pi = T::PI();
    let mut a = angle % pi;
    if a > pi / T::of(2.0) {
        a = a - pi;
    } else if a <= -pi / T::of(2.0) {
        a = a + pi;
    }
    a
}

/// Two linearly polarized waves: wave 1 at `theta` from the lab x axis with
/// amplitude `e1`, wave 2 at `theta + phi` with amplitude `e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPolPair<T: Real> {
    pub theta: T,
    pub phi: T,
    pub e1: T,
    pub e2: T,
}

impl<T: Real> LinearPolPair<T> {
    pub fn new(theta: T, phi: T, e1: T, e2: T) -> Result<Self, PolarizationError> {
        if e1 < T::zero() {
            return Err(PolarizationError::NegativeAmplitude(e1.as_f64()));
        }
        if e2 < T::zero() {
            return Err(PolarizationError::NegativeAmplitude(e2.as_f64()));
        }
        Ok(Self { theta, phi, e1, e2 })
    }

    /// The two waves as Jones vectors.
    pub fn jones_pair(&self) -> (JonesVector<T>, JonesVector<T>) {
        let a = JonesVector::from_linear(self.theta, self.e1).expect("validated amplitude");
        let b =
            JonesVector::from_linear(self.theta + self.phi, self.e2).expect("validated amplitude");
        (a, b)
    }

    /// Angles folded into (−π/2, π/2] for reporting.
    pub fn reporting_angles(&self) -> (T, T) {
        (
            normalize_axis_angle(self.theta),
            normalize_axis_angle(self.phi),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn jones(angle: f64, amp: f64) -> JonesVector<f64> {
        JonesVector::from_linear(angle, amp).unwrap()
    }

    /// Test oracle: DOP of an incoherent mixture of two pure linear states via
    /// Stokes-vector addition, DOP = |S⃗|/S0. Independent of the closed form
    /// under test.
    fn stokes_dop(i1: f64, i2: f64, theta: f64, phi: f64) -> f64 {
        let s_a = [i1, i1 * (2.0 * theta).cos(), i1 * (2.0 * theta).sin(), 0.0];
        let t2 = theta + phi;
        let s_b = [i2, i2 * (2.0 * t2).cos(), i2 * (2.0 * t2).sin(), 0.0];
        let s: Vec<f64> = s_a.iter().zip(&s_b).map(|(a, b)| a + b).collect();
        (s[1] * s[1] + s[2] * s[2] + s[3] * s[3]).sqrt() / s[0]
    }

    #[test]
    fn from_linear_examples() {
        let h = jones(0.0, 1.0);
        assert_eq!((h.ex.re, h.ey.re), (1.0, 0.0));
        let v = jones(FRAC_PI_2, 1.0);
        assert!(v.ex.re.abs() < 1e-16 && (v.ey.re - 1.0).abs() < 1e-15);
        let d = jones(FRAC_PI_4, 2.0);
        assert_relative_eq!(d.ex.re, 2.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(d.ey.re, 2.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(d.intensity(), 4.0, max_relative = 1e-15);
        assert!(matches!(
            JonesVector::<f64>::from_linear(0.1, -1.0),
            Err(PolarizationError::NegativeAmplitude(_))
        ));
    }

    #[test]
    fn rotate_examples() {
        let h = jones(0.0, 1.0);
        let r = h.rotate(FRAC_PI_2);
        assert!(r.ex.re.abs() < 1e-16 && (r.ey.re - 1.0).abs() < 1e-15);
        let v = JonesVector::new(Complex::new(0.3, 0.1), Complex::new(-0.2, 0.9)).unwrap();
        let id = v.rotate(0.0);
        assert_eq!(v, id);
        let d = h.rotate(FRAC_PI_4);
        assert_relative_eq!(d.ex.re, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(d.ey.re, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
    }

    #[test]
    fn dop_examples() {
        assert!(dop_bichromatic(1.0, 1.0, FRAC_PI_2).unwrap() < 1e-15);
        assert_eq!(dop_bichromatic(1.0, 0.0, 0.77).unwrap(), 1.0);
        assert_eq!(dop_bichromatic(0.0, 2.0, 0.77).unwrap(), 1.0);
        assert_eq!(dop_bichromatic(3.0, 1.0, 0.0).unwrap(), 1.0);
        // equal powers at 45°: oracle = Stokes addition of the two pure states
        let oracle = stokes_dop(1.0, 1.0, 0.3, FRAC_PI_4);
        assert_relative_eq!(oracle, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(
            dop_bichromatic(1.0, 1.0, FRAC_PI_4).unwrap(),
            oracle,
            max_relative = 1e-12
        );
        assert!(matches!(
            dop_bichromatic(0.0, 0.0, 1.0),
            Err(PolarizationError::ZeroIntensity)
        ));
        assert!(dop_bichromatic(-1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn dop_matches_stokes_oracle_on_grid() {
        for i in 0..12 {
            for j in 0..12 {
                for k in 0..12 {
                    let i1 = 0.05 + i as f64 * 0.25;
                    let i2 = 0.05 + j as f64 * 0.25;
                    let phi = -PI / 2.0 + k as f64 * (PI / 11.0);
                    let got = dop_bichromatic(i1, i2, phi).unwrap();
                    let want = stokes_dop(i1, i2, 0.4321, phi);
                    assert_relative_eq!(got, want, max_relative = 1e-12, epsilon = 1e-12);
                    assert!((0.0..=1.0 + 1e-12).contains(&got));
                }
            }
        }
    }

    #[test]
    fn singlet_overlap_examples() {
        let h = jones(0.0, 1.0);
        let v = jones(FRAC_PI_2, 1.0);
        assert_relative_eq!(singlet_overlap(&h, &v), 0.5, max_relative = 1e-14);
        let a = jones(0.7, 1.3);
        assert_eq!(singlet_overlap(&a, &a), 0.0);
        let p = jones(20.0_f64.to_radians(), 1.0);
        let q = jones(50.0_f64.to_radians(), 1.0);
        // direct determinant evaluation: sin²(30°)/2
        assert_relative_eq!(singlet_overlap(&p, &q), 0.125, max_relative = 1e-12);
    }

    #[test]
    fn overlap_links_to_dop() {
        // singlet overlap = (1 − DOP²)·(I1+I2)²/8 for linear pairs
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..9 {
                    let e1 = 0.2 + i as f64 * 0.3;
                    let e2 = 0.2 + j as f64 * 0.3;
                    let phi = k as f64 * (PI / 8.0) - PI / 2.0;
                    let pair = LinearPolPair::new(0.23, phi, e1, e2).unwrap();
                    let (a, b) = pair.jones_pair();
                    let (i1, i2) = (e1 * e1, e2 * e2);
                    let dop = dop_bichromatic(i1, i2, phi).unwrap();
                    let lhs = singlet_overlap(&a, &b);
                    let rhs = (1.0 - dop * dop) * (i1 + i2) * (i1 + i2) / 8.0;
                    assert_relative_eq!(lhs, rhs, max_relative = 1e-10, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn elliptical_overlap_depends_only_on_ellipticity_difference() {
        // states (cos χ, i sin χ) under a common azimuth rotation
        let mk = |chi: f64, azimuth: f64| {
            JonesVector::new(
                Complex::new(chi.cos(), 0.0),
                Complex::new(0.0, chi.sin()),
            )
            .unwrap()
            .rotate(azimuth)
        };
        for &az in &[0.0, 0.3, 1.1] {
            for i in 0..10 {
                for j in 0..10 {
                    let c1 = -0.7 + i as f64 * 0.15;
                    let c2 = -0.7 + j as f64 * 0.15;
                    let got = singlet_overlap(&mk(c1, az), &mk(c2, az));
                    let want = (c1 - c2).sin().powi(2) / 2.0;
                    assert_relative_eq!(got, want, max_relative = 1e-10, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn normalize_axis_angle_range() {
        assert_relative_eq!(normalize_axis_angle(PI), 0.0, epsilon = 1e-15);
        assert_relative_eq!(normalize_axis_angle(FRAC_PI_2), FRAC_PI_2);
        assert_relative_eq!(normalize_axis_angle(-FRAC_PI_2), FRAC_PI_2);
        assert_relative_eq!(normalize_axis_angle(0.6 + PI), 0.6, epsilon = 1e-12);
        let pair = LinearPolPair::new(2.0, -2.0, 1.0, 1.0).unwrap();
        let (t, p) = pair.reporting_angles();
        assert_relative_eq!(t, 2.0 - PI, epsilon = 1e-12);
        assert_relative_eq!(p, PI - 2.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn rotational_invariance(theta in -3.0f64..3.0, phi in -3.0f64..3.0, rho in -3.0f64..3.0) {
            let a = jones(theta, 1.0);
            let b = jones(theta + phi, 1.0);
            let base = singlet_overlap(&a, &b);
            let rotated = singlet_overlap(&a.rotate(rho), &b.rotate(rho));
            prop_assert!((base - rotated).abs() <= 1e-12 * base.max(1.0));
        }

        #[test]
        fn linear_pair_overlap_closed_form(
            theta in -3.0f64..3.0,
            phi in -3.0f64..3.0,
            e1 in 0.0f64..3.0,
            e2 in 0.0f64..3.0,
        ) {
            let pair = LinearPolPair::new(theta, phi, e1, e2).unwrap();
            let (a, b) = pair.jones_pair();
            let want = (e1 * e2 * phi.sin()).powi(2) / 2.0;
            prop_assert!((singlet_overlap(&a, &b) - want).abs() <= 1e-12 * want.max(1.0));
        }

        #[test]
        fn dop_equal_intensity_identity(i in 0.1f64..10.0, phi in -3.0f64..3.0) {
            let dop = dop_bichromatic(i, i, phi).unwrap();
            let lhs = 1.0 - dop * dop;
            prop_assert!((lhs - phi.sin().powi(2)).abs() < 1e-12);
        }

        #[test]
        fn rotation_preserves_intensity(theta in -3.0f64..3.0, amp in 0.0f64..5.0, rho in -7.0f64..7.0) {
            let v = jones(theta, amp);
            prop_assert!((v.rotate(rho).intensity() - v.intensity()).abs() < 1e-12 * v.intensity().max(1.0));
        }
    }
}
