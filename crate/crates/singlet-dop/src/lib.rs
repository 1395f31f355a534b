//! Numerical model of a degree-of-polarization meter that projects a
//! two-wavelength beam onto the two-photon polarization singlet state via
//! sum-frequency generation in two crossed type-II nonlinear crystals.
//!
//! The crate covers the full instrument chain:
//!
//! - [`polarization`]: Jones-vector algebra, the bichromatic DOP formula and
//!   the ideal singlet-projection overlap used as an oracle for the chain.
//! - [`dispersion`]: Sellmeier indices for biaxial crystals (KTP built in),
//!   the XZ-plane extraordinary index and the walk-off angle.
//! - [`phasematch`]: type-II SFG phase matching, angular acceptance δθ½, the
//!   perturbing-process weight α and the separation limit Λ1.
//! - [`projection`]: the two-crystal instrument with misalignments, partial
//!   coherence and Poisson photon counting.
//! - [`analysis`]: visibility, count-rate model fits, misalignment
//!   sensitivity curves, the Λ2 limit, regime classification and DOP
//!   extraction.
//!
//! All physics is generic over the scalar type through [`scalar::Real`];
//! `f64` (the `*64` aliases below) is the precision the solver tolerances are
//! validated at.

pub mod analysis;
pub mod dispersion;
pub mod phasematch;
pub mod polarization;
pub mod projection;
pub mod scalar;

pub use scalar::Real;

/// `f64` concrete aliases for the main domain types.
pub type JonesVector64 = polarization::JonesVector<f64>;
pub type LinearPolPair64 = polarization::LinearPolPair<f64>;
pub type Material64 = dispersion::Material<f64>;
pub type MaterialRegistry64 = dispersion::MaterialRegistry<f64>;
pub type SfgProcess64 = phasematch::SfgProcess<f64>;
pub type PmCurve64 = phasematch::PmCurve<f64>;
pub type SourceConfig64 = projection::SourceConfig<f64>;
pub type InstrumentConfig64 = projection::InstrumentConfig<f64>;
pub type FieldPair64 = projection::FieldPair<f64>;
pub type SweepResult64 = projection::SweepResult<f64>;
pub type FitResult64 = analysis::FitResult<f64>;
pub type RegimeReport64 = analysis::RegimeReport<f64>;

/// `f32` aliases; these compile and run but the phase-matching solver
/// tolerances are tighter than `f32` resolution.
pub type JonesVector32 = polarization::JonesVector<f32>;
pub type LinearPolPair32 = polarization::LinearPolPair<f32>;
pub type Material32 = dispersion::Material<f32>;
pub type SourceConfig32 = projection::SourceConfig<f32>;
pub type InstrumentConfig32 = projection::InstrumentConfig<f32>;
