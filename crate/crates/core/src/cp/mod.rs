//! Resonant Casimir–Polder coefficient for an atom moving parallel to, and
//! midway between, two dielectric half-spaces in the non-retarded limit.
//!
//! Three routes compute the same physics and are kept independent of each
//! other so they can serve as cross-checks:
//!
//! * [`resonant_coefficient`]: the Doppler-shifted mode integral over
//!   `(k∥, φ)` with the multiple-reflection denominator kept closed;
//! * [`static_oracle`]: the static rate assembled from the imaginary part
//!   of the coincidence-limit Green tensor, never touching Doppler shifts;
//! * [`series_coefficient`]: the expansion in round trips `j` and velocity
//!   powers `ℓ` with numerical frequency derivatives.
//!
//! [`single_plate_coefficient`] is the one-interface special case.

mod resonant;
mod series;
mod static_path;

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::angular::DipoleSpec;
use crate::constants::constants;
use crate::material::{MaterialError, MaterialParams};
use crate::quadrature::QuadratureError;

pub use resonant::{resonant_coefficient, single_plate_coefficient};
pub use series::series_coefficient;
pub use static_path::static_oracle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CpError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error("multiple-reflection series requires |r+ r-| < 1, got {product_norm}")]
    SeriesPrecondition { product_norm: f64 },
    #[error("negative induced rate {gamma:e} 1/s for passive plates")]
    NegativeRate { gamma: f64 },
}

/// One atomic transition m → n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    /// Bare transition frequency (E_m - E_n)/ħ, rad/s. Negative for upward transitions.
    pub omega_mn: f64,
    /// Shifted frequency entering every resonant formula, rad/s.
    pub omega_tilde: f64,
    pub dipole: DipoleSpec,
}

impl Transition {
    pub fn new(omega_mn: f64, dipole: DipoleSpec) -> Self {
        Self {
            omega_mn,
            omega_tilde: omega_mn,
            dipole,
        }
    }

    pub fn with_omega_tilde(mut self, omega_tilde: f64) -> Self {
        self.omega_tilde = omega_tilde;
        self
    }
}

/// Two plates a distance `separation` apart; the atom sits at the midpoint
/// and moves along x with speed `velocity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySetup {
    /// Plate separation L, m.
    pub separation: f64,
    /// Atom speed parallel to the plates, m/s.
    pub velocity: f64,
    pub material_plus: MaterialParams,
    pub material_minus: MaterialParams,
}

impl CavitySetup {
    pub fn new(
        separation: f64,
        velocity: f64,
        material_plus: MaterialParams,
        material_minus: MaterialParams,
    ) -> Result<Self, CpError> {
        let s = Self {
            separation,
            velocity,
            material_plus,
            material_minus,
        };
        s.validate()?;
        Ok(s)
    }

    /// Identical plates on both sides.
    pub fn symmetric(separation: f64, velocity: f64, material: MaterialParams) -> Result<Self, CpError> {
        Self::new(separation, velocity, material, material)
    }

    pub fn validate(&self) -> Result<(), CpError> {
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(CpError::InvalidSetup("plate separation must be finite and > 0".into()));
        }
        if !(self.velocity >= 0.0 && self.velocity.is_finite()) {
            return Err(CpError::InvalidSetup("velocity must be finite and >= 0".into()));
        }
        self.material_plus.validate()?;
        self.material_minus.validate()?;
        Ok(())
    }

    pub fn with_velocity(mut self, velocity: f64) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn swapped(mut self) -> Self {
        std::mem::swap(&mut self.material_plus, &mut self.material_minus);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValidityFlag {
    /// v is not small against L·γ; the Markovian Doppler picture is stretched.
    VelocityConstraint,
    /// L exceeds c/ω̃, outside the non-retarded regime.
    Retardation,
    /// Some quadrature node sampled a Doppler frequency ≤ 0.
    NegativeFrequencyNodes,
    /// Multiple-reflection terms stopped decreasing.
    SeriesDivergent,
}

impl ValidityFlag {
    pub fn token(&self) -> &'static str {
        match self {
            ValidityFlag::VelocityConstraint => "velocity_constraint",
            ValidityFlag::Retardation => "retardation",
            ValidityFlag::NegativeFrequencyNodes => "negative_frequency_nodes",
            ValidityFlag::SeriesDivergent => "series_divergent",
        }
    }
}

impl fmt::Display for ValidityFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

pub type Flags = BTreeSet<ValidityFlag>;

/// `C = Γ/2 + i δω_res`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonantCoefficient {
    /// Complex coefficient, 1/s.
    pub value: Complex64,
    /// Induced transition rate 2·Re C, 1/s.
    pub gamma: f64,
    /// Resonant frequency shift Im C, rad/s.
    pub shift_res: f64,
    pub validity_flags: Flags,
}

impl ResonantCoefficient {
    pub fn new(value: Complex64, validity_flags: Flags) -> Self {
        Self {
            value,
            gamma: 2.0 * value.re,
            shift_res: value.im,
            validity_flags,
        }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Flags::new())
    }
}

/// Prefactor `-i / (8π² ħ ε₀ ℓ³)` for a radial integral in the scaled
/// variable `u = k∥ ℓ`.
fn mode_prefactor(length: f64) -> Complex64 {
    let k = constants();
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Complex64::new(0.0, -1.0 / (8.0 * pi2 * k.hbar * k.eps0 * length.powi(3)))
}

/// Smallest width among plates that actually carry an oscillator.
fn narrowest_width(materials: &[MaterialParams]) -> Option<f64> {
    materials
        .iter()
        .filter(|m| m.omega_p > 0.0)
        .map(|m| m.gamma)
        .min_by(f64::total_cmp)
}

/// Flags shared by every route: `length` is the plate separation (or twice
/// the atom–plate distance for one plate).
fn regime_flags(length: f64, velocity: f64, omega_tilde: f64, materials: &[MaterialParams]) -> Flags {
    let mut flags = Flags::new();
    if let Some(gamma) = narrowest_width(materials) {
        if velocity > 0.0 && velocity >= 0.1 * length * gamma {
            flags.insert(ValidityFlag::VelocityConstraint);
        }
    }
    if length > constants().c / omega_tilde {
        flags.insert(ValidityFlag::Retardation);
    }
    flags
}

fn check_rate(c: &ResonantCoefficient, materials: &[MaterialParams]) -> Result<(), CpError> {
    let passive = materials.iter().all(|m| m.gamma > 0.0);
    if passive && c.gamma < -1e-9 * c.value.norm() {
        return Err(CpError::NegativeRate { gamma: c.gamma });
    }
    Ok(())
}
