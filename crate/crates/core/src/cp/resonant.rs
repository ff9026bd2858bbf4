use std::cell::Cell;

use num_complex::Complex64;

use super::{check_rate, mode_prefactor, regime_flags, CavitySetup, CpError, ResonantCoefficient, Transition, ValidityFlag};
use crate::angular::{contract, matrix_a, matrix_b, DipoleSpec};
use crate::material::{reflection_p, MaterialParams};
use crate::quadrature::{try_integrate_periodic, try_integrate_semi_infinite, QuadratureSpec};

/// Doppler frequency seen by a mode with scaled wavenumber `u` at azimuth
/// `phi`: `ω̃ + v k∥ cos φ` with `k∥ = u / length`.
fn doppler(omega_tilde: f64, speed_over_length: f64, u: f64, phi: f64) -> f64 {
    omega_tilde + speed_over_length * u * phi.cos()
}

/// Resonant coefficient for the two-plate cavity with the atom at midpoint:
///
/// ```text
/// C = -i θ(ω̃)/(8π²ħε₀) ∫dφ ∫dk k² e^{-Lk} / (1 - r⁺r⁻ e^{-2Lk})
///       d·[2A e^{-Lk} r⁺r⁻ + B r⁺ + Bᵀ r⁻]·d
/// ```
///
/// with every reflection coefficient taken at the Doppler frequency
/// `ω̃ + v k cos φ`.
pub fn resonant_coefficient(
    setup: &CavitySetup,
    tr: &Transition,
    q: &QuadratureSpec,
) -> Result<ResonantCoefficient, CpError> {
    setup.validate()?;
    let omega = tr.omega_tilde;
    if !omega.is_finite() {
        return Err(CpError::InvalidSetup("transition frequency must be finite".into()));
    }
    if omega <= 0.0 {
        return Ok(ResonantCoefficient::zero());
    }
    let length = setup.separation;
    let rate = setup.velocity / length;
    let (plus, minus) = (&setup.material_plus, &setup.material_minus);
    let d = tr.dipole;
    let negative = Cell::new(false);

    let azimuthal = |u: f64, phi: f64| -> Result<Complex64, CpError> {
        let w = doppler(omega, rate, u, phi);
        if w <= 0.0 {
            negative.set(true);
        }
        let rp = reflection_p(plus, w)?;
        let rm = reflection_p(minus, w)?;
        let decay = (-u).exp();
        let product = rp * rm;
        let b = matrix_b(phi);
        let bracket = contract(&d, &matrix_a(phi)) * (2.0 * decay) * product
            + contract(&d, &b) * rp
            + contract(&d, &b.transpose()) * rm;
        Ok(bracket * (u * u * decay) / (1.0 - product * decay * decay))
    };
    let radial = |u: f64| -> Result<Complex64, CpError> {
        Ok(try_integrate_periodic(|phi| azimuthal(u, phi), q)?.value)
    };
    let integral = try_integrate_semi_infinite(radial, q)?;

    let mut flags = regime_flags(length, setup.velocity, omega, &[*plus, *minus]);
    if negative.get() {
        flags.insert(ValidityFlag::NegativeFrequencyNodes);
    }
    let c = ResonantCoefficient::new(mode_prefactor(length) * integral.value, flags);
    check_rate(&c, &[*plus, *minus])?;
    Ok(c)
}

/// Resonant coefficient for a single plate at distance `z`:
///
/// ```text
/// C = -i θ(ω̃)/(8π²ħε₀) ∫dφ ∫dk k² e^{-2zk} r_p(ω̃ + v k cos φ) d·B·d
/// ```
pub fn single_plate_coefficient(
    z: f64,
    material: &MaterialParams,
    tr: &Transition,
    velocity: f64,
    q: &QuadratureSpec,
) -> Result<ResonantCoefficient, CpError> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(CpError::InvalidSetup("atom-plate distance must be finite and > 0".into()));
    }
    if !(velocity >= 0.0 && velocity.is_finite()) {
        return Err(CpError::InvalidSetup("velocity must be finite and >= 0".into()));
    }
    material.validate()?;
    let omega = tr.omega_tilde;
    if !omega.is_finite() {
        return Err(CpError::InvalidSetup("transition frequency must be finite".into()));
    }
    if omega <= 0.0 {
        return Ok(ResonantCoefficient::zero());
    }
    // scaled variable u = 2 z k∥
    let length = 2.0 * z;
    let rate = velocity / length;
    let d: DipoleSpec = tr.dipole;
    let negative = Cell::new(false);

    let azimuthal = |u: f64, phi: f64| -> Result<Complex64, CpError> {
        let w = doppler(omega, rate, u, phi);
        if w <= 0.0 {
            negative.set(true);
        }
        let r = reflection_p(material, w)?;
        Ok(contract(&d, &matrix_b(phi)) * r * (u * u * (-u).exp()))
    };
    let radial = |u: f64| -> Result<Complex64, CpError> {
        Ok(try_integrate_periodic(|phi| azimuthal(u, phi), q)?.value)
    };
    let integral = try_integrate_semi_infinite(radial, q)?;

    let mut flags = regime_flags(length, velocity, omega, std::slice::from_ref(material));
    if negative.get() {
        flags.insert(ValidityFlag::NegativeFrequencyNodes);
    }
    let c = ResonantCoefficient::new(mode_prefactor(length) * integral.value, flags);
    check_rate(&c, std::slice::from_ref(material))?;
    Ok(c)
}
