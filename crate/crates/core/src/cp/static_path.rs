//! Static rate from the imaginary part of the equal-point Green tensor.
//!
//! `Γ = 2 (μ₀/ħ) ω̃² d·Im G(r_A, r_A, ω̃)·d`, with the planar Green tensor
//! written as `(-i/16π²) {X(ω) - X(-ω*)}`. The azimuthal integral is done in
//! closed form and the reflection coefficients at `-ω*` come straight from
//! the complex permittivity, so nothing here shares code with the Doppler
//! integrand.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{CavitySetup, CpError, Transition};
use crate::angular::{contract_matrix, DipoleSpec, Matrix3};
use crate::constants::constants;
use crate::material::{permittivity, MaterialParams};
use crate::quadrature::{try_integrate_semi_infinite, QuadratureSpec};

fn diag(a: f64, b: f64, c: f64) -> Matrix3 {
    let z = Complex64::new(0.0, 0.0);
    [
        [Complex64::new(a, 0.0), z, z],
        [z, Complex64::new(b, 0.0), z],
        [z, z, Complex64::new(c, 0.0)],
    ]
}

/// `∫₀^{2π} A(φ) dφ`; off-diagonal and odd entries average out.
fn averaged_a() -> Matrix3 {
    diag(-PI, -PI, 2.0 * PI)
}

/// `∫₀^{2π} B(φ) dφ`, which also equals the average of `Bᵀ`.
fn averaged_b() -> Matrix3 {
    diag(PI, PI, 2.0 * PI)
}

fn reflection_complex(m: &MaterialParams, omega: Complex64) -> Result<Complex64, CpError> {
    let eps = permittivity(m, omega)?;
    Ok((eps - 1.0) / (eps + 1.0))
}

/// Bracketed mode sum of the Green tensor at complex frequency `omega`,
/// contracted with the dipole.
fn bracket(
    setup: &CavitySetup,
    d: &DipoleSpec,
    omega: Complex64,
    q: &QuadratureSpec,
) -> Result<Complex64, CpError> {
    let c = constants().c;
    let rp = reflection_complex(&setup.material_plus, omega)?;
    let rm = reflection_complex(&setup.material_minus, omega)?;
    let k2 = omega * omega / (c * c);
    let product = rp * rm;
    let b_part = contract_matrix(d, &averaged_b()) * rm + contract_matrix(d, &averaged_b()) * rp;
    let a_part = contract_matrix(d, &averaged_a()) * (2.0 * product);
    let l = setup.separation;
    // k∥ = u / L
    let radial = |u: f64| -> Result<Complex64, CpError> {
        let e1 = (-u).exp();
        let e2 = e1 * e1;
        let den = 1.0 - product * e2;
        Ok((b_part * e1 + a_part * e2) * (u * u) / den)
    };
    let integral = try_integrate_semi_infinite(radial, q)?.value;
    Ok(integral / (k2 * l.powi(3)))
}

/// Static induced rate Γ (1/s) for an atom at rest at the cavity midpoint.
/// The setup's velocity is ignored.
pub fn static_oracle(setup: &CavitySetup, tr: &Transition, q: &QuadratureSpec) -> Result<f64, CpError> {
    setup.validate()?;
    let omega = tr.omega_tilde;
    if omega <= 0.0 {
        return Ok(0.0);
    }
    let k = constants();
    let w = Complex64::new(omega, 0.0);
    let green = (bracket(setup, &tr.dipole, w, q)? - bracket(setup, &tr.dipole, -w.conj(), q)?)
        * Complex64::new(0.0, -1.0 / (16.0 * PI * PI));
    debug_assert!(green.im.abs() <= 1e-9 * green.norm() + f64::MIN_POSITIVE);
    Ok(2.0 * k.mu0 / k.hbar * omega * omega * green.re)
}
