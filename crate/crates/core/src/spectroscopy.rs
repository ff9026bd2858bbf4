//! Observable rates and shifts built from the resonant coefficient.

use std::f64::consts::PI;

use crate::angular::DipoleSpec;
use crate::constants::constants;
use crate::cp::{resonant_coefficient, CavitySetup, CpError, Flags, Transition};
use crate::material::surface_resonance;
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Medium-induced transition rate, 1/s.
    pub gamma_induced: f64,
    /// Resonant level shift, rad/s.
    pub shift_res: f64,
    /// Free-space spontaneous emission rate at the same frequency, 1/s.
    pub gamma_free: f64,
    /// `gamma_induced / gamma_free`; zero when the free rate vanishes.
    pub enhancement: f64,
    pub flags: Flags,
    pub setup: CavitySetup,
    pub transition: Transition,
    /// `ω̃ - ω_res` of the {+} plate, when that plate has a surface resonance.
    pub detuning: Option<f64>,
}

/// Einstein rate `ω³|d|² / (3π ε₀ ħ c³)`; zero for ω ≤ 0.
pub fn free_space_rate(omega: f64, d: &DipoleSpec) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let k = constants();
    omega.powi(3) * d.norm_sqr() / (3.0 * PI * k.eps0 * k.hbar * k.c.powi(3))
}

/// `ω̃_mn = ω_mn + δω_m - δω_n`.
pub fn shifted_frequency(omega_mn: f64, shift_m: f64, shift_n: f64) -> f64 {
    omega_mn + shift_m - shift_n
}

pub fn observables(setup: &CavitySetup, tr: &Transition, q: &QuadratureSpec) -> Result<SpectralResult, CpError> {
    let c = resonant_coefficient(setup, tr, q)?;
    let gamma_free = free_space_rate(tr.omega_tilde, &tr.dipole);
    let enhancement = if gamma_free > 0.0 { c.gamma / gamma_free } else { 0.0 };
    Ok(SpectralResult {
        gamma_induced: c.gamma,
        shift_res: c.shift_res,
        gamma_free,
        enhancement,
        flags: c.validity_flags,
        setup: *setup,
        transition: *tr,
        detuning: surface_resonance(&setup.material_plus)
            .ok()
            .map(|w| tr.omega_tilde - w),
    })
}

/// One fixed-point step `ω̃ ← ω_mn + δω_m - δω_n` for a single transition.
///
/// Only the upper level m has a resonant (downward) channel here, so the
/// lower-level shift is zero.
pub fn refine_transition(setup: &CavitySetup, tr: &Transition, q: &QuadratureSpec) -> Result<Transition, CpError> {
    let c = resonant_coefficient(setup, tr, q)?;
    Ok(tr.with_omega_tilde(shifted_frequency(tr.omega_mn, c.shift_res, 0.0)))
}
