//! Single-oscillator Drude–Lorentz dielectric and its non-retarded
//! p-polarised reflection coefficient.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("invalid material parameter: {0}")]
    InvalidParameter(String),
    #[error("permittivity evaluated too close to its pole at omega = {omega}")]
    PermittivityPole { omega: Complex64 },
    #[error("reflection coefficient evaluated at the surface-mode pole, omega = {omega:e} rad/s")]
    ReflectionPole { omega: f64 },
    #[error("material has no surface resonance (omega_P = 0)")]
    NoResonance,
}

/// Drude–Lorentz oscillator parameters for one plate.
///
/// `eps(w) = eta * (1 - omega_p^2 / (w^2 - omega_t^2 + i*gamma*w))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Dimensionless background factor.
    pub eta: f64,
    /// Absorption (transverse) frequency, rad/s.
    pub omega_t: f64,
    /// Plasma frequency, rad/s.
    pub omega_p: f64,
    /// Resonance width, rad/s.
    pub gamma: f64,
}

impl MaterialParams {
    pub fn new(eta: f64, omega_t: f64, omega_p: f64, gamma: f64) -> Result<Self, MaterialError> {
        let m = Self {
            eta,
            omega_t,
            omega_p,
            gamma,
        };
        m.validate()?;
        Ok(m)
    }

    /// Sapphire as a single resonance at 1.08e14 rad/s.
    pub fn sapphire() -> Self {
        let omega_t = 1.08e14;
        Self {
            eta: 2.71,
            omega_t,
            omega_p: 1.2 * omega_t,
            gamma: 0.02 * omega_t,
        }
    }

    /// An empty half-space (eps = 1, r_p = 0). The oscillator frequencies
    /// are placeholders and never enter a result.
    pub fn vacuum() -> Self {
        Self {
            eta: 1.0,
            omega_t: 1.0e14,
            omega_p: 0.0,
            gamma: 1.0e12,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let bad = |s: &str| Err(MaterialError::InvalidParameter(s.to_string()));
        if !(self.eta >= 1.0 && self.eta.is_finite()) {
            return bad("eta must be finite and >= 1");
        }
        if !(self.omega_t > 0.0 && self.omega_t.is_finite()) {
            return bad("omega_T must be finite and > 0");
        }
        if !(self.omega_p >= 0.0 && self.omega_p.is_finite()) {
            return bad("omega_P must be finite and >= 0");
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be finite and > 0");
        }
        Ok(())
    }

    /// True when the oscillator is switched off and the plate is optically empty.
    pub fn is_vacuum(&self) -> bool {
        self.omega_p == 0.0 && self.eta == 1.0
    }
}

/// Relative permittivity at a (possibly complex) angular frequency.
pub fn permittivity(m: &MaterialParams, omega: Complex64) -> Result<Complex64, MaterialError> {
    if m.omega_p == 0.0 {
        return Ok(Complex64::new(m.eta, 0.0));
    }
    let denom = omega * omega - m.omega_t * m.omega_t + Complex64::i() * m.gamma * omega;
    if denom.norm() < 1e-12 * m.omega_t * m.omega_t {
        return Err(MaterialError::PermittivityPole { omega });
    }
    Ok(m.eta * (1.0 - m.omega_p * m.omega_p / denom))
}

/// Non-retarded p-polarised reflection coefficient `(eps - 1)/(eps + 1)` at
/// real frequency. Negative frequencies use `r(-w) = conj(r(w))`.
pub fn reflection_p(m: &MaterialParams, omega: f64) -> Result<Complex64, MaterialError> {
    if omega < 0.0 {
        return reflection_p(m, -omega).map(|r| r.conj());
    }
    let eps = permittivity(m, Complex64::new(omega, 0.0))?;
    let plus = eps + 1.0;
    if plus.norm() < 1e-12 {
        return Err(MaterialError::ReflectionPole { omega });
    }
    let r = (eps - 1.0) / plus;
    if omega == 0.0 {
        return Ok(Complex64::new(r.re, 0.0));
    }
    Ok(r)
}

/// Surface-mode frequency where Re eps = -1 in the lossless limit.
pub fn surface_resonance(m: &MaterialParams) -> Result<f64, MaterialError> {
    if m.omega_p <= 0.0 {
        return Err(MaterialError::NoResonance);
    }
    let wt2 = m.omega_t * m.omega_t;
    Ok((wt2 + m.eta * m.omega_p * m.omega_p / (m.eta + 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn sapphire_permittivity_at_omega_t() {
        let m = MaterialParams::sapphire();
        let eps = permittivity(&m, Complex64::new(m.omega_t, 0.0)).unwrap();
        // eta * (1 + i*omega_p^2/(gamma*omega_t)) = 2.71 * (1 + 72i)
        assert!(rel(eps, Complex64::new(2.71, 2.71 * 72.0)) < 1e-13, "{eps}");
    }

    #[test]
    fn sapphire_static_permittivity() {
        let m = MaterialParams::sapphire();
        let eps = permittivity(&m, Complex64::new(0.0, 0.0)).unwrap();
        assert!((eps.re - 6.6124).abs() < 1e-12);
        assert_eq!(eps.im, 0.0);
    }

    #[test]
    fn switched_off_oscillator_is_background() {
        let m = MaterialParams::new(3.3, 1e14, 0.0, 1e12).unwrap();
        for w in [0.0, 1e14, -7e13] {
            assert_eq!(permittivity(&m, Complex64::new(w, 0.0)).unwrap(), Complex64::new(3.3, 0.0));
        }
        // even exactly on what would be the pole
        let pole = Complex64::new(1e14, 0.0);
        assert!(permittivity(&m, pole).is_ok());
    }

    #[test]
    fn constant_dielectric_reflection() {
        let m = MaterialParams::new(3.0, 1e14, 0.0, 1e12).unwrap();
        for w in [1e10, 2e14, -3e14] {
            assert_eq!(reflection_p(&m, w).unwrap(), Complex64::new(0.5, 0.0));
        }
        let vac = MaterialParams::vacuum();
        assert_eq!(reflection_p(&vac, 1.5e14).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_frequency_reflection_is_real() {
        let m = MaterialParams::sapphire();
        let r = reflection_p(&m, 0.0).unwrap();
        assert_eq!(r.im, 0.0);
        assert!((r.re - 5.6124 / 7.6124).abs() < 1e-14);
    }

    #[test]
    fn pole_proximity_is_an_error() {
        // lossless limit is excluded by validation, so hit the pole with a complex frequency
        let m = MaterialParams::sapphire();
        let a = Complex64::new(m.omega_t * m.omega_t - m.gamma * m.gamma / 4.0, 0.0).sqrt();
        let pole = a - Complex64::i() * m.gamma / 2.0;
        assert!(matches!(
            permittivity(&m, pole),
            Err(MaterialError::PermittivityPole { .. })
        ));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(MaterialParams::new(0.5, 1e14, 1e14, 1e12).is_err());
        assert!(MaterialParams::new(2.0, 0.0, 1e14, 1e12).is_err());
        assert!(MaterialParams::new(2.0, 1e14, -1.0, 1e12).is_err());
        assert!(MaterialParams::new(2.0, 1e14, 1e14, 0.0).is_err());
        assert!(MaterialParams::new(2.0, 1e14, 1e14, f64::NAN).is_err());
    }

    #[test]
    fn sapphire_surface_resonance() {
        let m = MaterialParams::sapphire();
        let w = surface_resonance(&m).unwrap();
        assert!((w / m.omega_t - (1.0 + 1.44 * 2.71 / 3.71f64).sqrt()).abs() < 1e-14);
        assert!((w - 1.5470e14).abs() / 1.547e14 < 1e-4);
        assert!((w - 1.544e14).abs() / 1.544e14 < 3e-3);
    }

    #[test]
    fn no_resonance_without_oscillator() {
        assert_eq!(
            surface_resonance(&MaterialParams::vacuum()),
            Err(MaterialError::NoResonance)
        );
    }

    #[test]
    fn large_eta_limit() {
        let m = MaterialParams::new(1e12, 1e14, 2e14, 1e12).unwrap();
        let w = surface_resonance(&m).unwrap();
        assert!((w - (1e28f64 + 4e28).sqrt()).abs() / w < 1e-10);
    }

    #[test]
    fn resonance_is_near_reflection_peak() {
        // Dense scan of |r_p|; the finite width pulls the peak slightly below
        // the lossless root (about 3e-4 omega_T for sapphire).
        let m = MaterialParams::sapphire();
        let w_res = surface_resonance(&m).unwrap();
        let step = 1e-4 * m.omega_t;
        let (mut best_w, mut best) = (0.0, 0.0);
        let mut w = 0.5 * m.omega_t;
        while w <= 3.0 * m.omega_t {
            let a = reflection_p(&m, w).unwrap().norm();
            if a > best {
                best = a;
                best_w = w;
            }
            w += step;
        }
        assert!((best_w - w_res).abs() / w_res < 5e-3);
        assert!(reflection_p(&m, w_res).unwrap().norm() > 0.999 * best);
    }

    #[test]
    fn high_frequency_limit() {
        let m = MaterialParams::sapphire();
        let r = reflection_p(&m, 1e3 * m.omega_t).unwrap();
        let lim = (m.eta - 1.0) / (m.eta + 1.0);
        assert!((r.re - lim).abs() / lim < 1e-2);
    }

    fn material() -> impl Strategy<Value = MaterialParams> {
        (1.0f64..6.0, 0.5e14f64..3e14, 0.0f64..2.0, 1e-3f64..0.1).prop_map(|(eta, wt, p, g)| {
            MaterialParams::new(eta, wt, p * wt, g * wt).unwrap()
        })
    }

    proptest! {
        #[test]
        fn crossing_relation(m in material(), re in -5e14f64..5e14, im in 0.0f64..5e13) {
            let w = Complex64::new(re, im);
            let (Ok(a), Ok(b)) = (permittivity(&m, -w.conj()), permittivity(&m, w)) else {
                return Ok(());
            };
            prop_assert!((a - b.conj()).norm() <= 1e-14 * b.norm());
        }

        #[test]
        fn passivity(m in material(), w in 1e10f64..1e15) {
            let eps = permittivity(&m, Complex64::new(w, 0.0)).unwrap();
            if m.omega_p > 0.0 {
                prop_assert!(eps.im > 0.0);
            }
            let r = reflection_p(&m, w).unwrap();
            prop_assert!(r.norm().is_finite());
        }

        #[test]
        fn negative_frequency_is_conjugate(m in material(), w in 1e10f64..1e15) {
            prop_assert_eq!(reflection_p(&m, -w).unwrap(), reflection_p(&m, w).unwrap().conj());
        }
    }
}
