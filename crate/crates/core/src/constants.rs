//! Physical constants (CODATA 2018, SI units).
//!
//! Frequencies throughout the crate are angular (rad/s).

/// The constants table shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Vacuum permittivity, F/m.
    pub eps0: f64,
    /// Vacuum permeability, N/A².
    pub mu0: f64,
    /// Speed of light, m/s.
    pub c: f64,
}

pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const C: f64 = 2.997_924_58e8;
/// Derived from `EPS0` and `C` so that `MU0 * EPS0 * C * C == 1` holds to rounding.
pub const MU0: f64 = 1.0 / (EPS0 * C * C);

const TABLE: PhysicalConstants = PhysicalConstants {
    hbar: HBAR,
    eps0: EPS0,
    mu0: MU0,
    c: C,
};

pub fn constants() -> PhysicalConstants {
    TABLE
}

impl PhysicalConstants {
    /// Coulomb constant 1/(4πε₀).
    pub fn coulomb(&self) -> f64 {
        1.0 / (4.0 * std::f64::consts::PI * self.eps0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_of_light_is_exact() {
        assert_eq!(constants().c, 2.99792458e8);
    }

    #[test]
    fn electromagnetic_identity() {
        let k = constants();
        let product = k.mu0 * k.eps0 * k.c * k.c;
        assert!((product - 1.0).abs() < 1e-12, "{product}");
    }

    #[test]
    fn coulomb_constant() {
        let kc = constants().coulomb();
        assert!((kc / 8.9875e9 - 1.0).abs() < 1e-4, "{kc}");
    }

    #[test]
    fn codata_values() {
        let k = constants();
        assert_eq!(k.hbar, 1.054571817e-34);
        assert_eq!(k.eps0, 8.8541878128e-12);
        // CODATA 2018 mu0 = 1.25663706212e-6
        assert!((k.mu0 / 1.25663706212e-6 - 1.0).abs() < 1e-10);
    }
}
