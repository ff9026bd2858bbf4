//! Directionality matrices of the planar response and their contraction
//! with real dipole matrix elements.

use num_complex::Complex64;

pub type Matrix3 = [[Complex64; 3]; 3];

/// Real dipole matrix element, either as an explicit vector or as an
/// orientation-averaged magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DipoleSpec {
    /// Cartesian components (C·m); z is the plate normal, x the direction of motion.
    Vector([f64; 3]),
    /// Magnitude |d| (C·m) of an isotropically oriented dipole.
    Isotropic(f64),
}

impl DipoleSpec {
    /// |d|², C²·m².
    pub fn norm_sqr(&self) -> f64 {
        match *self {
            DipoleSpec::Vector(d) => d.iter().map(|x| x * x).sum(),
            DipoleSpec::Isotropic(m) => m * m,
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            DipoleSpec::Vector(d) => d.iter().all(|x| x.is_finite()),
            DipoleSpec::Isotropic(m) => m.is_finite() && m >= 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    A,
    B,
    BTransposed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionMatrix {
    pub kind: DirectionKind,
    pub phi: f64,
    pub entries: Matrix3,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// `A(phi)`: real symmetric, traceless.
pub fn matrix_a(phi: f64) -> DirectionMatrix {
    let (s, c) = phi.sin_cos();
    let z = re(0.0);
    DirectionMatrix {
        kind: DirectionKind::A,
        phi,
        entries: [
            [re(-c * c), re(-c * s), z],
            [re(-c * s), re(-s * s), z],
            [z, z, re(1.0)],
        ],
    }
}

/// `B(phi)`: Hermitian with trace 2; the third row and column carry the
/// imaginary couplings between in-plane and normal components.
pub fn matrix_b(phi: f64) -> DirectionMatrix {
    let (s, c) = phi.sin_cos();
    DirectionMatrix {
        kind: DirectionKind::B,
        phi,
        entries: [
            [re(c * c), re(c * s), im(-c)],
            [re(c * s), re(s * s), im(-s)],
            [im(c), im(s), re(1.0)],
        ],
    }
}

impl DirectionMatrix {
    pub fn transpose(&self) -> DirectionMatrix {
        let mut t = self.entries;
        for (i, row) in t.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.entries[j][i];
            }
        }
        let kind = match self.kind {
            DirectionKind::A => DirectionKind::A,
            DirectionKind::B => DirectionKind::BTransposed,
            DirectionKind::BTransposed => DirectionKind::B,
        };
        DirectionMatrix {
            kind,
            phi: self.phi,
            entries: t,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1] + self.entries[2][2]
    }
}

/// `d · M · d` for a general complex 3×3 matrix. Isotropic dipoles use the
/// orientation average `|d|²/3 · tr M`.
pub fn contract_matrix(d: &DipoleSpec, m: &Matrix3) -> Complex64 {
    match *d {
        DipoleSpec::Vector(v) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                let row = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
                acc += row * v[i];
            }
            acc
        }
        DipoleSpec::Isotropic(mag) => (m[0][0] + m[1][1] + m[2][2]) * (mag * mag / 3.0),
    }
}

pub fn contract(d: &DipoleSpec, m: &DirectionMatrix) -> Complex64 {
    contract_matrix(d, &m.entries)
}

/// Contraction with the realness of the result asserted. For real dipoles
/// the imaginary parts of `A`, `B` and `Bᵀ` cancel pairwise.
pub fn contract_real(d: &DipoleSpec, m: &DirectionMatrix) -> f64 {
    let z = contract(d, m);
    assert!(
        z.im.abs() <= 1e-12 * z.re.abs() + 1e-30 * d.norm_sqr().max(1.0),
        "contraction with {:?} not real: {z}",
        m.kind
    );
    z.re
}
