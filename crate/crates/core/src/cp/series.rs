//! Expansion of the resonant coefficient in round trips `j` and powers `ℓ`
//! of the velocity.
//!
//! Expanding the closed denominator geometrically and the Doppler-shifted
//! reflection coefficients in a Taylor series about ω̃ turns the radial
//! integral into elementary moments `∫ k^{ℓ+2} e^{-a k} dk`, leaving
//!
//! ```text
//! C = -i/(8π²ħε₀L³) Σ_ℓ (-1)^ℓ (ℓ+1)(ℓ+2) Σ_j [
//!        2 s₁ʲ^ℓ / (2(j+1))³ ⟨cos^ℓ A⟩ ∂^ℓ (r⁺r⁻)^{j+1}
//!      +   s₂ʲ^ℓ / (2j+1)³    ⟨cos^ℓ B⟩ ∂^ℓ (r⁺r⁻)^j r⁻
//!      +   s₃ʲ^ℓ / (2j+1)³    ⟨cos^ℓ Bᵀ⟩ ∂^ℓ (r⁺r⁻)^j r⁺ ]
//! ```
//!
//! with `s₁ = v/(2(j+1)L)`, `s₂ = s₃ = v/((2j+1)L)` and `⟨·⟩` the azimuthal
//! integral. The `(-1)^ℓ` together with the `B ↔ r⁻` pairing is the
//! `φ → φ + π` image of the closed form's `B ↔ r⁺` pairing.

use num_complex::Complex64;

use super::{mode_prefactor, regime_flags, CavitySetup, CpError, ResonantCoefficient, Transition, ValidityFlag};
use crate::angular::{contract, matrix_a, matrix_b, DirectionMatrix};
use crate::material::reflection_p;
use crate::quadrature::{try_integrate_periodic_scaled, QuadratureSpec};

/// Relative finite-difference step, in units of the narrowest plate width.
const STEP_OVER_WIDTH: f64 = 1e-4;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central stencil for the ℓ-th derivative with spacing `h`: offsets in
/// units of `h` and weights, exact to O(h²).
fn stencil(order: usize) -> Vec<(f64, f64)> {
    (0..=order)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            (order as f64 / 2.0 - k as f64, sign * binomial(order, k))
        })
        .collect()
}

/// ℓ-th derivative at `x` from values of `f` on the stencils for steps `h`
/// and `h/2`, Richardson-combined to O(h⁴).
fn derivative<F>(order: usize, h: f64, mut f: F) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    if order == 0 {
        return f(0.0);
    }
    let mut at = |step: f64| {
        stencil(order)
            .into_iter()
            .fold(Complex64::new(0.0, 0.0), |acc, (offset, w)| acc + f(offset * step) * w)
            / step.powi(order as i32)
    };
    let coarse = at(h);
    let fine = at(0.5 * h);
    (fine * 4.0 - coarse) / 3.0
}

fn moment(
    d: &crate::angular::DipoleSpec,
    order: usize,
    matrix: fn(f64) -> DirectionMatrix,
    q: &QuadratureSpec,
) -> Result<f64, CpError> {
    let scale = 2.0 * std::f64::consts::PI * d.norm_sqr();
    let est = try_integrate_periodic_scaled(
        |phi: f64| -> Result<f64, CpError> { Ok(phi.cos().powi(order as i32) * contract(d, &matrix(phi)).re) },
        q,
        scale,
    )?;
    Ok(est.value)
}

fn b_transposed(phi: f64) -> DirectionMatrix {
    matrix_b(phi).transpose()
}

/// True when the last five round-trip terms are non-decreasing in magnitude.
fn tail_not_decreasing(magnitudes: &[f64]) -> bool {
    if magnitudes.len() < 5 {
        return false;
    }
    let tail = &magnitudes[magnitudes.len() - 5..];
    tail[4] > 0.0 && tail.windows(2).all(|w| w[1] >= w[0])
}

/// Multiple-reflection / velocity-power series truncated at `j_max` round
/// trips and `l_max` velocity powers. Requires `|r⁺r⁻(ω̃)| < 1`.
pub fn series_coefficient(
    setup: &CavitySetup,
    tr: &Transition,
    j_max: usize,
    l_max: usize,
    q: &QuadratureSpec,
) -> Result<ResonantCoefficient, CpError> {
    setup.validate()?;
    let omega = tr.omega_tilde;
    if omega <= 0.0 {
        return Ok(ResonantCoefficient::zero());
    }
    let (plus, minus) = (&setup.material_plus, &setup.material_minus);
    let product_norm = (reflection_p(plus, omega)? * reflection_p(minus, omega)?).norm();
    if product_norm >= 1.0 {
        return Err(CpError::SeriesPrecondition { product_norm });
    }

    let length = setup.separation;
    let v = setup.velocity;
    let width = plus.gamma.min(minus.gamma);
    let h = STEP_OVER_WIDTH * width;
    let d = tr.dipole;

    // Σ_j contributions, accumulated per j so that convergence can be judged
    let mut per_j = vec![Complex64::new(0.0, 0.0); j_max + 1];
    for order in 0..=l_max {
        if order > 0 && v == 0.0 {
            break;
        }
        let m_a = moment(&d, order, matrix_a, q)?;
        let m_b = moment(&d, order, matrix_b, q)?;
        let m_bt = moment(&d, order, b_transposed, q)?;
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        let weight = sign * ((order + 1) * (order + 2)) as f64;

        // reflection coefficients on both stencils, shared by every j
        let mut cache: Vec<(f64, Complex64, Complex64)> = Vec::new();
        let mut lookup = |dw: f64| -> Result<(Complex64, Complex64), CpError> {
            if let Some(&(_, a, b)) = cache.iter().find(|(x, _, _)| *x == dw) {
                return Ok((a, b));
            }
            let a = reflection_p(plus, omega + dw)?;
            let b = reflection_p(minus, omega + dw)?;
            cache.push((dw, a, b));
            Ok((a, b))
        };
        let mut points = Vec::new();
        for step in [h, 0.5 * h] {
            for (offset, _) in stencil(order.max(1)) {
                points.push(offset * step);
            }
        }
        points.push(0.0);
        for &p in &points {
            lookup(p)?;
        }
        let r_at = |dw: f64| -> (Complex64, Complex64) {
            let (_, a, b) = *cache
                .iter()
                .find(|(x, _, _)| *x == dw)
                .expect("stencil point evaluated above");
            (a, b)
        };

        for (j, slot) in per_j.iter_mut().enumerate() {
            let round = (2 * j + 1) as f64;
            let twice = (2 * (j + 1)) as f64;
            let s1 = (v / (twice * length)).powi(order as i32);
            let s2 = (v / (round * length)).powi(order as i32);
            let da = derivative(order, h, |dw| {
                let (a, b) = r_at(dw);
                (a * b).powu(j as u32 + 1)
            });
            let db = derivative(order, h, |dw| {
                let (a, b) = r_at(dw);
                (a * b).powu(j as u32) * b
            });
            let dbt = derivative(order, h, |dw| {
                let (a, b) = r_at(dw);
                (a * b).powu(j as u32) * a
            });
            let term = da * (2.0 * s1 * m_a / twice.powi(3))
                + db * (s2 * m_b / round.powi(3))
                + dbt * (s2 * m_bt / round.powi(3));
            *slot += term * weight;
        }
    }

    let total = per_j
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t);
    let mut flags = regime_flags(length, v, omega, &[*plus, *minus]);
    let magnitudes: Vec<f64> = per_j.iter().map(|t| t.norm()).collect();
    if tail_not_decreasing(&magnitudes) {
        flags.insert(ValidityFlag::SeriesDivergent);
    }
    Ok(ResonantCoefficient::new(mode_prefactor(length) * total, flags))
}
