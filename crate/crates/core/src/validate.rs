//! Invariant suite behind `cp-spectra validate`.
//!
//! Every check compares two independent computations (or a computation and
//! a closed form) and reports the worst relative deviation it saw against
//! its tolerance. Random draws use a fixed seed so the report is
//! reproducible.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angular::{contract, matrix_a, matrix_b, DipoleSpec};
use crate::cp::{
    resonant_coefficient, series_coefficient, single_plate_coefficient, static_oracle, CavitySetup, CpError,
    ResonantCoefficient, Transition,
};
use crate::material::{reflection_p, surface_resonance, MaterialParams};
use crate::quadrature::{integrate_periodic, integrate_semi_infinite, QuadratureSpec};
use crate::spectroscopy::free_space_rate;

/// Signature of the two-plate Doppler coefficient; swappable so the suite
/// itself can be tested against a deliberately broken implementation.
pub type ResonantFn = fn(&CavitySetup, &Transition, &QuadratureSpec) -> Result<ResonantCoefficient, CpError>;

const SEED: u64 = 0x5eed_c0de;
const CS_OMEGA: f64 = 1.544e14;
const CS_DIPOLE: f64 = 5.85e-29;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation, in the units of `tolerance`.
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub elapsed: Duration,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<22} deviation {:.3e} (tol {:.1e}) {:>8.3}s  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.deviation,
                c.tolerance,
                c.elapsed.as_secs_f64(),
                c.detail
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(
            f,
            "{} checks, {} failed, {:.2}s",
            self.checks.len(),
            failed,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Outcome of one check body: worst deviation and a short note. An `Err`
/// fails the check with the error in the detail column.
type Outcome = Result<(f64, String), CpError>;

fn run(name: &'static str, tolerance: f64, body: impl FnOnce() -> Outcome) -> CheckResult {
    let start = Instant::now();
    let (passed, deviation, detail) = match body() {
        Ok((dev, note)) => (dev <= tolerance, dev, note),
        Err(e) => (false, f64::INFINITY, format!("error: {e}")),
    };
    CheckResult {
        name,
        passed,
        deviation,
        tolerance,
        detail,
        elapsed: start.elapsed(),
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn random_material(rng: &mut ChaCha8Rng) -> MaterialParams {
    let omega_t = rng.gen_range(0.8e14..1.4e14);
    MaterialParams {
        eta: rng.gen_range(1.5..4.0),
        omega_t,
        omega_p: omega_t * rng.gen_range(0.8..1.5),
        gamma: omega_t * rng.gen_range(0.005..0.05),
    }
}

fn random_dipole(rng: &mut ChaCha8Rng) -> DipoleSpec {
    if rng.gen_bool(0.3) {
        DipoleSpec::Isotropic(rng.gen_range(1e-29..8e-29))
    } else {
        DipoleSpec::Vector([
            rng.gen_range(-5e-29..5e-29),
            rng.gen_range(-5e-29..5e-29),
            rng.gen_range(-5e-29..5e-29),
        ])
    }
}

fn trace_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..64 {
        let phi = 2.0 * PI * k as f64 / 64.0 - 0.37;
        worst = worst.max(matrix_a(phi).trace().norm());
        worst = worst.max((matrix_b(phi).trace() - 2.0).norm());
        worst = worst.max((matrix_b(phi).transpose().trace() - 2.0).norm());
    }
    Ok((worst, "tr A = 0, tr B = tr Bᵀ = 2 on 64 angles".into()))
}

fn heaviside_gate(resonant: ResonantFn) -> Outcome {
    let m = MaterialParams::sapphire();
    let q = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for (omega, v) in [(0.0, 0.0), (-1.5e14, 0.0), (-1.5e14, 1e5), (-1e10, 3e5)] {
        let setup = CavitySetup::symmetric(1e-6, v, m)?;
        let tr = Transition::new(omega, DipoleSpec::Isotropic(CS_DIPOLE));
        worst = worst.max(resonant(&setup, &tr, &q)?.value.norm());
        worst = worst.max(static_oracle(&setup, &tr, &q)?.abs());
        worst = worst.max(single_plate_coefficient(5e-7, &m, &tr, v, &q)?.value.norm());
    }
    Ok((worst, "|C| for ω̃ ≤ 0, 1/s".into()))
}

fn free_space() -> Outcome {
    let g = free_space_rate(CS_OMEGA, &DipoleSpec::Isotropic(CS_DIPOLE));
    Ok(((g - 5.31e4).abs() / 5.31e4, format!("Γ₀ = {g:.4e} 1/s for the Cs line")))
}

fn surface_mode() -> Outcome {
    let m = MaterialParams::sapphire();
    let w = surface_resonance(&m)?;
    // coarse-to-fine scan of |r_p| for its maximum
    let (mut lo, mut hi) = (m.omega_t, 2.0 * m.omega_t);
    let mut best = lo;
    for _ in 0..6 {
        let n = 400;
        let mut peak = 0.0;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let r = reflection_p(&m, x)?.norm();
            if r > peak {
                peak = r;
                best = x;
            }
        }
        let step = (hi - lo) / n as f64;
        lo = best - 2.0 * step;
        hi = best + 2.0 * step;
    }
    let window = if (1.53e14..=1.56e14).contains(&w) { 0.0 } else { f64::INFINITY };
    Ok((
        ((w - best).abs() / best).max(window),
        format!("ω_res = {w:.6e}, |r| peak at {best:.6e} rad/s"),
    ))
}

fn quadrature_oracles() -> Outcome {
    let q = QuadratureSpec {
        rel_tol: 1e-12,
        ..QuadratureSpec::default()
    };
    let gamma3 = integrate_semi_infinite(|u: f64| u * u * (-u).exp(), &q)?.value;
    // ∫₀^∞ u e^{-u} / (1 - e^{-2u}/2) du = Σ 2^{-j} / (2j+1)²
    let geometric: f64 = (0..200).map(|j| 0.5f64.powi(j) / ((2 * j + 1) as f64).powi(2)).sum();
    let geo = integrate_semi_infinite(|u: f64| u * (-u).exp() / (1.0 - 0.5 * (-2.0 * u).exp()), &q)?.value;
    // ∫₀^{2π} e^{cos φ} dφ = 2π I₀(1)
    let i0: f64 = (0..30)
        .map(|k| {
            let f: f64 = (1..=k).map(|i| i as f64).product();
            0.25f64.powi(k) / (f * f)
        })
        .sum();
    let bessel = integrate_periodic(|phi: f64| phi.cos().exp(), &q)?.value;
    let worst = ((gamma3 - 2.0) / 2.0)
        .abs()
        .max(((geo - geometric) / geometric).abs())
        .max(((bessel - 2.0 * PI * i0) / (2.0 * PI * i0)).abs());
    Ok((worst, "Γ(3), geometric series, 2π I₀(1)".into()))
}

fn single_plate_limit(resonant: ResonantFn) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let q = QuadratureSpec::default();
    let vac = MaterialParams::vacuum();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let m = random_material(&mut rng);
        let w = surface_resonance(&m)? * rng.gen_range(0.9..1.1);
        let z = rng.gen_range(1e-7..2.5e-6);
        let v = if i % 2 == 0 { 0.0 } else { rng.gen_range(0.0..0.05) * 2.0 * z * m.gamma };
        let tr = Transition::new(w, random_dipole(&mut rng));
        let two = resonant(&CavitySetup::new(2.0 * z, v, m, vac)?, &tr, &q)?;
        let one = single_plate_coefficient(z, &m, &tr, v, &q)?;
        worst = worst.max(rel(two.value, one.value));
    }
    Ok((worst, "20 draws, {-} plate removed, half with v > 0".into()))
}

fn static_equivalence(resonant: ResonantFn) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let q = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let plus = random_material(&mut rng);
        let minus = if rng.gen_bool(0.5) { plus } else { random_material(&mut rng) };
        let w = surface_resonance(&plus)? * rng.gen_range(0.9..1.1);
        let l = rng.gen_range(0.2e-6..5e-6);
        let setup = CavitySetup::new(l, 0.0, plus, minus)?;
        let tr = Transition::new(w, random_dipole(&mut rng));
        let a = resonant(&setup, &tr, &q)?.gamma;
        let b = static_oracle(&setup, &tr, &q)?;
        worst = worst.max((a - b).abs() / b.abs());
    }
    Ok((worst, "20 draws, Doppler integral at v = 0 vs Green-tensor rate".into()))
}

fn series_agreement(resonant: ResonantFn) -> Outcome {
    let m = MaterialParams::sapphire();
    let q = QuadratureSpec::default();
    let w = 1.2 * surface_resonance(&m)?;
    let l = 1e-6;
    let setup = CavitySetup::symmetric(l, 1e-4 * l * m.gamma, m)?;
    let mut worst: f64 = 0.0;
    for d in [DipoleSpec::Isotropic(CS_DIPOLE), DipoleSpec::Vector([2e-29, -1e-29, 4e-29])] {
        let tr = Transition::new(w, d);
        let a = resonant(&setup, &tr, &q)?;
        let b = series_coefficient(&setup, &tr, 30, 2, &q)?;
        worst = worst.max(rel(a.value, b.value));
    }
    Ok((worst, "j ≤ 30, ℓ ≤ 2 at 1.2 ω_res, v = 1e-4 Lγ".into()))
}

fn plate_swap(resonant: ResonantFn) -> Outcome {
    let q = QuadratureSpec::default();
    let plus = MaterialParams::sapphire();
    let minus = MaterialParams::new(3.4, 1.3e14, 0.9e14, 3e12)?;
    let w = surface_resonance(&plus)?;
    let mut worst: f64 = 0.0;
    for v in [0.0, 1e5] {
        let setup = CavitySetup::new(8e-7, v, plus, minus)?;
        let tr = Transition::new(w, DipoleSpec::Isotropic(CS_DIPOLE));
        let a = resonant(&setup, &tr, &q)?;
        let b = resonant(&setup.swapped(), &tr, &q)?;
        worst = worst.max(rel(a.value, b.value));
    }
    Ok((worst, "isotropic dipole, v = 0 and 1e5 m/s".into()))
}

fn inverse_cube() -> Outcome {
    let m = MaterialParams::sapphire();
    let q = QuadratureSpec::default();
    let tr = Transition::new(surface_resonance(&m)?, DipoleSpec::Isotropic(CS_DIPOLE));
    let n = 9;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let z = 0.25e-6 * 16f64.powf(i as f64 / (n - 1) as f64);
        let g = single_plate_coefficient(z, &m, &tr, 0.0, &q)?.gamma;
        xs.push(z.ln());
        ys.push(g.ln());
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(((slope + 3.0).abs(), format!("log-log slope {slope:.6} over 0.25–4 μm")))
}

fn isotropic_a_nullity() -> Outcome {
    let d = DipoleSpec::Isotropic(CS_DIPOLE);
    let worst = (0..64)
        .map(|k| contract(&d, &matrix_a(2.0 * PI * k as f64 / 64.0 + 0.1)).norm() / d.norm_sqr())
        .fold(0.0, f64::max);
    Ok((worst, "|d·A·d| / |d|² for an isotropic dipole".into()))
}

fn vacuum_rates(resonant: ResonantFn) -> Outcome {
    let vac = MaterialParams::vacuum();
    let q = QuadratureSpec::default();
    let tr = Transition::new(CS_OMEGA, DipoleSpec::Isotropic(CS_DIPOLE));
    let mut worst: f64 = 0.0;
    for v in [0.0, 1e4, 3e5] {
        let setup = CavitySetup::symmetric(1e-6, v, vac)?;
        worst = worst.max(resonant(&setup, &tr, &q)?.value.norm());
        worst = worst.max(single_plate_coefficient(5e-7, &vac, &tr, v, &q)?.value.norm());
    }
    worst = worst.max(static_oracle(&CavitySetup::symmetric(1e-6, 0.0, vac)?, &tr, &q)?.abs());
    Ok((worst, "|C| with empty half-spaces, 1/s".into()))
}

/// Full suite against the production coefficient.
pub fn validate() -> ValidationReport {
    validate_with(resonant_coefficient)
}

pub fn validate_with(resonant: ResonantFn) -> ValidationReport {
    let start = Instant::now();
    let checks = vec![
        run("trace_identities", 1e-14, trace_identities),
        run("heaviside_gate", 0.0, || heaviside_gate(resonant)),
        run("free_space_rate", 1e-2, free_space),
        run("surface_resonance", 5e-3, surface_mode),
        run("quadrature_oracles", 1e-10, quadrature_oracles),
        run("single_plate_limit", 1e-9, || single_plate_limit(resonant)),
        run("static_equivalence", 1e-6, || static_equivalence(resonant)),
        run("series_agreement", 1e-4, || series_agreement(resonant)),
        run("plate_swap", 1e-10, || plate_swap(resonant)),
        run("inverse_cube_law", 1e-2, inverse_cube),
        run("isotropic_a_nullity", 1e-12, isotropic_a_nullity),
        run("vacuum_rates", 0.0, || vacuum_rates(resonant)),
    ];
    ValidationReport {
        checks,
        elapsed: start.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled(setup: &CavitySetup, tr: &Transition, q: &QuadratureSpec) -> Result<ResonantCoefficient, CpError> {
        let c = resonant_coefficient(setup, tr, q)?;
        Ok(ResonantCoefficient::new(c.value * 1.01, c.validity_flags))
    }

    #[test]
    fn cheap_checks_pass() {
        for c in [
            run("trace_identities", 1e-14, trace_identities),
            run("free_space_rate", 1e-2, free_space),
            run("surface_resonance", 5e-3, surface_mode),
            run("quadrature_oracles", 1e-10, quadrature_oracles),
            run("isotropic_a_nullity", 1e-12, isotropic_a_nullity),
        ] {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn one_percent_prefactor_error_is_caught() {
        let good = run("static_equivalence", 1e-6, || static_equivalence(resonant_coefficient));
        assert!(good.passed, "{good:?}");
        let bad = run("static_equivalence", 1e-6, || static_equivalence(scaled));
        assert!(!bad.passed);
        assert!((bad.deviation - 0.01).abs() < 1e-4, "{}", bad.deviation);
    }

    #[test]
    fn errors_fail_the_check() {
        let c = run("x", 1.0, || Err(CpError::InvalidSetup("boom".into())));
        assert!(!c.passed);
        assert!(c.detail.contains("boom"));
    }
}
