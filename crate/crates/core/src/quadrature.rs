//! Integration engine for the two axes of the planar mode sum: an adaptive
//! Gauss–Kronrod rule on the truncated semi-infinite radial axis and a
//! node-doubling trapezoid rule on the periodic azimuthal axis.
//!
//! Both routines accept fallible integrands so that errors raised deep
//! inside a nested integral (material poles, inner non-convergence)
//! surface unchanged at the call site.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("{axis} integral did not converge: best {best}, error estimate {error:e}")]
    NotConverged {
        axis: &'static str,
        best: Complex64,
        error: f64,
    },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    /// Absolute tolerance as a fraction of `|f(1)|`, the integrand near its
    /// natural peak in the scaled variable.
    pub abs_tol: f64,
    /// Maximum number of panels on the radial axis.
    pub max_subdivisions: usize,
    /// Radial cutoff in the scaled variable `u = k L`.
    pub u_max: f64,
    /// Initial number of azimuthal nodes; doubled until converged.
    pub phi_nodes: usize,
    /// Cap on azimuthal doublings.
    pub phi_max_doublings: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-300,
            max_subdivisions: 200,
            u_max: 60.0,
            phi_nodes: 64,
            phi_max_doublings: 10,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec("rel_tol must be > 0"));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(QuadratureError::InvalidSpec("abs_tol must be >= 0"));
        }
        if !(self.u_max >= 20.0) || !self.u_max.is_finite() {
            return Err(QuadratureError::InvalidSpec("u_max must be finite and >= 20"));
        }
        if self.phi_nodes < 2 || self.phi_nodes % 2 != 0 {
            return Err(QuadratureError::InvalidSpec("phi_nodes must be even and >= 2"));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadratureError::InvalidSpec("max_subdivisions must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    // panel is at roundoff level and will not be split
    settled: bool,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // unsettled panels first, then by error, ties broken by position
        (!self.settled)
            .cmp(&!other.settled)
            .then(self.error.total_cmp(&other.error))
            .then(other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<T, E, F>(f: &mut F, a: f64, b: f64) -> Result<Panel<T>, E>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T, E>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut nodes = [(fc, WGK[7]); 15];
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        nodes[2 * j] = (f1, WGK[j]);
        nodes[2 * j + 1] = (f2, WGK[j]);
        let sum = f1 + f2;
        kronrod = kronrod + sum * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + sum * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let (mut resabs, mut resasc) = (0.0, 0.0);
    for (fx, w) in nodes {
        resabs += fx.magnitude() * w;
        resasc += (fx - mean).magnitude() * w;
    }
    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    // QUADPACK's estimate: |K - G| sharpened when small, but never trusted
    // below the spread of the integrand when the rules agree by accident
    let mut error = ((kronrod - gauss) * half).magnitude();
    if resasc > 0.0 && error > 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    // error below what the arithmetic can resolve for this panel
    let floor = 50.0 * f64::EPSILON * resabs;
    let settled = error <= floor;
    Ok(Panel {
        a,
        b,
        value,
        error: error.max(floor),
        settled,
    })
}

/// Adaptive integral of `f` over `[0, spec.u_max]` with fallible integrand.
///
/// The interval is pre-split geometrically around `u ~ 1`, where the radial
/// weights of the planar mode sum peak, and refined by bisecting the panel
/// with the largest error estimate until the total estimate satisfies
/// `rel_tol * |I| + abs_tol * |f(1)|`.
pub fn try_integrate_semi_infinite<T, E, F>(
    mut f: F,
    spec: &QuadratureSpec,
) -> Result<Estimate<T>, E>
where
    T: Integrand,
    E: From<QuadratureError>,
    F: FnMut(f64) -> Result<T, E>,
{
    spec.validate()?;
    let scale = f(1.0)?.magnitude();
    let mut evaluations = 1usize;
    let abs_tol = spec.abs_tol * scale;

    let mut breaks = vec![0.0];
    let mut edge = 0.5;
    while edge < spec.u_max {
        breaks.push(edge);
        edge *= 2.0;
    }
    breaks.push(spec.u_max);

    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        heap.push(gauss_kronrod(&mut f, w[0], w[1])?);
        evaluations += 15;
    }

    loop {
        // deterministic left-to-right reduction of the current partition
        let mut panels: Vec<&Panel<T>> = heap.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let (value, error) = panels
            .iter()
            .fold((T::zero(), 0.0), |(v, e), p| (v + p.value, e + p.error));
        let tol = spec.rel_tol * value.magnitude() + abs_tol;
        let all_settled = panels.iter().all(|p| p.settled);
        if error <= tol || all_settled {
            drop(panels);
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= spec.max_subdivisions {
            return Err(QuadratureError::NotConverged {
                axis: "radial",
                best: value.to_complex(),
                error,
            }
            .into());
        }
        drop(panels);
        let worst = heap.pop().expect("partition is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(gauss_kronrod(&mut f, worst.a, mid)?);
        heap.push(gauss_kronrod(&mut f, mid, worst.b)?);
        evaluations += 30;
    }
}

pub fn integrate_semi_infinite<T, F>(
    mut f: F,
    spec: &QuadratureSpec,
) -> Result<Estimate<T>, QuadratureError>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    try_integrate_semi_infinite(|u| Ok::<T, QuadratureError>(f(u)), spec)
}

/// Trapezoid rule over `[0, 2π)` on `spec.phi_nodes` equispaced nodes,
/// doubling the node count (reusing previous nodes) until successive values
/// agree to `rel_tol`.
pub fn try_integrate_periodic<T, E, F>(g: F, spec: &QuadratureSpec) -> Result<Estimate<T>, E>
where
    T: Integrand,
    E: From<QuadratureError>,
    F: FnMut(f64) -> Result<T, E>,
{
    try_integrate_periodic_scaled(g, spec, 0.0)
}

/// As [`try_integrate_periodic`], with `scale` the magnitude of the
/// integral's constituent terms. Integrands that cancel to roundoff noise
/// (e.g. traceless contractions) converge once successive values agree to
/// machine precision relative to `scale`.
pub fn try_integrate_periodic_scaled<T, E, F>(
    mut g: F,
    spec: &QuadratureSpec,
    scale: f64,
) -> Result<Estimate<T>, E>
where
    T: Integrand,
    E: From<QuadratureError>,
    F: FnMut(f64) -> Result<T, E>,
{
    spec.validate()?;
    let mut n = spec.phi_nodes;
    let mut sum = T::zero();
    let mut sum_abs = 0.0;
    for k in 0..n {
        let v = g(2.0 * PI * k as f64 / n as f64)?;
        sum = sum + v;
        sum_abs += v.magnitude();
    }
    let mut evaluations = n;
    let mut value = sum * (2.0 * PI / n as f64);
    let mut error = f64::INFINITY;
    for _ in 0..=spec.phi_max_doublings {
        // midpoints of the current grid
        for k in 0..n {
            let v = g(2.0 * PI * (k as f64 + 0.5) / n as f64)?;
            sum = sum + v;
            sum_abs += v.magnitude();
        }
        evaluations += n;
        n *= 2;
        let refined = sum * (2.0 * PI / n as f64);
        let resabs = sum_abs * (2.0 * PI / n as f64);
        error = (refined - value).magnitude();
        value = refined;
        let floor = 50.0 * f64::EPSILON * resabs.max(scale);
        if error <= spec.rel_tol * value.magnitude() + floor {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
    }
    Err(QuadratureError::NotConverged {
        axis: "azimuthal",
        best: value.to_complex(),
        error,
    }
    .into())
}

pub fn integrate_periodic<T, F>(mut g: F, spec: &QuadratureSpec) -> Result<Estimate<T>, QuadratureError>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    try_integrate_periodic(|p| Ok::<T, QuadratureError>(g(p)), spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gamma_three() {
        let est = integrate_semi_infinite(|u: f64| u * u * (-u).exp(), &spec()).unwrap();
        assert!((est.value - 2.0).abs() / 2.0 < 1e-8, "{}", est.value);
        assert!(est.error <= 1e-8 * 2.0);
    }

    #[test]
    fn geometric_denominator() {
        // oracle: expand 1/(1 - e^{-2u}/2) and integrate term by term
        let oracle: f64 = (0..1000).map(|j| 0.5f64.powi(j) / (2 * j + 1) as f64).sum();
        let est = integrate_semi_infinite(|u: f64| (-u).exp() / (1.0 - 0.5 * (-2.0 * u).exp()), &spec())
            .unwrap();
        assert!((est.value - oracle).abs() / oracle < 1e-8);
        // closed form of the same series: sqrt(2) * atanh(1/sqrt(2))
        let closed = 2f64.sqrt() * (1.0 / 2f64.sqrt()).atanh();
        assert!((oracle - closed).abs() < 1e-14);
    }

    #[test]
    fn damped_oscillation_against_trapezoid() {
        let f = |u: f64| u * (-u).exp() * (10.0 * u).cos();
        // brute-force trapezoid oracle on 10^7 panels over [0, 60]
        let n = 10_000_000usize;
        let h = 60.0 / n as f64;
        let mut s = 0.5 * (f(0.0) + f(60.0));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        let oracle = s * h;
        let est = integrate_semi_infinite(f, &spec()).unwrap();
        assert!((est.value - oracle).abs() < 1e-7 * oracle.abs().max(1e-3), "{} vs {oracle}", est.value);
        // analytic: Re 1/(1 - 10i)^2
        let exact = (Complex64::new(1.0, -10.0) * Complex64::new(1.0, -10.0)).inv().re;
        assert!((est.value - exact).abs() < 1e-12);
    }

    #[test]
    fn radial_non_convergence_carries_best_estimate() {
        let s = QuadratureSpec {
            max_subdivisions: 9,
            ..spec()
        };
        let err = integrate_semi_infinite(|u: f64| (200.0 * u).sin().abs(), &s).unwrap_err();
        match err {
            QuadratureError::NotConverged { axis, best, error } => {
                assert_eq!(axis, "radial");
                assert!(best.re > 0.0 && error > 0.0);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn invalid_spec() {
        let s = QuadratureSpec { u_max: 10.0, ..spec() };
        assert!(integrate_semi_infinite(|u: f64| u, &s).is_err());
        let s = QuadratureSpec { phi_nodes: 7, ..spec() };
        assert!(integrate_periodic(|p: f64| p, &s).is_err());
    }

    #[test]
    fn cos_squared() {
        let est = integrate_periodic(|p: f64| p.cos().powi(2), &spec()).unwrap();
        assert!((est.value - PI).abs() < 1e-12);
    }

    #[test]
    fn exp_cos_against_bessel_series() {
        // 2π I0(1), I0(1) = Σ (1/4)^k / (k!)²
        let mut i0 = 0.0;
        let mut term = 1.0;
        for k in 0..30 {
            if k > 0 {
                term *= 0.25 / (k * k) as f64;
            }
            i0 += term;
        }
        let est = integrate_periodic(|p: f64| p.cos().exp(), &spec()).unwrap();
        assert!((est.value - 2.0 * PI * i0).abs() < 1e-9);
        assert!((est.value - 7.95493).abs() < 1e-5);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let est = integrate_periodic(|p: f64| p.sin() * p.cos(), &spec()).unwrap();
        assert!(est.value.abs() < 1e-14);
    }

    #[test]
    fn periodic_non_convergence() {
        let s = QuadratureSpec {
            phi_nodes: 4,
            phi_max_doublings: 2,
            ..spec()
        };
        let err = integrate_periodic(|p: f64| (40.0 * p.cos()).exp(), &s).unwrap_err();
        assert!(matches!(err, QuadratureError::NotConverged { axis: "azimuthal", .. }));
    }

    #[test]
    fn complex_integrand() {
        let est = integrate_semi_infinite(
            |u: f64| Complex64::new(0.0, u).exp() * (-u).exp(),
            &spec(),
        )
        .unwrap();
        // ∫ e^{(i-1)u} du = 1/(1-i)
        assert!((est.value - Complex64::new(0.5, 0.5)).norm() < 1e-10);
    }

    #[test]
    fn errors_propagate_from_integrand() {
        #[derive(Debug)]
        enum MyErr {
            Quad,
            Boom,
        }
        impl From<QuadratureError> for MyErr {
            fn from(_: QuadratureError) -> Self {
                MyErr::Quad
            }
        }
        let r = try_integrate_semi_infinite(
            |u: f64| if u > 3.0 { Err(MyErr::Boom) } else { Ok(u) },
            &spec(),
        );
        assert!(matches!(r, Err(MyErr::Boom)));
        let _ = MyErr::Quad;
    }

    #[test]
    fn deterministic() {
        let f = |u: f64| u.sqrt() * (-u).exp() * (3.0 * u).sin();
        let a = integrate_semi_infinite(f, &spec()).unwrap();
        let b = integrate_semi_infinite(f, &spec()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error.to_bits(), b.error.to_bits());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn linearity(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, w in 0.1f64..5.0) {
                let s = QuadratureSpec::default();
                let f = |u: f64| u * u * (-u).exp();
                let g = |u: f64| (-u).exp() * (w * u).cos();
                let lhs = integrate_semi_infinite(|u| alpha * f(u) + beta * g(u), &s).unwrap();
                let a = integrate_semi_infinite(f, &s).unwrap();
                let b = integrate_semi_infinite(g, &s).unwrap();
                // error estimates are heuristics, so allow a safety factor
                let tol = 10.0 * (lhs.error + alpha.abs() * a.error + beta.abs() * b.error) + 1e-14;
                prop_assert!((lhs.value - (alpha * a.value + beta * b.value)).abs() <= tol);
                let exact = 2.0 * alpha + beta / (1.0 + w * w);
                prop_assert!((lhs.value - exact).abs() <= 2.0 * s.rel_tol * exact.abs() + 1e-14);

                let p = integrate_periodic(|t| alpha * t.cos().exp() + beta * (w * t.sin()).cos(), &s).unwrap();
                let pa = integrate_periodic(|t: f64| t.cos().exp(), &s).unwrap();
                let pb = integrate_periodic(|t: f64| (w * t.sin()).cos(), &s).unwrap();
                let ptol = 1e-8 * p.value.abs().max(1.0);
                prop_assert!((p.value - (alpha * pa.value + beta * pb.value)).abs() <= ptol);
            }

            #[test]
            fn doubling_does_not_worsen_error(a in 0.5f64..6.0, n in 2usize..6) {
                let nodes = 2 * n;
                let g = |t: f64| (a * t.cos()).exp();
                let coarse = QuadratureSpec { phi_nodes: nodes, ..QuadratureSpec::default() };
                let fine = QuadratureSpec { phi_nodes: 2 * nodes, ..QuadratureSpec::default() };
                let e1 = integrate_periodic(g, &coarse).unwrap();
                let e2 = integrate_periodic(g, &fine).unwrap();
                let floor = 1e-14 * e1.value.abs();
                prop_assert!(e2.error <= e1.error + floor);
            }
        }
    }
}
