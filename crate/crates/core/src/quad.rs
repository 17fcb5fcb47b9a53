#![allow(clippy::excessive_precision)]
//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 7/15-point Gauss–Kronrod pair drives a global adaptive scheme that always
//! bisects the interval with the largest error estimate. Known kinks or jumps
//! of the integrand are passed as breakpoints so that no panel straddles them.
//! Half-line integrals are mapped onto `(0, 1]` with `t = a + (1 - s) / s`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
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

// Gauss weights attached to XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Tolerances for the adaptive driver.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self {
            abs,
            rel: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Panel<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.magnitude() * WGK[7];
    let mut values = [(T::zero(), T::zero()); 7];
    for (j, node) in XGK.iter().take(7).enumerate() {
        let dx = half * node;
        let lo = f(center - dx);
        let hi = f(center + dx);
        values[j] = (lo, hi);
        kronrod = kronrod + (lo + hi) * WGK[j];
        abs_sum += (lo.magnitude() + hi.magnitude()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (lo + hi) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = (fc - mean).magnitude() * WGK[7];
    for (j, (lo, hi)) in values.iter().enumerate() {
        asc += WGK[j] * ((*lo - mean).magnitude() + (*hi - mean).magnitude());
    }
    let value = kronrod * half;
    let resasc = asc * half.abs();
    let resabs = abs_sum * half.abs();
    let mut error = ((kronrod - gauss) * half).magnitude();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * resabs;
    if round > f64::MIN_POSITIVE {
        error = error.max(round);
    }
    Panel { a, b, value, error }
}

/// Fixed composite 15-point Kronrod rule on `panels` equal subintervals.
pub fn composite<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, panels: usize) -> T {
    let width = (b - a) / panels as f64;
    (0..panels).fold(T::zero(), |acc, p| {
        let lo = a + p as f64 * width;
        acc + gk15(&f, lo, lo + width).value
    })
}

/// Nodes and weights of the composite 15-point Kronrod rule on `[a, b]`.
pub fn composite_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut out = Vec::with_capacity(15 * panels);
    for p in 0..panels {
        let center = a + (p as f64 + 0.5) * width;
        out.push((center, WGK[7] * half));
        for j in 0..7 {
            out.push((center - half * XGK[j], WGK[j] * half));
            out.push((center + half * XGK[j], WGK[j] * half));
        }
    }
    out
}

/// Adaptive integral over `[a, b]` subdivided first at the interior `breaks`.
pub fn integrate_with_breaks<T, F>(f: F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Integral<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if a == b {
        return Integral {
            value: T::zero(),
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    if a > b {
        let r = integrate_with_breaks(f, b, a, breaks, tol);
        return Integral {
            value: r.value * -1.0,
            ..r
        };
    }
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > a && *p < b)
        .collect();
    points.sort_by(|x, y| x.total_cmp(y));
    points.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(a);
    edges.extend(points);
    edges.push(b);

    let mut panels: Vec<Panel<T>> = edges.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    let mut evaluations = 15 * panels.len();
    let min_width = 1e-13 * (b - a).abs().max(1.0);
    let mut converged = false;
    loop {
        let total = panels.iter().fold(T::zero(), |s, p| s + p.value);
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= tol.abs.max(tol.rel * total.magnitude()) {
            converged = true;
            break;
        }
        if panels.len() >= tol.max_intervals {
            break;
        }
        let (idx, worst) = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.b - p.a > min_width)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, p)| (i, (p.a, p.b)))
            .unwrap_or((usize::MAX, (0.0, 0.0)));
        if idx == usize::MAX {
            break;
        }
        let mid = 0.5 * (worst.0 + worst.1);
        panels[idx] = gk15(&f, worst.0, mid);
        panels.push(gk15(&f, mid, worst.1));
        evaluations += 30;
    }
    let value = panels.iter().fold(T::zero(), |s, p| s + p.value);
    let error = panels.iter().map(|p| p.error).sum();
    if !converged {
        log::debug!("quadrature on [{a}, {b}] stopped with error {error:.3e}");
    }
    Integral {
        value,
        error,
        evaluations,
        converged,
    }
}

pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, tol: Tolerance) -> Integral<T> {
    integrate_with_breaks(f, a, b, &[], tol)
}

/// `∫_a^∞ f`.
pub fn integrate_upper<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, tol: Tolerance) -> Integral<T> {
    integrate(
        |s: f64| {
            let t = a + (1.0 - s) / s;
            f(t) * (1.0 / (s * s))
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_{-∞}^b f`.
pub fn integrate_lower<T: QuadValue, F: Fn(f64) -> T>(f: F, b: f64, tol: Tolerance) -> Integral<T> {
    integrate_upper(|t| f(2.0 * b - t), b, tol)
}

/// `∫_lo^hi f` where either end may be infinite; infinite ends are split off
/// at the outermost break (or zero) and mapped onto finite intervals.
pub fn integrate_interval<T, F>(f: F, lo: f64, hi: f64, breaks: &[f64], tol: Tolerance) -> Integral<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if lo.is_finite() && hi.is_finite() {
        return integrate_with_breaks(f, lo, hi, breaks, tol);
    }
    let inner: Vec<f64> = breaks.iter().copied().filter(|b| b.is_finite() && *b > lo && *b < hi).collect();
    let fallback = if lo.is_finite() { lo + 1.0 } else if hi.is_finite() { hi - 1.0 } else { 0.0 };
    let a = if lo.is_finite() { lo } else { inner.iter().copied().fold(f64::INFINITY, f64::min).min(fallback) };
    let b = if hi.is_finite() { hi } else { inner.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(fallback).max(a) };
    let mut total = integrate_with_breaks(&f, a, b, &inner, tol);
    for part in [
        (!lo.is_finite()).then(|| integrate_lower(&f, a, tol)),
        (!hi.is_finite()).then(|| integrate_upper(&f, b, tol)),
    ]
    .into_iter()
    .flatten()
    {
        total.value = total.value + part.value;
        total.error += part.error;
        total.evaluations += part.evaluations;
        total.converged &= part.converged;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_for_degree_22() {
        let r = gk15(&|x: f64| x.powi(22), -1.0, 1.0);
        assert!((r.value - 2.0 / 23.0).abs() < 1e-15);
        let g: f64 = XGK
            .iter()
            .skip(1)
            .step_by(2)
            .zip(WG.iter())
            .map(|(x, w)| if *x == 0.0 { 0.0 } else { 2.0 * w * x.powi(12) })
            .sum();
        assert!((g - 2.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_kinks_and_tails() {
        let r = integrate_with_breaks(|x: f64| x.abs(), -1.0, 2.0, &[0.0], Tolerance::default());
        assert!((r.value - 2.5).abs() < 1e-14);
        let r = integrate_upper(|x: f64| (-x).exp(), 0.0, Tolerance::default());
        assert!((r.value - 1.0).abs() < 1e-12, "{}", r.value);
        let r = integrate_lower(|x: f64| 1.0 / (1.0 + x * x), 0.0, Tolerance::default());
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn mixed_infinite_intervals() {
        let g = |x: f64| (-(x - 1.0) * (x - 1.0)).exp();
        let sp = std::f64::consts::PI.sqrt();
        let r = integrate_interval(g, f64::NEG_INFINITY, f64::INFINITY, &[1.0], Tolerance::default());
        assert!((r.value - sp).abs() < 1e-12);
        let r = integrate_interval(g, 1.0, f64::INFINITY, &[], Tolerance::default());
        assert!((r.value - 0.5 * sp).abs() < 1e-12);
        let r = integrate_interval(g, f64::NEG_INFINITY, 1.0, &[-3.0], Tolerance::default());
        assert!((r.value - 0.5 * sp).abs() < 1e-12);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate(
            |x: f64| Complex64::from_polar(1.0, x),
            0.0,
            std::f64::consts::PI,
            Tolerance::default(),
        );
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn composite_rule_matches_nodes() {
        let f = |x: f64| (3.0 * x).cos();
        let direct = composite(f, 0.0, 2.0, 4);
        let via_nodes: f64 = composite_nodes(0.0, 2.0, 4).iter().map(|(x, w)| w * f(*x)).sum();
        assert!((direct - via_nodes).abs() < 1e-15);
        assert!((direct - (6.0f64).sin() / 3.0).abs() < 1e-14);
    }
}
