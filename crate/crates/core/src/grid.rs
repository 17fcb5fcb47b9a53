//! Uniform periodic discretization of the line.
//!
//! A [`GridSpec`] covers `[-L, L)` with `M` nodes. States are stored as
//! [`GridFunction`]s either in the position representation (where the free
//! Hamiltonian acts by multiplication) or in the momentum representation
//! (where `P` acts by multiplication). The transform between them uses the
//! symmetric `(2π)^{-1/2}` convention so that discrete Parseval holds with
//! the natural weights `h` and `π/L`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

/// Builds the grid `x_i = -L + i h`, `h = 2L / M`.
pub fn make_grid(half_width: f64, points: usize) -> Result<GridSpec> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "half width must be positive, got {half_width}"
        )));
    }
    if points < 4 || !points.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "point count {points} is not a power of two >= 4"
        )));
    }
    Ok(GridSpec { half_width, points })
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        make_grid(half_width, points)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    pub fn momentum_spacing(&self) -> f64 {
        PI / self.half_width
    }

    /// Momentum node `m`, covering `[-π/h, π/h)` in increasing order.
    pub fn momentum_node(&self, m: usize) -> f64 {
        (m as f64 - (self.points / 2) as f64) * self.momentum_spacing()
    }

    pub fn momentum_nodes(&self) -> Vec<f64> {
        (0..self.points).map(|m| self.momentum_node(m)).collect()
    }

    /// Largest representable momentum, `π/h`.
    pub fn momentum_cutoff(&self) -> f64 {
        PI / self.spacing()
    }

    fn check_interior(&self, x: f64) -> Result<()> {
        let l = self.half_width;
        if x > -l && x < l {
            Ok(())
        } else {
            Err(Error::OutOfDomain { point: x, lo: -l, hi: l })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Position,
    Momentum,
}

impl Representation {
    fn name(self) -> &'static str {
        match self {
            Representation::Position => "position",
            Representation::Momentum => "momentum",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct GridFunction {
    spec: GridSpec,
    repr: Representation,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, repr: Representation, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                spec.len()
            )));
        }
        Ok(Self { spec, repr, samples })
    }

    pub fn zeros(spec: GridSpec, repr: Representation) -> Self {
        Self {
            spec,
            repr,
            samples: vec![Complex64::new(0.0, 0.0); spec.len()],
        }
    }

    /// Samples a function on the position nodes.
    pub fn from_position_fn(spec: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = spec.nodes().into_iter().map(f).collect();
        Self {
            spec,
            repr: Representation::Position,
            samples,
        }
    }

    /// Samples a function on the momentum nodes.
    pub fn from_momentum_fn(spec: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = spec.momentum_nodes().into_iter().map(f).collect();
        Self {
            spec,
            repr: Representation::Momentum,
            samples,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    fn weight(&self) -> f64 {
        match self.repr {
            Representation::Position => self.spec.spacing(),
            Representation::Momentum => self.spec.momentum_spacing(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.weight() * self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.map(|_, z| a * z)
    }

    /// Pointwise map `(node, sample) -> sample` in the current representation.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let nodes = match self.repr {
            Representation::Position => self.spec.nodes(),
            Representation::Momentum => self.spec.momentum_nodes(),
        };
        let samples = nodes
            .into_iter()
            .zip(self.samples.iter())
            .map(|(x, z)| f(x, *z))
            .collect();
        Self {
            spec: self.spec,
            repr: self.repr,
            samples,
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &GridFunction, b: Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        let samples = self
            .samples
            .iter()
            .zip(other.samples.iter())
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self {
            spec: self.spec,
            repr: self.repr,
            samples,
        })
    }

    pub fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch("functions live on different grids".into()));
        }
        if self.repr != other.repr {
            return Err(Error::RepresentationMismatch {
                expected: self.repr.name(),
                found: other.repr.name(),
            });
        }
        Ok(())
    }

    pub fn require(&self, repr: Representation) -> Result<()> {
        if self.repr == repr {
            Ok(())
        } else {
            Err(Error::RepresentationMismatch {
                expected: repr.name(),
                found: self.repr.name(),
            })
        }
    }

    pub fn to_position(&self) -> Self {
        match self.repr {
            Representation::Position => self.clone(),
            Representation::Momentum => transform(self),
        }
    }

    pub fn to_momentum(&self) -> Self {
        match self.repr {
            Representation::Momentum => self.clone(),
            Representation::Position => transform(self),
        }
    }
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if forward {
        planner.plan_fft_forward(len)
    } else {
        planner.plan_fft_inverse(len)
    }
}

fn alternate(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Unitary Fourier transform; toggles the representation.
///
/// Momentum samples are `φ̂(k_m) = (2π)^{-1/2} h Σ_i φ(x_i) e^{-i k_m x_i}`.
/// Because `M/2` is even, `e^{-i k_m x_i} = (-1)^{m+i} e^{-2πi m i / M}`.
pub fn transform(phi: &GridFunction) -> GridFunction {
    let spec = phi.spec;
    let m = spec.len();
    let mut buf: Vec<Complex64> = phi
        .samples
        .iter()
        .enumerate()
        .map(|(i, z)| z * alternate(i))
        .collect();
    let (repr, scale) = match phi.repr {
        Representation::Position => {
            plan(m, true).process(&mut buf);
            (Representation::Momentum, spec.spacing() / (2.0 * PI).sqrt())
        }
        Representation::Momentum => {
            plan(m, false).process(&mut buf);
            (Representation::Position, spec.momentum_spacing() / (2.0 * PI).sqrt())
        }
    };
    for (i, z) in buf.iter_mut().enumerate() {
        *z *= scale * alternate(i);
    }
    GridFunction {
        spec,
        repr,
        samples: buf,
    }
}

/// Discrete `⟨φ, ψ⟩`, conjugate-linear in `φ`.
pub fn inner_product(phi: &GridFunction, psi: &GridFunction) -> Result<Complex64> {
    phi.check_compatible(psi)?;
    let sum: Complex64 = phi
        .samples
        .iter()
        .zip(psi.samples.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * phi.weight())
}

fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `‖⟨P⟩^s ⟨Q⟩^t φ‖`.
pub fn sobolev_norm(phi: &GridFunction, s: f64, t: f64) -> f64 {
    if s == 0.0 && t == 0.0 {
        return phi.norm();
    }
    let weighted = phi.to_position().map(|x, z| z * japanese(x).powf(t));
    if s == 0.0 {
        return weighted.norm();
    }
    transform(&weighted).map(|k, z| z * japanese(k).powf(s)).norm()
}

/// Trigonometric interpolant of position samples.
///
/// The Nyquist mode is carried as a cosine so that real samples interpolate
/// to a real function.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(phi: &GridFunction) -> Self {
        let pos = phi.to_position();
        let m = pos.spec.len();
        let mut buf = pos.samples.clone();
        plan(m, true).process(&mut buf);
        let inv = 1.0 / m as f64;
        for z in buf.iter_mut() {
            *z *= inv;
        }
        Self {
            spec: pos.spec,
            coeffs: buf,
        }
    }

    fn frequency(&self, j: usize) -> i64 {
        let m = self.spec.len();
        if j <= m / 2 {
            j as i64
        } else {
            j as i64 - m as i64
        }
    }

    /// `p`-th derivative of the interpolant at `x` (any real `x`; periodic).
    pub fn derivative(&self, x: f64, p: u32) -> Complex64 {
        let m = self.spec.len();
        let half = m / 2;
        let base = PI / self.spec.half_width();
        let s = x + self.spec.half_width();
        let step = Complex64::from_polar(1.0, base * s);
        let mut total = Complex64::new(0.0, 0.0);
        // positive frequencies 0..half-1
        let mut phasor = Complex64::new(1.0, 0.0);
        for n in 0..half {
            if n % 64 == 0 {
                phasor = Complex64::from_polar(1.0, base * n as f64 * s);
            }
            let w = base * n as f64;
            total += self.coeffs[n] * deriv_factor(w, p) * phasor;
            phasor *= step;
        }
        // negative frequencies -1..-(half-1)
        let back = step.conj();
        let mut phasor = back;
        for n in 1..half {
            if n % 64 == 0 {
                phasor = Complex64::from_polar(1.0, -base * n as f64 * s);
            }
            let w = -base * n as f64;
            total += self.coeffs[m - n] * deriv_factor(w, p) * phasor;
            phasor *= back;
        }
        // Nyquist cosine
        let wn = base * half as f64;
        let shift = p as f64 * 0.5 * PI;
        total += self.coeffs[half] * wn.powi(p as i32) * (wn * s + shift).cos();
        debug_assert_eq!(self.frequency(half), half as i64);
        total
    }

    pub fn value(&self, x: f64) -> Complex64 {
        self.derivative(x, 0)
    }

    /// Samples of the `p`-th derivative on the grid (spectral differentiation).
    pub fn derivative_samples(&self, p: u32) -> GridFunction {
        let m = self.spec.len();
        let half = m / 2;
        let base = PI / self.spec.half_width();
        let mut buf: Vec<Complex64> = (0..m)
            .map(|j| {
                if j == half {
                    // the cosine's odd derivatives vanish at the nodes
                    if p % 2 == 1 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        self.coeffs[j] * base.powi(p as i32) * (half as f64).powi(p as i32) * alternate((p / 2) as usize)
                    }
                } else {
                    let w = base * self.frequency(j) as f64;
                    self.coeffs[j] * deriv_factor(w, p)
                }
            })
            .collect();
        plan(m, false).process(&mut buf);
        GridFunction {
            spec: self.spec,
            repr: Representation::Position,
            samples: buf,
        }
    }
}

fn deriv_factor(w: f64, p: u32) -> Complex64 {
    Complex64::new(0.0, w).powu(p)
}

/// Value at `tau` of the band-limited interpolant of the samples.
pub fn evaluate_at(phi: &GridFunction, tau: f64) -> Result<Complex64> {
    phi.require(Representation::Position)?;
    phi.spec.check_interior(tau)?;
    let h = phi.spec.spacing();
    let i = ((tau + phi.spec.half_width()) / h).round();
    if i >= 0.0 && (i as usize) < phi.spec.len() && phi.spec.node(i as usize) == tau {
        return Ok(phi.samples[i as usize]);
    }
    Ok(TrigInterpolant::new(phi).value(tau))
}

/// Spectral derivative of order `p`, returned in the position representation.
pub fn spectral_derivative(phi: &GridFunction, p: u32) -> GridFunction {
    if p == 0 {
        return phi.to_position();
    }
    TrigInterpolant::new(phi).derivative_samples(p)
}

/// Discrete-time Fourier transform of the position samples at an arbitrary
/// momentum `k`: `(2π)^{-1/2} h Σ_i φ(x_i) e^{-i k x_i}`.
pub fn momentum_at(phi: &GridFunction, k: f64) -> Result<Complex64> {
    phi.require(Representation::Position)?;
    let spec = phi.spec;
    let h = spec.spacing();
    let step = Complex64::from_polar(1.0, -k * h);
    let mut phasor = Complex64::from_polar(1.0, -k * spec.node(0));
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, z) in phi.samples.iter().enumerate() {
        if i % 64 == 0 {
            phasor = Complex64::from_polar(1.0, -k * spec.node(i));
        }
        acc += z * phasor;
        phasor *= step;
    }
    Ok(acc * h / (2.0 * PI).sqrt())
}

/// Witness that a state is compactly supported in energy away from a set of
/// excluded points.
#[derive(Clone, Debug)]
pub struct CompactSupportCertificate {
    pub support: (f64, f64),
    pub sobolev_exponent: f64,
    pub sobolev_norm: f64,
    pub excluded: Vec<(f64, f64)>,
    /// Largest sample modulus found outside the support.
    pub leakage: f64,
}

pub const SUPPORT_LEAKAGE_TOL: f64 = 1e-14;

/// Checks that `phi` vanishes outside `support`, that `support` avoids every
/// excluded ball `(center, radius)`, and that `‖⟨P⟩^s φ‖` is finite.
pub fn certify_support(
    phi: &GridFunction,
    support: (f64, f64),
    s: f64,
    excluded: &[(f64, f64)],
) -> Result<CompactSupportCertificate> {
    phi.require(Representation::Position)?;
    let (a, b) = support;
    let l = phi.spec.half_width();
    if !(a < b) || a <= -l || b >= l {
        return Err(Error::NotInDomain(format!(
            "support [{a}, {b}] must be a nonempty interval inside (-{l}, {l})"
        )));
    }
    let leakage = phi
        .spec
        .nodes()
        .iter()
        .zip(phi.samples.iter())
        .filter(|(x, _)| **x < a || **x > b)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    if leakage > SUPPORT_LEAKAGE_TOL {
        return Err(Error::NotInDomain(format!(
            "samples reach {leakage:.3e} outside [{a}, {b}]"
        )));
    }
    for &(c, r) in excluded {
        if c + r >= a && c - r <= b {
            return Err(Error::NotInDomain(format!(
                "support [{a}, {b}] meets the excluded ball around eigenvalue {c} (radius {r})"
            )));
        }
    }
    let sobolev = sobolev_norm(phi, s, 0.0);
    if !sobolev.is_finite() {
        return Err(Error::NotInDomain(format!("Sobolev norm of order {s} is not finite")));
    }
    Ok(CompactSupportCertificate {
        support,
        sobolev_exponent: s,
        sobolev_norm: sobolev,
        excluded: excluded.to_vec(),
        leakage,
    })
}
