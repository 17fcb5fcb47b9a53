//! Scattering matrix, its energy derivative, and the Eisenbud–Wigner delay.
//!
//! `H₀ = Q` has simple spectrum, so the scattering operator acts on a state
//! by multiplication with the unimodular function `S(x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Representation};
use crate::resolvent::{boundary_matrix, resolvent_matrix, solve_shifted, CMat, FiniteRankModel, Side};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Stationary scattering data at one energy.
#[derive(Clone, Copy, Debug)]
pub struct ScatteringPoint {
    pub x: f64,
    pub s: Complex64,
    pub s_prime: Complex64,
    /// `−i S̄ S′`; its imaginary part is kept for the reality check.
    pub delay: Complex64,
    /// `(1/π) d/dx arg D(x + i0)`.
    pub xi_prime: f64,
}

fn weights(model: &FiniteRankModel, x: f64, p: u32) -> Vec<Complex64> {
    (0..model.rank()).map(|j| model.vector_value(j, x, p)).collect()
}

fn born_term(model: &FiniteRankModel, x: f64) -> f64 {
    model
        .lambdas()
        .iter()
        .enumerate()
        .map(|(j, l)| l * model.vector_value(j, x, 0).norm_sqr())
        .sum()
}

// Σ_{jk} λⱼλₖ aⱼ conj(bₖ) X_{jk}
fn sandwich(lambdas: &[f64], a: &[Complex64], x: &CMat, b: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, lj) in lambdas.iter().enumerate() {
        for (k, lk) in lambdas.iter().enumerate() {
            acc += a[j] * b[k].conj() * x[(j, k)] * (lj * lk);
        }
    }
    acc
}

/// `S(x) = 1 − 2πi[Σ λⱼ|vⱼ(x)|² − Σ λⱼλₖ vⱼ(x) conj(vₖ(x)) X_{jk}(x + i0)]`.
pub fn s_matrix(model: &FiniteRankModel, x: f64) -> Result<Complex64> {
    let bd = boundary_matrix(model, x, Side::Plus, 1)?;
    let xm = resolvent_matrix(model, &bd)?;
    let v = weights(model, x, 0);
    let bracket = born_term(model, x) - sandwich(model.lambdas(), &v, &xm, &v);
    Ok(1.0 - 2.0 * PI * I * bracket)
}

/// `S(x) = D(x − i0) / D(x + i0)`.
pub fn s_matrix_chain(model: &FiniteRankModel, x: f64) -> Result<Complex64> {
    let plus = boundary_matrix(model, x, Side::Plus, 1)?;
    let minus = boundary_matrix(model, x, Side::Minus, 1)?;
    let dp = plus.determinant.unwrap_or(Complex64::new(1.0, 0.0));
    let dm = minus.determinant.unwrap_or(Complex64::new(1.0, 0.0));
    if dp.norm() < crate::resolvent::SINGULAR_DETERMINANT {
        return Err(Error::NearPointSpectrum {
            energy: x,
            det_abs: dp.norm(),
        });
    }
    Ok(dm / dp)
}

/// `S`, `S′`, the delay density and `ξ′` at one energy.
pub fn scattering_point(model: &FiniteRankModel, x: f64) -> Result<ScatteringPoint> {
    if model.rank() == 0 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        return Ok(ScatteringPoint {
            x,
            s: one,
            s_prime: zero,
            delay: zero,
            xi_prime: 0.0,
        });
    }
    if model.mu() < 2.0 {
        log::warn!("derivative of S requested with mu = {} < 2", model.mu());
    }
    let lambdas = model.lambdas();
    let n = model.rank();
    let b1 = boundary_matrix(model, x, Side::Plus, 1)?;
    let b2 = boundary_matrix(model, x, Side::Plus, 2)?;
    let xm = resolvent_matrix(model, &b1)?;
    // dX = (I + rΛ)^{-1} r⁽²⁾ (I − ΛX)
    let i_minus_lx = CMat::from_fn(n, n, |j, k| {
        let id = if j == k { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) - xm[(j, k)] * lambdas[j]
    });
    let rhs = &b2.matrix * &i_minus_lx;
    let dx = solve_shifted(&b1, lambdas, &rhs)?;
    // d/dx log D = tr((I + rΛ)^{-1} r⁽²⁾ Λ)
    let r2l = CMat::from_fn(n, n, |j, k| b2.matrix[(j, k)] * lambdas[k]);
    let dlog = solve_shifted(&b1, lambdas, &r2l)?;
    let trace: Complex64 = (0..n).map(|j| dlog[(j, j)]).sum();

    let v = weights(model, x, 0);
    let dv = weights(model, x, 1);
    let born = born_term(model, x);
    let dborn: f64 = lambdas
        .iter()
        .enumerate()
        .map(|(j, l)| 2.0 * l * (v[j].conj() * dv[j]).re)
        .sum();
    let bracket = born - sandwich(lambdas, &v, &xm, &v);
    let dbracket = dborn
        - sandwich(lambdas, &dv, &xm, &v)
        - sandwich(lambdas, &v, &dx, &v)
        - sandwich(lambdas, &v, &xm, &dv);
    let s = 1.0 - 2.0 * PI * I * bracket;
    let s_prime = -2.0 * PI * I * dbracket;
    Ok(ScatteringPoint {
        x,
        s,
        s_prime,
        delay: -I * s.conj() * s_prime,
        xi_prime: trace.im / PI,
    })
}

pub fn s_prime(model: &FiniteRankModel, x: f64) -> Result<Complex64> {
    scattering_point(model, x).map(|p| p.s_prime)
}

/// Uniform energy grid on `[a, b]` with points inside excluded balls removed.
pub fn energy_grid(a: f64, b: f64, points: usize, excluded: &[(f64, f64)]) -> Vec<f64> {
    let n = points.max(2);
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .filter(|x| excluded.iter().all(|(c, r)| (x - c).abs() > *r))
        .collect()
}

/// Tabulated scattering data on an energy grid.
#[derive(Clone, Debug)]
pub struct ScatteringCurve {
    pub points: Vec<ScatteringPoint>,
    pub excluded: Vec<(f64, f64)>,
}

pub fn scattering_curve(model: &FiniteRankModel, energies: &[f64], excluded: &[(f64, f64)]) -> Result<ScatteringCurve> {
    if energies.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidModel("energy grid must be strictly increasing".into()));
    }
    let points = energies
        .par_iter()
        .map(|&x| scattering_point(model, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScatteringCurve {
        points,
        excluded: excluded.to_vec(),
    })
}

impl ScatteringCurve {
    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.x, self.points.last()?.x))
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.points.iter().map(|p| (p.s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_delay_imaginary(&self) -> f64 {
        self.points.iter().map(|p| p.delay.im.abs()).fold(0.0, f64::max)
    }

    /// `max |θ′ + 2πξ′|`.
    pub fn max_birman_krein_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.delay.re + 2.0 * PI * p.xi_prime).abs())
            .fold(0.0, f64::max)
    }

    fn bracket(&self, x: f64) -> Option<usize> {
        let (a, b) = self.range()?;
        if x < a || x > b || self.points.len() < 2 {
            return None;
        }
        let i = self.points.partition_point(|p| p.x <= x);
        Some(i.clamp(1, self.points.len() - 1) - 1)
    }

    /// Cubic Hermite interpolation of `S` from the tabulated `S` and `S′`.
    pub fn s_at(&self, x: f64) -> Option<Complex64> {
        let i = self.bracket(x)?;
        let (p, q) = (&self.points[i], &self.points[i + 1]);
        let dx = q.x - p.x;
        let t = (x - p.x) / dx;
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        // h00 = 1 - h01, written as an increment so a constant S is reproduced exactly
        Some(p.s + (q.s - p.s) * h01 + p.s_prime * (h10 * dx) + q.s_prime * (h11 * dx))
    }

    fn lagrange(&self, x: f64, value: impl Fn(&ScatteringPoint) -> f64) -> Option<f64> {
        let i = self.bracket(x)?;
        let n = self.points.len();
        if n < 4 {
            let (p, q) = (&self.points[i], &self.points[i + 1]);
            let t = (x - p.x) / (q.x - p.x);
            return Some(value(p) * (1.0 - t) + value(q) * t);
        }
        let start = i.saturating_sub(1).min(n - 4);
        let nodes = &self.points[start..start + 4];
        let mut acc = 0.0;
        for (a, pa) in nodes.iter().enumerate() {
            let mut w = 1.0;
            for (b, pb) in nodes.iter().enumerate() {
                if a != b {
                    w *= (x - pb.x) / (pa.x - pb.x);
                }
            }
            acc += w * value(pa);
        }
        Some(acc)
    }

    /// Local cubic interpolation of the delay density `θ′`.
    pub fn delay_at(&self, x: f64) -> Option<f64> {
        self.lagrange(x, |p| p.delay.re)
    }

    pub fn xi_prime_at(&self, x: f64) -> Option<f64> {
        self.lagrange(x, |p| p.xi_prime)
    }

    fn check_state(&self, phi: &GridFunction) -> Result<()> {
        phi.require(Representation::Position)?;
        let (a, b) = self
            .range()
            .ok_or_else(|| Error::NotInDomain("empty energy grid".into()))?;
        for (x, z) in phi.spec().nodes().iter().zip(phi.samples()) {
            if z.norm() <= crate::grid::SUPPORT_LEAKAGE_TOL {
                continue;
            }
            if *x < a || *x > b {
                return Err(Error::NotInDomain(format!(
                    "state is nonzero at {x}, outside the energy grid [{a}, {b}]"
                )));
            }
            if let Some((c, r)) = self.excluded.iter().find(|(c, r)| (x - c).abs() <= *r) {
                return Err(Error::NotInDomain(format!(
                    "state is nonzero at {x}, within {r} of the eigenvalue {c}"
                )));
            }
        }
        Ok(())
    }

    fn weighted_sum(&self, phi: &GridFunction, value: impl Fn(f64) -> Option<f64>) -> Result<f64> {
        self.check_state(phi)?;
        let h = phi.spec().spacing();
        let mut acc = 0.0;
        for (x, z) in phi.spec().nodes().iter().zip(phi.samples()) {
            let w = z.norm_sqr();
            if w == 0.0 {
                continue;
            }
            acc += w * value(*x).unwrap_or(0.0);
        }
        Ok(h * acc)
    }
}

/// `∫ |φ(x)|² θ′(x) dx` with `θ′ = −i S̄ S′`.
pub fn ew_time_delay(curve: &ScatteringCurve, phi: &GridFunction) -> Result<f64> {
    curve.weighted_sum(phi, |x| curve.delay_at(x))
}

/// `∫ |φ(x)|² ξ′(x) dx`.
pub fn spectral_shift_integral(curve: &ScatteringCurve, phi: &GridFunction) -> Result<f64> {
    curve.weighted_sum(phi, |x| curve.xi_prime_at(x))
}

/// `ξ′` on the energy grid, from the phase of the perturbation determinant.
pub fn spectral_shift_density(curve: &ScatteringCurve) -> Vec<f64> {
    curve.points.iter().map(|p| p.xi_prime).collect()
}

/// `(Sφ)(x) = S(x) φ(x)`.
pub fn apply_scattering(curve: &ScatteringCurve, phi: &GridFunction) -> Result<GridFunction> {
    curve.check_state(phi)?;
    let samples = phi
        .spec()
        .nodes()
        .iter()
        .zip(phi.samples())
        .map(|(x, z)| {
            if z.norm() == 0.0 {
                *z
            } else {
                curve.s_at(*x).map_or(Complex64::new(0.0, 0.0), |s| s * z)
            }
        })
        .collect();
    GridFunction::new(*phi.spec(), Representation::Position, samples)
}
