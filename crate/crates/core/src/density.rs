//! Momentum densities `ρ(k) = |φ̂(k)|²` for the free-evolution functionals.
//!
//! Under free evolution the momentum density is simply translated, so every
//! free sojourn time and the propagation functional reduce to integrals of
//! `ρ` against shifted copies of the localization profile.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::grid::{GridFunction, Representation};
use crate::quad::{self, Tolerance};

pub trait MomentumDensity: Sync {
    fn density(&self, k: f64) -> f64;

    /// Interval outside which the density vanishes (may be infinite).
    fn support(&self) -> (f64, f64);

    /// Points where the density is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Points around which most of the mass sits; used to seed quadrature.
    fn landmarks(&self) -> Vec<f64> {
        Vec::new()
    }

    fn moment(&self, p: i32) -> f64 {
        let (a, b) = self.support();
        let mut breaks = self.breakpoints();
        breaks.extend(self.landmarks());
        let tol = Tolerance::absolute(1e-14);
        let f = |k: f64| self.density(k) * k.powi(p);
        if a.is_finite() && b.is_finite() {
            quad::integrate_with_breaks(f, a, b, &breaks, tol).value
        } else {
            let mid = breaks.first().copied().unwrap_or(0.0);
            quad::integrate_lower(f, mid, tol).value + quad::integrate_upper(f, mid, tol).value
        }
    }

    fn mass(&self) -> f64 {
        self.moment(0)
    }

    fn mean_momentum(&self) -> f64 {
        self.moment(1)
    }
}

/// Uniform density on `[a, b]` with unit mass.
#[derive(Clone, Copy, Debug)]
pub struct IndicatorDensity {
    pub a: f64,
    pub b: f64,
}

impl MomentumDensity for IndicatorDensity {
    fn density(&self, k: f64) -> f64 {
        if k >= self.a && k <= self.b {
            1.0 / (self.b - self.a)
        } else {
            0.0
        }
    }
    fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![self.a, self.b]
    }
    fn mass(&self) -> f64 {
        1.0
    }
    fn mean_momentum(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

/// Normal density with mean `k0` and standard deviation `sigma`.
#[derive(Clone, Copy, Debug)]
pub struct GaussianDensity {
    pub k0: f64,
    pub sigma: f64,
}

impl MomentumDensity for GaussianDensity {
    fn density(&self, k: f64) -> f64 {
        let u = (k - self.k0) / self.sigma;
        (-0.5 * u * u).exp() / (self.sigma * (2.0 * PI).sqrt())
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn landmarks(&self) -> Vec<f64> {
        vec![self.k0]
    }
    fn mass(&self) -> f64 {
        1.0
    }
    fn mean_momentum(&self) -> f64 {
        self.k0
    }
}

const OVERSAMPLING: usize = 16;
const STENCIL: usize = 10;

/// Density of a grid state, evaluated off the momentum grid from an
/// oversampled discrete-time Fourier transform.
#[derive(Clone, Debug)]
pub struct SampledDensity {
    step: f64,
    cutoff: f64,
    scale: f64,
    // samples of Σ φ(x_i) e^{-i k x_i} at k = q·step, q in [0, K)
    table: Vec<Complex64>,
    peak: f64,
}

impl SampledDensity {
    pub fn new(phi: &GridFunction) -> Result<Self> {
        let pos = phi.to_position();
        pos.require(Representation::Position)?;
        let spec = *pos.spec();
        let m = spec.len();
        let big = OVERSAMPLING * m;
        let mut buf = vec![Complex64::new(0.0, 0.0); big];
        buf[..m].copy_from_slice(pos.samples());
        FftPlanner::new().plan_fft_forward(big).process(&mut buf);
        let h = spec.spacing();
        let step = 2.0 * PI / (big as f64 * h);
        let l = spec.half_width();
        for (q, z) in buf.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, q as f64 * step * l);
        }
        let mut out = Self {
            step,
            cutoff: spec.momentum_cutoff(),
            scale: h * h / (2.0 * PI),
            table: buf,
            peak: 0.0,
        };
        let (imax, _) = out
            .table
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap_or((0, &Complex64::new(0.0, 0.0)));
        let mut peak = imax as f64 * step;
        if peak >= out.cutoff {
            peak -= 2.0 * out.cutoff;
        }
        out.peak = peak;
        Ok(out)
    }

    fn amplitude(&self, k: f64) -> Complex64 {
        let len = self.table.len() as i64;
        let pos = k / self.step;
        let base = pos.floor() as i64 - (STENCIL as i64 / 2 - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..STENCIL as i64 {
            let node = (base + a) as f64;
            let mut w = 1.0;
            for b in 0..STENCIL as i64 {
                if a != b {
                    let other = (base + b) as f64;
                    w *= (pos - other) / (node - other);
                }
            }
            acc += self.table[(base + a).rem_euclid(len) as usize] * w;
        }
        acc
    }
}

impl MomentumDensity for SampledDensity {
    fn density(&self, k: f64) -> f64 {
        if k.abs() > self.cutoff {
            return 0.0;
        }
        self.scale * self.amplitude(k).norm_sqr()
    }
    fn support(&self) -> (f64, f64) {
        (-self.cutoff, self.cutoff)
    }
    fn landmarks(&self) -> Vec<f64> {
        vec![self.peak]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{bump, gaussian_packet};
    use crate::grid::{make_grid, momentum_at};

    #[test]
    fn sampled_density_matches_direct_dtft() {
        let spec = make_grid(8.0, 512).unwrap();
        let phi = bump(spec, 0.5, 0.25, 10.0);
        let rho = SampledDensity::new(&phi).unwrap();
        for k in [-31.7, -2.0, 0.0, 0.013, 5.5, 40.2] {
            let direct = momentum_at(&phi, k).unwrap().norm_sqr();
            assert!((rho.density(k) - direct).abs() < 1e-12, "k {k}");
        }
        assert!((rho.mass() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn gaussian_packet_moments() {
        let spec = make_grid(16.0, 1024).unwrap();
        let phi = gaussian_packet(spec, 0.0, 1.0, 1.5);
        let rho = SampledDensity::new(&phi).unwrap();
        assert!((rho.mean_momentum() - 1.5).abs() < 1e-10);
        let g = GaussianDensity { k0: 1.5, sigma: 0.5f64.sqrt() };
        for k in [0.0, 1.0, 1.5, 3.0] {
            assert!((rho.density(k) - g.density(k)).abs() < 1e-10);
        }
        assert!((g.moment(0) - 1.0).abs() < 1e-12);
        assert!((g.moment(1) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn indicator_density_moments() {
        let d = IndicatorDensity { a: 1.0, b: 2.0 };
        assert_eq!(d.mass(), 1.0);
        assert_eq!(d.mean_momentum(), 1.5);
        let generic: f64 = quad::integrate_with_breaks(|k| k * d.density(k), 0.0, 3.0, &[1.0, 2.0], Tolerance::default()).value;
        assert!((generic - 1.5).abs() < 1e-14);
    }
}
