//! Exact unitary propagation by one dense eigendecomposition.
//!
//! In the unitary coordinates `y = √h φ` the discretized Hamiltonian is
//! `diag(xᵢ) + Σ λⱼ wⱼ wⱼ*` with `wⱼ = √h vⱼ`, which is itself a Friedrichs
//! model on the momentum circle of circumference `2π/h`. Time horizons must
//! stay well below `π/h` for the discrete free evolution to mimic the line.

use faer::{Mat, Side as FaerSide};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{transform, GridFunction, GridSpec, Representation};
use crate::resolvent::{DiscreteSpectrum, FiniteRankModel};

const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evolution {
    Free,
    Full,
}

#[derive(Clone, Debug)]
enum Basis {
    Identity,
    Real(Mat<f64>),
    Complex(Mat<Complex64>),
}

#[derive(Clone, Debug)]
pub struct Propagator {
    spec: GridSpec,
    energies: Vec<f64>,
    basis: Basis,
    hermiticity_residual: f64,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn build_propagator(model: &FiniteRankModel, spec: GridSpec) -> Result<Propagator> {
    if *model.spec() != spec {
        return Err(Error::GridMismatch("model vectors live on a different grid".into()));
    }
    let nodes = spec.nodes();
    if model.is_free() {
        return Ok(Propagator {
            spec,
            energies: nodes,
            basis: Basis::Identity,
            hermiticity_residual: 0.0,
        });
    }
    let m = spec.len();
    let sh = spec.spacing().sqrt();
    let ws: Vec<Vec<Complex64>> = model
        .vectors()
        .iter()
        .map(|v| v.samples().iter().map(|z| z * sh).collect())
        .collect();
    let lambdas = model.lambdas();
    let real = ws.iter().all(|w| w.iter().all(|z| z.im == 0.0));
    let entry = |i: usize, j: usize| -> Complex64 {
        let mut acc = if i == j { Complex64::new(nodes[i], 0.0) } else { zero() };
        for (w, l) in ws.iter().zip(lambdas) {
            acc += w[i] * w[j].conj() * *l;
        }
        acc
    };
    let (energies, basis, residual) = if real {
        let h = Mat::<f64>::from_fn(m, m, |i, j| entry(i, j).re);
        let evd = h
            .self_adjoint_eigen(FaerSide::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let energies: Vec<f64> = (0..m).map(|i| s[i]).collect();
        (energies, Basis::Real(evd.U().to_owned()), 0.0)
    } else {
        let h = Mat::<Complex64>::from_fn(m, m, entry);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for j in 0..m {
            for i in 0..m {
                num = num.max((h[(i, j)] - h[(j, i)].conj()).norm());
                den = den.max(h[(i, j)].norm());
            }
        }
        let residual = num / den;
        if residual > HERMITICITY_TOL {
            return Err(Error::LinearAlgebra(format!("discrete Hamiltonian is not Hermitian ({residual:.2e})")));
        }
        let evd = h
            .self_adjoint_eigen(FaerSide::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let energies: Vec<f64> = (0..m).map(|i| s[i].re).collect();
        (energies, Basis::Complex(evd.U().to_owned()), residual)
    };
    Ok(Propagator {
        spec,
        energies,
        basis,
        hermiticity_residual: residual,
    })
}

/// A state expanded in the eigenbasis of `H`, keeping only the components
/// that carry weight.
#[derive(Clone, Debug)]
pub struct SpectralPacket {
    indices: Vec<usize>,
    coeffs: Vec<Complex64>,
    energies: Vec<f64>,
    columns: Basis,
}

impl Propagator {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.hermiticity_residual
    }

    pub fn is_free(&self) -> bool {
        matches!(self.basis, Basis::Identity)
    }

    /// Longest time for which the discrete free evolution is trustworthy.
    pub fn max_horizon(&self) -> f64 {
        0.9 * self.spec.momentum_cutoff()
    }

    fn check(&self, phi: &GridFunction) -> Result<()> {
        if *phi.spec() != self.spec {
            return Err(Error::GridMismatch("state and propagator grids differ".into()));
        }
        phi.require(Representation::Position)
    }

    fn unitary_coords(&self, phi: &GridFunction) -> Vec<Complex64> {
        let sh = self.spec.spacing().sqrt();
        phi.samples().iter().map(|z| z * sh).collect()
    }

    fn unitary_to_state(&self, y: Vec<Complex64>) -> GridFunction {
        let s = 1.0 / self.spec.spacing().sqrt();
        let samples = y.into_iter().map(|z| z * s).collect();
        GridFunction::new(self.spec, Representation::Position, samples).expect("length matches grid")
    }

    /// Eigen-coefficients `U* y`.
    pub fn coefficients(&self, phi: &GridFunction) -> Result<Vec<Complex64>> {
        self.check(phi)?;
        let y = self.unitary_coords(phi);
        Ok(adjoint_apply(&self.basis, &y))
    }

    /// Inverse of [`Propagator::coefficients`].
    pub fn synthesize(&self, coeffs: &[Complex64]) -> GridFunction {
        self.unitary_to_state(apply(&self.basis, coeffs))
    }

    /// `e^{-itH₀}φ` or `e^{-itH}φ`.
    pub fn evolve(&self, phi: &GridFunction, t: f64, which: Evolution) -> Result<GridFunction> {
        self.check(phi)?;
        match which {
            Evolution::Free => Ok(phi.map(|x, z| z * Complex64::from_polar(1.0, -t * x))),
            Evolution::Full => {
                let c = self.coefficients(phi)?;
                let c: Vec<Complex64> = c
                    .iter()
                    .zip(&self.energies)
                    .map(|(z, e)| z * Complex64::from_polar(1.0, -t * e))
                    .collect();
                Ok(self.synthesize(&c))
            }
        }
    }

    /// Restricts a state to the eigencomponents above `rel_tol · max |c|`.
    pub fn packet(&self, phi: &GridFunction, rel_tol: f64) -> Result<SpectralPacket> {
        let c = self.coefficients(phi)?;
        Ok(self.packet_from_coefficients(&c, rel_tol))
    }

    pub fn packet_from_coefficients(&self, c: &[Complex64], rel_tol: f64) -> SpectralPacket {
        let peak = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let indices: Vec<usize> = (0..c.len()).filter(|&i| c[i].norm() > rel_tol * peak).collect();
        let m = self.spec.len();
        let columns = match &self.basis {
            Basis::Identity => Basis::Real(Mat::from_fn(m, indices.len(), |i, j| {
                if i == indices[j] {
                    1.0
                } else {
                    0.0
                }
            })),
            Basis::Real(u) => Basis::Real(Mat::from_fn(m, indices.len(), |i, j| u[(i, indices[j])])),
            Basis::Complex(u) => Basis::Complex(Mat::from_fn(m, indices.len(), |i, j| u[(i, indices[j])])),
        };
        SpectralPacket {
            coeffs: indices.iter().map(|&i| c[i]).collect(),
            energies: indices.iter().map(|&i| self.energies[i]).collect(),
            indices,
            columns,
        }
    }
}

impl SpectralPacket {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Unitary coordinates of `e^{-itH}ψ`.
    pub fn evolve_unitary(&self, t: f64) -> Vec<Complex64> {
        let c: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&self.energies)
            .map(|(z, e)| z * Complex64::from_polar(1.0, -t * e))
            .collect();
        apply(&self.columns, &c)
    }
}

fn apply(basis: &Basis, c: &[Complex64]) -> Vec<Complex64> {
    match basis {
        Basis::Identity => c.to_vec(),
        Basis::Real(u) => {
            let rhs = Mat::<f64>::from_fn(c.len(), 2, |i, j| if j == 0 { c[i].re } else { c[i].im });
            let out = u * &rhs;
            (0..u.nrows()).map(|i| Complex64::new(out[(i, 0)], out[(i, 1)])).collect()
        }
        Basis::Complex(u) => {
            let rhs = Mat::<Complex64>::from_fn(c.len(), 1, |i, _| c[i]);
            let out = u * &rhs;
            (0..u.nrows()).map(|i| out[(i, 0)]).collect()
        }
    }
}

fn adjoint_apply(basis: &Basis, y: &[Complex64]) -> Vec<Complex64> {
    match basis {
        Basis::Identity => y.to_vec(),
        Basis::Real(u) => {
            let rhs = Mat::<f64>::from_fn(y.len(), 2, |i, j| if j == 0 { y[i].re } else { y[i].im });
            let out = u.transpose() * &rhs;
            (0..u.ncols()).map(|i| Complex64::new(out[(i, 0)], out[(i, 1)])).collect()
        }
        Basis::Complex(u) => {
            let rhs = Mat::<Complex64>::from_fn(y.len(), 1, |i, _| y[i]);
            let out = u.adjoint() * &rhs;
            (0..u.ncols()).map(|i| out[(i, 0)]).collect()
        }
    }
}

pub(crate) fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

impl DiscreteSpectrum for Propagator {
    fn localized_near(&self, x: f64, radius: f64, window: f64) -> Vec<(f64, f64)> {
        let m = self.spec.len();
        let mut out = Vec::new();
        for (i, &e) in self.energies.iter().enumerate() {
            if (e - x).abs() > radius {
                continue;
            }
            let mut c = vec![zero(); m];
            c[i] = Complex64::new(1.0, 0.0);
            let psi = transform(&self.synthesize(&c));
            let total: f64 = psi.samples().iter().map(|z| z.norm_sqr()).sum();
            let inside: f64 = self
                .spec
                .momentum_nodes()
                .iter()
                .zip(psi.samples())
                .filter(|(k, _)| k.abs() <= window)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            out.push((e, inside / total));
        }
        out
    }
}
