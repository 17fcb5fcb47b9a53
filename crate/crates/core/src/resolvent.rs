//! Boundary values of the free and perturbed resolvents on the real axis.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{inner_product, sobolev_norm, GridFunction, GridSpec, Representation, TrigInterpolant};

pub type CMat = Mat<Complex64>;

const ORTHONORMALITY_TOL: f64 = 1e-10;
const BOUNDARY_DECAY_TOL: f64 = 1e-12;
/// Below this `|D(x+i0)|` the resolvent is not evaluated.
pub const SINGULAR_DETERMINANT: f64 = 1e-8;
/// Maximal order of resolvent boundary values supported by the cache.
pub const MAX_ORDER: usize = 3;

/// `H = Q + Σ λⱼ |vⱼ⟩⟨vⱼ|` with orthonormal `vⱼ`.
#[derive(Clone, Debug)]
pub struct FiniteRankModel {
    spec: GridSpec,
    lambdas: Vec<f64>,
    vectors: Vec<GridFunction>,
    mu: f64,
    vector_interp: Vec<TrigInterpolant>,
    // interpolants of g_jk = conj(v_j) v_k, row-major
    pair_interp: Vec<TrigInterpolant>,
    // derivative samples of g_jk up to MAX_ORDER - 1, indexed [order][pair]
    pair_derivs: Vec<Vec<GridFunction>>,
}

impl FiniteRankModel {
    pub fn new(spec: GridSpec, lambdas: Vec<f64>, vectors: Vec<GridFunction>, mu: f64) -> Result<Self> {
        if lambdas.len() != vectors.len() {
            return Err(Error::InvalidModel(format!(
                "lambdas has length {} but {} vectors were given",
                lambdas.len(),
                vectors.len()
            )));
        }
        if let Some(l) = lambdas.iter().find(|l| !l.is_finite()) {
            return Err(Error::InvalidModel(format!("coupling {l} is not finite")));
        }
        let vectors: Vec<GridFunction> = vectors.iter().map(|v| v.to_position()).collect();
        for (j, v) in vectors.iter().enumerate() {
            if *v.spec() != spec {
                return Err(Error::GridMismatch(format!("vector {j} lives on a different grid")));
            }
            let s = v.samples();
            let edge = s[..4].iter().chain(&s[s.len() - 4..]).map(|z| z.norm()).fold(0.0, f64::max);
            if edge > BOUNDARY_DECAY_TOL {
                return Err(Error::InvalidModel(format!(
                    "vector {j} is {edge:.2e} at the box boundary; enlarge the box"
                )));
            }
            let sob = sobolev_norm(v, mu, 0.0);
            if !sob.is_finite() {
                return Err(Error::InvalidModel(format!("vector {j} has infinite Sobolev norm of order {mu}")));
            }
        }
        for (j, a) in vectors.iter().enumerate() {
            for (k, b) in vectors.iter().enumerate().skip(j) {
                let ip = inner_product(a, b)?;
                let target = if j == k { 1.0 } else { 0.0 };
                if (ip - target).norm() > ORTHONORMALITY_TOL {
                    return Err(Error::InvalidModel(format!(
                        "vectors {j} and {k} are not orthonormal: <v{j}, v{k}> = {ip}"
                    )));
                }
            }
        }
        let vector_interp = vectors.iter().map(TrigInterpolant::new).collect();
        let mut pair_interp = Vec::new();
        let mut pairs = Vec::new();
        for a in &vectors {
            for b in &vectors {
                let g = GridFunction::new(
                    spec,
                    Representation::Position,
                    a.samples().iter().zip(b.samples()).map(|(x, y)| x.conj() * y).collect(),
                )?;
                pair_interp.push(TrigInterpolant::new(&g));
                pairs.push(g);
            }
        }
        let pair_derivs = (0..MAX_ORDER)
            .map(|p| {
                if p == 0 {
                    pairs.clone()
                } else {
                    pair_interp.iter().map(|t| t.derivative_samples(p as u32)).collect()
                }
            })
            .collect();
        Ok(Self {
            spec,
            lambdas,
            vectors,
            mu,
            vector_interp,
            pair_interp,
            pair_derivs,
        })
    }

    /// The unperturbed model `V = 0`.
    pub fn free(spec: GridSpec) -> Self {
        Self::new(spec, Vec::new(), Vec::new(), f64::INFINITY).expect("empty model is valid")
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn vectors(&self) -> &[GridFunction] {
        &self.vectors
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_free(&self) -> bool {
        self.lambdas.iter().all(|l| *l == 0.0)
    }

    /// `vⱼ^{(p)}(x)` from the band-limited interpolant.
    pub fn vector_value(&self, j: usize, x: f64, p: u32) -> Complex64 {
        if p == 0 {
            if let Some(i) = self.node_index(x) {
                return self.vectors[j].samples()[i];
            }
        }
        self.vector_interp[j].derivative(x, p)
    }

    fn node_index(&self, x: f64) -> Option<usize> {
        let h = self.spec.spacing();
        let i = ((x + self.spec.half_width()) / h).round();
        (i >= 0.0 && (i as usize) < self.spec.len() && self.spec.node(i as usize) == x).then_some(i as usize)
    }

    /// `Σ λⱼ² |vⱼ(x)|²`.
    pub fn coupling_weight(&self, x: f64) -> f64 {
        (0..self.rank())
            .map(|j| self.lambdas[j].powi(2) * self.vector_value(j, x, 0).norm_sqr())
            .sum()
    }

    fn check_energy(&self, x: f64) -> Result<()> {
        let l = self.spec.half_width();
        let margin = 10.0 * self.spec.spacing();
        if x.is_finite() && x > -l + margin && x < l - margin {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                point: x,
                lo: -l + margin,
                hi: l - margin,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// `r⁽ⁿ⁾_{jk}(x ± i0) = ⟨vⱼ, R₀ⁿ(x ± i0) vₖ⟩` and, for `n = 1`, `D(x ± i0)`.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub energy: f64,
    pub side: Side,
    pub order: usize,
    pub matrix: CMat,
    pub determinant: Option<Complex64>,
}

const BERNOULLI: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];

/// Principal value from samples and the values `g(x), g'(x), g''(x)`.
fn pv_core(spec: &GridSpec, samples: &[Complex64], x: f64, g: [Complex64; 3]) -> Complex64 {
    let h = spec.spacing();
    let l = spec.half_width();
    let quotient = |xi: f64, gi: Complex64| {
        let d = xi - x;
        if d.abs() < 1e-5 {
            g[1] + g[2] * (0.5 * d)
        } else {
            (gi - g[0]) / d
        }
    };
    // trapezoid on [-L, L]; g(L) = g(-L) by periodicity
    let mut sum = quotient(-l, samples[0]) * 0.5 + quotient(l, samples[0]) * 0.5;
    for (i, gi) in samples.iter().enumerate().skip(1) {
        sum += quotient(spec.node(i), *gi);
    }
    sum *= h;
    // the subtracted integrand behaves like -g(x)/(k-x) near the ends
    let mut correction = 0.0;
    for (p, b) in BERNOULLI.iter().enumerate() {
        let q = 2 * (p + 1) as i32;
        correction += b / q as f64 * ((h / (l - x)).powi(q) - (h / (-l - x)).powi(q));
    }
    sum - g[0] * correction + g[0] * ((l - x) / (l + x)).ln()
}

/// `P.V. ∫ g(k) / (k − x) dk` by singularity subtraction.
pub fn pv_integral(g: &GridFunction, x: f64) -> Result<Complex64> {
    g.require(Representation::Position)?;
    let spec = *g.spec();
    let l = spec.half_width();
    let margin = 10.0 * spec.spacing();
    if !(x > -l + margin && x < l - margin) {
        return Err(Error::OutOfDomain {
            point: x,
            lo: -l + margin,
            hi: l - margin,
        });
    }
    let t = TrigInterpolant::new(g);
    let vals = [t.derivative(x, 0), t.derivative(x, 1), t.derivative(x, 2)];
    Ok(pv_core(&spec, g.samples(), x, vals))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Boundary values of order `n` of the free resolvent in the model vectors.
pub fn boundary_matrix(model: &FiniteRankModel, x: f64, side: Side, n: usize) -> Result<BoundaryData> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidModel(format!("resolvent order {n} outside 1..={MAX_ORDER}")));
    }
    model.check_energy(x)?;
    if model.mu < (n + 1) as f64 {
        log::warn!("vectors declared with mu = {} but order {n} boundary values assume mu >= {}", model.mu, n + 1);
    }
    let nr = model.rank();
    let p = (n - 1) as u32;
    let norm = factorial(n - 1);
    let mut matrix = CMat::zeros(nr, nr);
    for j in 0..nr {
        for k in 0..nr {
            let idx = j * nr + k;
            let t = &model.pair_interp[idx];
            let vals = [t.derivative(x, p), t.derivative(x, p + 1), t.derivative(x, p + 2)];
            let samples = model.pair_derivs[n - 1][idx].samples();
            let pv = pv_core(&model.spec, samples, x, vals);
            let jump = Complex64::new(0.0, side.sign() * PI) * vals[0];
            matrix[(j, k)] = (pv + jump) / norm;
        }
    }
    let determinant = (n == 1).then(|| determinant_of(&matrix, model.lambdas()));
    Ok(BoundaryData {
        energy: x,
        side,
        order: n,
        matrix,
        determinant,
    })
}

fn one_plus_r_lambda(r: &CMat, lambdas: &[f64]) -> CMat {
    let n = lambdas.len();
    CMat::from_fn(n, n, |j, k| {
        let id = if j == k { 1.0 } else { 0.0 };
        r[(j, k)] * lambdas[k] + id
    })
}

fn determinant_of(r: &CMat, lambdas: &[f64]) -> Complex64 {
    if lambdas.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    one_plus_r_lambda(r, lambdas).determinant()
}

/// `D(x ± i0) = det(I + r⁽¹⁾(x ± i0) Λ)`.
pub fn perturbation_determinant(model: &FiniteRankModel, x: f64, side: Side) -> Result<Complex64> {
    let bd = boundary_matrix(model, x, side, 1)?;
    Ok(bd.determinant.unwrap_or(Complex64::new(1.0, 0.0)))
}

/// Solves `(I + r Λ) Y = rhs`, refusing near-singular systems.
pub(crate) fn solve_shifted(bd: &BoundaryData, lambdas: &[f64], rhs: &CMat) -> Result<CMat> {
    let det = bd.determinant.unwrap_or_else(|| determinant_of(&bd.matrix, lambdas));
    if det.norm() < SINGULAR_DETERMINANT {
        return Err(Error::NearPointSpectrum {
            energy: bd.energy,
            det_abs: det.norm(),
        });
    }
    if lambdas.is_empty() {
        return Ok(rhs.clone());
    }
    let a = one_plus_r_lambda(&bd.matrix, lambdas);
    Ok(a.partial_piv_lu().solve(rhs))
}

/// `X_{jk}(x ± i0) = ⟨vⱼ, R(x ± i0) vₖ⟩` from `(I + r⁽¹⁾Λ) X = r⁽¹⁾`.
pub fn resolvent_matrix(model: &FiniteRankModel, bd: &BoundaryData) -> Result<CMat> {
    if bd.order != 1 {
        return Err(Error::InvalidModel("resolvent_matrix needs first-order boundary data".into()));
    }
    solve_shifted(bd, model.lambdas(), &bd.matrix)
}

/// Eigenvalues of `H` found on a scan of the real axis.
#[derive(Clone, Debug, Default)]
pub struct PointSpectrum {
    pub eigenvalues: Vec<f64>,
    pub exclusion_radii: Vec<f64>,
    pub details: Vec<EigenvalueReport>,
}

impl PointSpectrum {
    /// `(center, radius)` pairs for support certificates.
    pub fn excluded(&self) -> Vec<(f64, f64)> {
        self.eigenvalues.iter().copied().zip(self.exclusion_radii.iter().copied()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct EigenvalueReport {
    pub energy: f64,
    pub det_abs: f64,
    pub coupling_weight: f64,
    /// `‖(H − x₀)ψ‖ / ‖ψ‖` for the stationary eigenvector on the grid.
    pub residual: f64,
    /// Nearest eigenvalue of the discretized Hamiltonian with a localized
    /// eigenvector, if a discrete cross-check was requested.
    pub discrete_energy: Option<f64>,
    pub discrete_localization: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    pub det_threshold: f64,
    pub coupling_threshold: f64,
    pub exclusion_radius: f64,
    pub localization_threshold: f64,
    /// Momentum window `|k| ≤ fraction · π/h` used for localization.
    pub window_fraction: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            det_threshold: 1e-6,
            coupling_threshold: 1e-6,
            exclusion_radius: 0.05,
            localization_threshold: 0.99,
            window_fraction: 0.1,
        }
    }
}

/// Discretized-Hamiltonian eigenpairs used to validate candidates.
pub trait DiscreteSpectrum {
    /// Eigenvalues near `x` paired with the fraction of eigenvector mass in
    /// the momentum window.
    fn localized_near(&self, x: f64, radius: f64, window: f64) -> Vec<(f64, f64)>;
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn null_vector(bd: &BoundaryData, lambdas: &[f64]) -> Vec<Complex64> {
    let n = lambdas.len();
    let a = one_plus_r_lambda(&bd.matrix, lambdas);
    // one step of inverse iteration from a generic start
    let rhs = CMat::from_fn(n, 1, |j, _| Complex64::new(1.0, 0.1 * j as f64));
    let y = a.partial_piv_lu().solve(&rhs);
    let norm: f64 = (0..n).map(|j| y[(j, 0)].norm_sqr()).sum::<f64>().sqrt();
    (0..n).map(|j| y[(j, 0)] / norm).collect()
}

/// Grid residual of the eigenvector `ψ = −Σ λⱼ aⱼ vⱼ / (Q − x₀)`.
fn eigenvector_residual(model: &FiniteRankModel, x0: f64, a: &[Complex64]) -> Result<f64> {
    let spec = model.spec;
    let nr = model.rank();
    let numerator = |x: f64, p: u32| -> Complex64 {
        (0..nr)
            .map(|j| -model.lambdas[j] * a[j] * model.vector_value(j, x, p))
            .sum()
    };
    let samples: Vec<Complex64> = spec
        .nodes()
        .iter()
        .map(|&x| {
            let d = x - x0;
            if d.abs() < 1e-6 {
                numerator(x0, 1) + numerator(x0, 2) * (0.5 * d)
            } else {
                numerator(x, 0) / d
            }
        })
        .collect();
    let psi = GridFunction::new(spec, Representation::Position, samples)?;
    let mut out = psi.map(|x, z| (x - x0) * z);
    for j in 0..nr {
        let c = inner_product(&model.vectors[j], &psi)? * model.lambdas[j];
        out = out.combine(Complex64::new(1.0, 0.0), &model.vectors[j], c)?;
    }
    Ok(out.norm() / psi.norm())
}

/// Embedded eigenvalues: dips of `|D(x + i0)|` where every `vⱼ(x)` is small.
pub fn point_spectrum(
    model: &FiniteRankModel,
    scan: &[f64],
    options: SpectrumOptions,
    discrete: Option<&dyn DiscreteSpectrum>,
) -> Result<PointSpectrum> {
    let mut out = PointSpectrum::default();
    if model.is_free() || scan.len() < 3 {
        return Ok(out);
    }
    let dabs = |x: f64| perturbation_determinant(model, x, Side::Plus).map(|d| d.norm());
    let values: Vec<f64> = scan.iter().map(|&x| dabs(x)).collect::<Result<_>>()?;
    for i in 1..scan.len() - 1 {
        if !(values[i] <= values[i - 1] && values[i] <= values[i + 1]) {
            continue;
        }
        let x0 = golden_min(|x| dabs(x).unwrap_or(f64::INFINITY), scan[i - 1], scan[i + 1], 1e-12);
        let det = perturbation_determinant(model, x0, Side::Plus)?;
        let weight = model.coupling_weight(x0);
        if det.norm() >= options.det_threshold || weight >= options.coupling_threshold {
            continue;
        }
        let bd = boundary_matrix(model, x0, Side::Plus, 1)?;
        let a = null_vector(&bd, model.lambdas());
        let residual = eigenvector_residual(model, x0, &a)?;
        let mut report = EigenvalueReport {
            energy: x0,
            det_abs: det.norm(),
            coupling_weight: weight,
            residual,
            discrete_energy: None,
            discrete_localization: None,
        };
        if let Some(d) = discrete {
            let window = options.window_fraction * model.spec.momentum_cutoff();
            let best = d
                .localized_near(x0, options.exclusion_radius, window)
                .into_iter()
                .max_by(|p, q| p.1.total_cmp(&q.1));
            match best {
                Some((e, frac)) if frac >= options.localization_threshold => {
                    report.discrete_energy = Some(e);
                    report.discrete_localization = Some(frac);
                }
                other => {
                    log::info!("candidate {x0} rejected by the discrete check: {other:?}");
                    continue;
                }
            }
        }
        if out.eigenvalues.last().is_some_and(|e| (e - x0).abs() < 1e-8) {
            continue;
        }
        out.eigenvalues.push(x0);
        out.exclusion_radii.push(options.exclusion_radius);
        out.details.push(report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{gaussian, hermite, nodal_gaussian};
    use crate::grid::make_grid;

    const F0: (f64, f64) = (0.0, 1.772_453_850_905_515_9);
    const F05: (f64, f64) = (-0.848_872_767_004_044_6, 1.380_388_447_043_143);
    const F1: (f64, f64) = (-1.076_159_013_825_536_8, 0.652_049_332_173_292_2);
    const FM13: (f64, f64) = (0.966_795_034_769_648_5, 0.327_052_340_868_626_5);
    const F2: (f64, f64) = (-0.602_680_777_847_584, 0.032_463_624_680_131_72);

    fn gaussian_model(lambda: f64) -> FiniteRankModel {
        let spec = make_grid(16.0, 2048).unwrap();
        FiniteRankModel::new(spec, vec![lambda], vec![gaussian(spec, 0.0, 1.0)], 10.0).unwrap()
    }

    #[test]
    fn pv_examples() {
        let spec = make_grid(16.0, 2048).unwrap();
        let g = GridFunction::from_position_fn(spec, |k| Complex64::new((-k * k).exp() / PI.sqrt(), 0.0));
        assert!(pv_integral(&g, 0.0).unwrap().norm() < 1e-10);
        let v = pv_integral(&g, 1.0).unwrap();
        assert!((v.re - F1.0).abs() < 1e-10, "{v}");
        let zero = GridFunction::zeros(spec, Representation::Position);
        assert_eq!(pv_integral(&zero, 0.3).unwrap(), Complex64::new(0.0, 0.0));
        assert!(pv_integral(&g, 15.95).is_err());
    }

    #[test]
    fn pv_of_slowly_decaying_function() {
        // a wide Gaussian: the subtracted integrand is far from periodic, so
        // the endpoint corrections matter
        let spec = make_grid(16.0, 2048).unwrap();
        let g = GridFunction::from_position_fn(spec, |k| Complex64::new((-0.2 * k * k).exp(), 0.0));
        let x = 0.7;
        let reference = crate::quad::integrate_with_breaks(
            |k: f64| {
                let gk = (-0.2 * k * k).exp();
                let gx = (-0.2 * x * x).exp();
                (gk - gx) / (k - x)
            },
            -16.0,
            16.0,
            &[x],
            crate::quad::Tolerance::default(),
        )
        .value
            + (-0.2 * x * x).exp() * ((16.0 - x) / (16.0 + x)).ln();
        let v = pv_integral(&g, x).unwrap();
        assert!((v.re - reference).abs() < 1e-10, "{} vs {reference}", v.re);
    }

    #[test]
    fn rank_one_boundary_values_match_dawson_form() {
        let model = gaussian_model(1.0);
        for (x, f) in [(0.0, F0), (0.5, F05), (1.0, F1), (-1.3, FM13), (2.0, F2)] {
            let plus = boundary_matrix(&model, x, Side::Plus, 1).unwrap().matrix[(0, 0)];
            let minus = boundary_matrix(&model, x, Side::Minus, 1).unwrap().matrix[(0, 0)];
            assert!((plus - Complex64::new(f.0, f.1)).norm() < 1e-10, "x {x}: {plus}");
            assert!((minus - Complex64::new(f.0, -f.1)).norm() < 1e-10);
        }
    }

    #[test]
    fn resolvent_matrix_identities() {
        let model = gaussian_model(0.7);
        let bd = boundary_matrix(&model, 0.5, Side::Plus, 1).unwrap();
        let f = bd.matrix[(0, 0)];
        let x = resolvent_matrix(&model, &bd).unwrap();
        assert!((x[(0, 0)] - f / (1.0 + 0.7 * f)).norm() < 1e-14);
        assert!((bd.determinant.unwrap() - (1.0 + 0.7 * f)).norm() < 1e-14);

        let free = gaussian_model(0.0);
        let bd0 = boundary_matrix(&free, 0.5, Side::Plus, 1).unwrap();
        assert_eq!(resolvent_matrix(&free, &bd0).unwrap()[(0, 0)], bd0.matrix[(0, 0)]);
        assert_eq!(bd0.determinant.unwrap(), Complex64::new(1.0, 0.0));

        // a decoupled second vector leaves the first block unchanged
        let spec = *model.spec();
        let two = FiniteRankModel::new(
            spec,
            vec![0.7, 0.0],
            vec![hermite(spec, 0, 0.0, 1.0), hermite(spec, 1, 0.0, 1.0)],
            10.0,
        )
        .unwrap();
        let bd2 = boundary_matrix(&two, 0.5, Side::Plus, 1).unwrap();
        let x2 = resolvent_matrix(&two, &bd2).unwrap();
        assert!((x2[(0, 0)] - x[(0, 0)]).norm() < 1e-12);
    }

    #[test]
    fn determinant_of_two_by_two() {
        let spec = make_grid(16.0, 2048).unwrap();
        let model = FiniteRankModel::new(
            spec,
            vec![0.8, -0.4],
            vec![hermite(spec, 0, 0.2, 1.1), hermite(spec, 1, 0.2, 1.1)],
            10.0,
        )
        .unwrap();
        let bd = boundary_matrix(&model, -0.3, Side::Minus, 1).unwrap();
        let r = &bd.matrix;
        let direct = (1.0 + r[(0, 0)] * 0.8) * (1.0 + r[(1, 1)] * -0.4) - r[(0, 1)] * -0.4 * r[(1, 0)] * 0.8;
        assert!((bd.determinant.unwrap() - direct).norm() < 1e-14);
    }

    #[test]
    fn second_order_is_derivative_of_first() {
        let model = gaussian_model(1.0);
        let x = 0.4;
        let step = 1e-3;
        let r2 = boundary_matrix(&model, x, Side::Plus, 2).unwrap().matrix[(0, 0)];
        let at = |y: f64| boundary_matrix(&model, y, Side::Plus, 1).unwrap().matrix[(0, 0)];
        let fd = (at(x - 2.0 * step) - at(x + 2.0 * step) + (at(x + step) - at(x - step)) * 8.0) / (12.0 * step);
        assert!((fd - r2).norm() / r2.norm() < 1e-7, "{fd} vs {r2}");
    }

    #[test]
    fn near_singular_energy_is_rejected() {
        let model = gaussian_model(1.0);
        let mut bd = boundary_matrix(&model, 0.0, Side::Plus, 1).unwrap();
        bd.determinant = Some(Complex64::new(1e-10, 0.0));
        assert!(matches!(resolvent_matrix(&model, &bd), Err(Error::NearPointSpectrum { .. })));
    }

    #[test]
    fn model_validation() {
        let spec = make_grid(16.0, 1024).unwrap();
        let g = gaussian(spec, 0.0, 1.0);
        assert!(FiniteRankModel::new(spec, vec![1.0, 2.0], vec![g.clone()], 5.0).is_err());
        assert!(FiniteRankModel::new(spec, vec![1.0, 2.0], vec![g.clone(), g.clone()], 5.0).is_err());
        assert!(FiniteRankModel::new(spec, vec![1.0], vec![gaussian(spec, 0.0, 6.0)], 5.0).is_err());
        let other = make_grid(8.0, 1024).unwrap();
        assert!(FiniteRankModel::new(other, vec![1.0], vec![g], 5.0).is_err());
    }

    #[test]
    fn nodal_vector_has_embedded_eigenvalue() {
        let spec = make_grid(16.0, 2048).unwrap();
        let v = nodal_gaussian(spec, 0.5);
        let model = FiniteRankModel::new(spec, vec![1.5], vec![v], 10.0).unwrap();
        let f = boundary_matrix(&model, 0.5, Side::Plus, 1).unwrap().matrix[(0, 0)];
        assert!((f.re + 2.0 / 3.0).abs() < 1e-10 && f.im.abs() < 1e-12, "{f}");
        let scan: Vec<f64> = (0..=400).map(|i| -4.0 + 0.02 * i as f64).collect();
        let ps = point_spectrum(&model, &scan, SpectrumOptions::default(), None).unwrap();
        assert_eq!(ps.eigenvalues.len(), 1, "{ps:?}");
        assert!((ps.eigenvalues[0] - 0.5).abs() < 1e-4);
        assert!(ps.details[0].residual < 1e-6);
    }

    #[test]
    fn gaussian_model_has_no_eigenvalues() {
        let model = gaussian_model(-2.0);
        let scan: Vec<f64> = (0..=200).map(|i| -4.0 + 0.04 * i as f64).collect();
        let ps = point_spectrum(&model, &scan, SpectrumOptions::default(), None).unwrap();
        assert!(ps.eigenvalues.is_empty());
    }
}
