//! Named families of coupling vectors and test states sampled on a grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{inner_product, GridFunction, GridSpec};

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(π w²)^{-1/4} exp(−(x−c)²/(2w²))`, unit norm on ℝ.
pub fn gaussian(spec: GridSpec, center: f64, width: f64) -> GridFunction {
    let norm = (PI * width * width).powf(-0.25);
    GridFunction::from_position_fn(spec, |x| {
        let u = (x - center) / width;
        real(norm * (-0.5 * u * u).exp())
    })
}

/// Value of the normalized Hermite function `ψ_n(u)`.
pub fn hermite_function(n: usize, u: f64) -> f64 {
    let g = PI.powf(-0.25) * (-0.5 * u * u).exp();
    if n == 0 {
        return g;
    }
    let mut prev = g;
    let mut cur = std::f64::consts::SQRT_2 * u * g;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 / (kf + 1.0)).sqrt() * u * cur) - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Hermite function of order `n`, shifted to `center` and dilated by `width`.
pub fn hermite(spec: GridSpec, n: usize, center: f64, width: f64) -> GridFunction {
    let scale = width.sqrt().recip();
    GridFunction::from_position_fn(spec, |x| real(scale * hermite_function(n, (x - center) / width)))
}

/// `c (x − x₀) e^{−x²/2}`: a unit vector vanishing at `x₀`.
pub fn nodal_gaussian(spec: GridSpec, node: f64) -> GridFunction {
    let norm2 = PI.sqrt() * (0.5 + node * node);
    let c = norm2.sqrt().recip();
    GridFunction::from_position_fn(spec, |x| real(c * (x - node) * (-0.5 * x * x).exp()))
}

/// Piecewise-linear interpolation of tabulated `(x, value)` pairs, zero
/// outside the table. The table must be sorted by `x`.
pub fn tabulated(spec: GridSpec, table: &[(f64, Complex64)]) -> Result<GridFunction> {
    if table.len() < 2 {
        return Err(Error::InvalidModel("a tabulated vector needs at least two rows".into()));
    }
    if table.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::InvalidModel("tabulated abscissae must increase strictly".into()));
    }
    let first = table[0].0;
    let last = table[table.len() - 1].0;
    Ok(GridFunction::from_position_fn(spec, |x| {
        if x < first || x > last {
            return Complex64::new(0.0, 0.0);
        }
        let idx = table.partition_point(|(t, _)| *t <= x).clamp(1, table.len() - 1);
        let (x0, y0) = table[idx - 1];
        let (x1, y1) = table[idx];
        let s = (x - x0) / (x1 - x0);
        y0 * (1.0 - s) + y1 * s
    }))
}

/// Smooth compactly supported bump `exp(−c/(1−u²))`, `u = (x−center)/half_width`,
/// normalized in the discrete norm.
pub fn bump(spec: GridSpec, center: f64, half_width: f64, sharpness: f64) -> GridFunction {
    let raw = GridFunction::from_position_fn(spec, |x| {
        let u = (x - center) / half_width;
        if u.abs() < 1.0 {
            real((-sharpness / (1.0 - u * u)).exp())
        } else {
            real(0.0)
        }
    });
    normalized(&raw)
}

pub const DEFAULT_BUMP_SHARPNESS: f64 = 10.0;

/// Gaussian wave packet with mean momentum `k0`.
pub fn gaussian_packet(spec: GridSpec, center: f64, width: f64, k0: f64) -> GridFunction {
    gaussian(spec, center, width).map(|x, z| z * Complex64::from_polar(1.0, k0 * x))
}

pub fn normalized(phi: &GridFunction) -> GridFunction {
    let n = phi.norm();
    if n == 0.0 {
        phi.clone()
    } else {
        phi.scale(real(1.0 / n))
    }
}

/// Modified Gram–Schmidt in the discrete inner product.
pub fn orthonormalize(vectors: &[GridFunction]) -> Result<Vec<GridFunction>> {
    let mut out: Vec<GridFunction> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for q in &out {
            let c = inner_product(q, &w)?;
            w = w.combine(real(1.0), q, -c)?;
        }
        let n = w.norm();
        if n < 1e-8 * v.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidModel("vectors are linearly dependent".into()));
        }
        out.push(w.scale(real(1.0 / n)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn hermite_functions_are_orthonormal() {
        let spec = make_grid(16.0, 1024).unwrap();
        let fs: Vec<_> = (0..6).map(|n| hermite(spec, n, 0.3, 1.2)).collect();
        for (j, a) in fs.iter().enumerate() {
            for (k, b) in fs.iter().enumerate() {
                let ip = inner_product(a, b).unwrap();
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((ip - target).norm() < 1e-12, "{j} {k} {ip}");
            }
        }
    }

    #[test]
    fn nodal_gaussian_vanishes_at_node() {
        let spec = make_grid(16.0, 1024).unwrap();
        let v = nodal_gaussian(spec, 0.5);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let i = spec.nodes().iter().position(|x| *x == 0.5).unwrap();
        assert_eq!(v.samples()[i].norm(), 0.0);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let spec = make_grid(4.0, 64).unwrap();
        let table = [(-1.0, real(0.0)), (0.0, real(2.0)), (1.0, real(0.0))];
        let v = tabulated(spec, &table).unwrap();
        for (x, z) in spec.nodes().iter().zip(v.samples()) {
            let expected = (2.0 - 2.0 * x.abs()).max(0.0);
            assert!((z.re - expected).abs() < 1e-14);
        }
        assert!(tabulated(spec, &[(0.0, real(1.0))]).is_err());
        assert!(tabulated(spec, &[(1.0, real(1.0)), (0.0, real(1.0))]).is_err());
    }

    #[test]
    fn gram_schmidt() {
        let spec = make_grid(16.0, 512).unwrap();
        let vs = vec![gaussian(spec, 0.0, 1.0), gaussian(spec, 0.5, 1.0), gaussian(spec, -1.0, 0.7)];
        let qs = orthonormalize(&vs).unwrap();
        for a in &qs {
            for b in &qs {
                let ip = inner_product(a, b).unwrap();
                assert!(ip.norm() < 1e-12 || (ip.re - 1.0).abs() < 1e-12);
            }
        }
        assert!(orthonormalize(&[vs[0].clone(), vs[0].clone()]).is_err());
    }

    #[test]
    fn bump_support_and_norm() {
        let spec = make_grid(8.0, 2048).unwrap();
        let b = bump(spec, 0.5, 0.25, DEFAULT_BUMP_SHARPNESS);
        assert!((b.norm() - 1.0).abs() < 1e-14);
        for (x, z) in spec.nodes().iter().zip(b.samples()) {
            if (x - 0.5).abs() >= 0.25 {
                assert_eq!(z.norm(), 0.0);
            }
        }
    }
}
