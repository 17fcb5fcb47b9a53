//! Numerical wave operators `W± = s-lim_{t→±∞} e^{itH} e^{-itH₀}`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::propagator::{distance, Propagator};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::quad;
use crate::resolvent::FiniteRankModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaveSign {
    Minus,
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaveMethod {
    /// `e^{iTH} e^{-iTH₀}φ` at a large `|T|`.
    Dressing,
    /// `φ ∓ i ∫ e^{iτH} V e^{-iτH₀}φ dτ` over the appropriate half-line.
    Cook,
}

#[derive(Clone, Copy, Debug)]
pub struct WaveOptions {
    /// Base dressing time `T₀`; the result is taken at `2T₀` and compared
    /// with `T₀`.
    pub dressing_time: f64,
    /// Requested accuracy; a larger error estimate is an error.
    pub tolerance: f64,
    /// Width of the fixed quadrature panels for the Cook integral.
    pub panel_width: f64,
    /// Assumed decay power of `‖V e^{-iτH₀}φ‖`, used for the Cook tail.
    pub zeta: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            dressing_time: 150.0,
            tolerance: 1e-4,
            panel_width: 0.5,
            zeta: 3.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WaveResult {
    pub state: GridFunction,
    pub error_estimate: f64,
    /// Time cutoff actually used.
    pub horizon: f64,
}

fn unitary(phi: &GridFunction) -> Vec<Complex64> {
    let sh = phi.spec().spacing().sqrt();
    phi.samples().iter().map(|z| z * sh).collect()
}

fn dressed(prop: &Propagator, y: &[Complex64], nodes: &[f64], time: f64) -> Vec<Complex64> {
    // e^{iTH} e^{-iTH₀} in the eigenbasis
    let free: Vec<Complex64> = y
        .iter()
        .zip(nodes)
        .map(|(z, x)| z * Complex64::from_polar(1.0, -time * x))
        .collect();
    let sh = prop.spec().spacing().sqrt();
    let state = GridFunction::new(
        *prop.spec(),
        crate::grid::Representation::Position,
        free.iter().map(|z| z / sh).collect(),
    )
    .expect("grid length");
    let c = prop.coefficients(&state).expect("matching grid");
    let c: Vec<Complex64> = c
        .iter()
        .zip(prop.energies())
        .map(|(z, e)| z * Complex64::from_polar(1.0, time * e))
        .collect();
    unitary(&prop.synthesize(&c))
}

fn from_unitary(prop: &Propagator, y: Vec<Complex64>) -> GridFunction {
    let s = 1.0 / prop.spec().spacing().sqrt();
    GridFunction::new(
        *prop.spec(),
        crate::grid::Representation::Position,
        y.into_iter().map(|z| z * s).collect(),
    )
    .expect("grid length")
}

pub fn wave_operator(
    prop: &Propagator,
    model: &FiniteRankModel,
    phi: &GridFunction,
    sign: WaveSign,
    method: WaveMethod,
    opts: &WaveOptions,
) -> Result<WaveResult> {
    if *phi.spec() != *prop.spec() || *model.spec() != *prop.spec() {
        return Err(Error::GridMismatch("state, model and propagator grids differ".into()));
    }
    let phi = phi.to_position();
    if prop.is_free() || model.is_free() {
        return Ok(WaveResult {
            state: phi,
            error_estimate: 0.0,
            horizon: 0.0,
        });
    }
    let nodes = prop.spec().nodes();
    let y = unitary(&phi);
    let direction = match sign {
        WaveSign::Minus => -1.0,
        WaveSign::Plus => 1.0,
    };
    match method {
        WaveMethod::Dressing => {
            let t0 = opts.dressing_time;
            if 2.0 * t0 > prop.max_horizon() {
                return Err(Error::Horizon(format!(
                    "dressing time {} exceeds the grid limit {:.1}",
                    2.0 * t0,
                    prop.max_horizon()
                )));
            }
            let near = dressed(prop, &y, &nodes, direction * t0);
            let far = dressed(prop, &y, &nodes, direction * 2.0 * t0);
            let error_estimate = distance(&near, &far);
            if error_estimate > opts.tolerance {
                return Err(Error::Horizon(format!(
                    "dressing changed by {error_estimate:.2e} between T = {t0} and {}",
                    2.0 * t0
                )));
            }
            Ok(WaveResult {
                state: from_unitary(prop, far),
                error_estimate,
                horizon: 2.0 * t0,
            })
        }
        WaveMethod::Cook => cook(prop, model, &y, &nodes, direction, opts),
    }
}

fn cook(
    prop: &Propagator,
    model: &FiniteRankModel,
    y: &[Complex64],
    nodes: &[f64],
    direction: f64,
    opts: &WaveOptions,
) -> Result<WaveResult> {
    let sh = prop.spec().spacing().sqrt();
    let ws: Vec<Vec<Complex64>> = model
        .vectors()
        .iter()
        .map(|v| v.samples().iter().map(|z| z * sh).collect())
        .collect();
    // cⱼ(τ) = ⟨wⱼ, e^{-iτX} y⟩
    let overlap = |tau: f64| -> Vec<Complex64> {
        ws.iter()
            .map(|w| {
                w.iter()
                    .zip(y)
                    .zip(nodes)
                    .map(|((a, b), x)| a.conj() * b * Complex64::from_polar(1.0, -tau * x))
                    .sum()
            })
            .collect()
    };
    let strength: f64 = model.lambdas().iter().zip(&ws).map(|(l, w)| l.abs() * w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).sum();
    let zeta = opts.zeta.max(1.5);
    // ∫_T^∞ ‖V e^{-iτH₀}φ‖ dτ under |c(τ)| ≲ |c(T)| (T/τ)^ζ
    let tail_at = |horizon: f64| -> f64 {
        let probe = (0..20)
            .map(|i| overlap(direction * (horizon - i as f64 * 0.25)))
            .flat_map(|c| c.into_iter().map(|z| z.norm()))
            .fold(0.0, f64::max);
        strength * probe * horizon / (zeta - 1.0)
    };
    let limit = prop.max_horizon();
    let mut horizon = 10.0;
    let mut tail = tail_at(horizon);
    while tail > 0.1 * opts.tolerance {
        horizon *= 1.25;
        if horizon > limit {
            return Err(Error::Horizon(format!(
                "Cook tail estimate {tail:.2e} above {:.2e} at the grid limit {limit:.1}",
                0.1 * opts.tolerance
            )));
        }
        tail = tail_at(horizon);
    }
    let panels = (horizon / opts.panel_width).ceil() as usize;
    let (a, b) = if direction < 0.0 { (-horizon, 0.0) } else { (0.0, horizon) };
    let qnodes = quad::composite_nodes(a, b, panels);
    let weights: Vec<Vec<Complex64>> = qnodes.par_iter().map(|(t, w)| overlap(*t).into_iter().map(|c| c * *w).collect()).collect();
    let energies = prop.energies();
    // Gⱼ(E) = ∫ cⱼ(τ) e^{iτE} dτ
    let g: Vec<Vec<Complex64>> = (0..ws.len())
        .map(|j| {
            energies
                .par_iter()
                .map(|e| {
                    qnodes
                        .iter()
                        .zip(&weights)
                        .map(|((t, _), cw)| cw[j] * Complex64::from_polar(1.0, t * e))
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); energies.len()];
    for (j, w) in ws.iter().enumerate() {
        let wst = GridFunction::new(
            *prop.spec(),
            crate::grid::Representation::Position,
            w.iter().map(|z| z / sh).collect(),
        )?;
        let bj = prop.coefficients(&wst)?;
        let lam = model.lambdas()[j];
        for ((c, b), gj) in coeffs.iter_mut().zip(&bj).zip(&g[j]) {
            *c += b * gj * lam;
        }
    }
    // W± − 1 = ±i ∫ e^{iτH} V e^{-iτH₀} dτ
    let correction = unitary(&prop.synthesize(&coeffs));
    let factor = Complex64::new(0.0, direction);
    let out: Vec<Complex64> = y.iter().zip(&correction).map(|(a, c)| a + factor * c).collect();
    Ok(WaveResult {
        state: from_unitary(prop, out),
        error_estimate: tail,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::propagator::build_propagator;
    use crate::families::{bump, gaussian};
    use crate::grid::make_grid;

    #[test]
    fn free_wave_operators_are_identity() {
        let spec = make_grid(8.0, 256).unwrap();
        let model = FiniteRankModel::new(spec, vec![0.0], vec![gaussian(spec, 0.0, 1.0)], 10.0).unwrap();
        let prop = build_propagator(&model, spec).unwrap();
        let phi = bump(spec, 0.5, 0.25, 10.0);
        for method in [WaveMethod::Dressing, WaveMethod::Cook] {
            let w = wave_operator(&prop, &model, &phi, WaveSign::Minus, method, &WaveOptions::default()).unwrap();
            assert_eq!(w.state.samples(), phi.samples());
        }
    }

    #[test]
    fn dressing_and_cook_agree_on_a_small_grid() {
        let spec = make_grid(8.0, 512).unwrap();
        let model = FiniteRankModel::new(spec, vec![0.5], vec![gaussian(spec, 0.0, 1.0)], 10.0).unwrap();
        let prop = build_propagator(&model, spec).unwrap();
        let phi = gaussian(spec, 0.5, 0.3);
        let opts = WaveOptions {
            dressing_time: 40.0,
            ..WaveOptions::default()
        };
        for sign in [WaveSign::Minus, WaveSign::Plus] {
            let d = wave_operator(&prop, &model, &phi, sign, WaveMethod::Dressing, &opts).unwrap();
            let c = wave_operator(&prop, &model, &phi, sign, WaveMethod::Cook, &opts).unwrap();
            let diff = d.state.combine(Complex64::new(1.0, 0.0), &c.state, Complex64::new(-1.0, 0.0)).unwrap();
            assert!(diff.norm() < 1e-4, "{sign:?}: {}", diff.norm());
            assert!((c.state.norm() - 1.0).abs() < 1e-4);
        }
    }
}
