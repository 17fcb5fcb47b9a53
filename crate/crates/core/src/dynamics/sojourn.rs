//! Sojourn times `∫ dt ⟨ψ_t, f(P/r) ψ_t⟩` in a dilated momentum window.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::propagator::Propagator;
use crate::density::{MomentumDensity, SampledDensity};
use crate::error::{Error, Result};
use crate::grid::{transform, GridFunction, GridSpec};
use crate::localization::{localization_integral, LocalizationProfile, ProfileKind};
use crate::quad::{self, Tolerance};

const INNER_TOL: Tolerance = Tolerance {
    abs: 1e-14,
    rel: 1e-12,
    max_intervals: 2000,
};
const OUTER_TOL: Tolerance = Tolerance {
    abs: 1e-11,
    rel: 1e-11,
    max_intervals: 4000,
};

/// `g(t) = ∫ ρ(k) f((k − t)/r) dk`, the free window occupation at time `t`.
pub fn window_occupation(rho: &dyn MomentumDensity, f: &LocalizationProfile, r: f64, t: f64) -> f64 {
    let (mut lo, mut hi) = rho.support();
    if let Some(radius) = f.support_radius() {
        lo = lo.max(t - r * radius);
        hi = hi.min(t + r * radius);
    }
    if !(lo < hi) {
        return 0.0;
    }
    let mut breaks = rho.breakpoints();
    breaks.extend(rho.landmarks());
    breaks.extend(f.symmetric_kinks().iter().map(|k| t + r * k));
    quad::integrate_interval(|k| rho.density(k) * f.value((k - t) / r), lo, hi, &breaks, INNER_TOL).value
}

/// Times at which the window edges cross the density's landmarks.
pub(crate) fn occupation_breaks(rho: &dyn MomentumDensity, f: &LocalizationProfile, r: f64) -> Vec<f64> {
    let mut anchors = rho.breakpoints();
    anchors.extend(rho.landmarks());
    let kinks = f.symmetric_kinks();
    anchors.iter().flat_map(|b| kinks.iter().map(move |k| b - r * k)).chain(anchors.iter().copied()).collect()
}

fn occupation_range(rho: &dyn MomentumDensity, f: &LocalizationProfile, r: f64) -> (f64, f64) {
    let (a, b) = rho.support();
    match f.support_radius() {
        Some(radius) => (a - r * radius, b + r * radius),
        None => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

/// `∫_{t0}^{t1} g(t) dt` for the free evolution of a state with density `ρ`.
pub fn free_window_integral(rho: &dyn MomentumDensity, f: &LocalizationProfile, r: f64, t0: f64, t1: f64) -> quad::Integral<f64> {
    let (a, b) = occupation_range(rho, f, r);
    let lo = t0.max(a);
    let hi = t1.min(b);
    if !(lo < hi) {
        return quad::Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let breaks = occupation_breaks(rho, f, r);
    quad::integrate_interval(|t| window_occupation(rho, f, r, t), lo, hi, &breaks, OUTER_TOL)
}

/// The operator `f(P/r)` on grid states, as a Toeplitz matrix in the unitary
/// coordinates `y = √h φ`: `⟨φ, f(P/r) φ⟩ = Σ conj(yᵢ) yⱼ a_{i−j}` with
/// `a_m = (h/2π) ∫_{|k| ≤ π/h} f(k/r) e^{ikmh} dk`.
#[derive(Clone)]
pub struct ToeplitzWindow {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex64>,
}

fn window_coefficients(spec: &GridSpec, f: &LocalizationProfile, r: f64) -> Vec<f64> {
    let m = spec.len();
    let h = spec.spacing();
    let cutoff = spec.momentum_cutoff();
    if let ProfileKind::Indicator { hi, .. } = f.kind() {
        let edge = (r * hi).min(cutoff);
        return (0..m)
            .map(|j| {
                if j == 0 {
                    h * edge / PI
                } else {
                    (edge * j as f64 * h).sin() / (PI * j as f64)
                }
            })
            .collect();
    }
    // (h/π) ∫_0^{π/h} f(k/r) cos(k m h) dk on panels resolving cos(k (M-1) h)
    let mut edges = vec![0.0];
    edges.extend(f.kinks().iter().map(|k| r * k).filter(|k| *k < cutoff));
    edges.push(cutoff);
    let max_width = 0.1;
    let mut nodes = Vec::new();
    for w in edges.windows(2) {
        let panels = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
        nodes.extend(quad::composite_nodes(w[0], w[1], panels));
    }
    let mut out = vec![0.0; m];
    for (k, w) in nodes {
        let weight = w * f.value(k / r) * h / PI;
        if weight == 0.0 {
            continue;
        }
        let c1 = (k * h).cos();
        let (mut prev, mut cur) = (c1, 1.0);
        for slot in out.iter_mut() {
            *slot += weight * cur;
            let next = 2.0 * c1 * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    out
}

impl ToeplitzWindow {
    pub fn new(spec: &GridSpec, f: &LocalizationProfile, r: f64) -> Self {
        let m = spec.len();
        let a = window_coefficients(spec, f, r);
        let n = 2 * m;
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..m {
            col[j] = Complex64::new(a[j], 0.0);
            if j > 0 {
                col[n - j] = Complex64::new(a[j], 0.0);
            }
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        forward.process(&mut col);
        let scale = 1.0 / n as f64;
        for z in col.iter_mut() {
            *z *= scale;
        }
        Self {
            len: m,
            forward,
            inverse,
            spectrum: col,
        }
    }

    /// `⟨y, A y⟩` for unitary coordinates `y`.
    pub fn expectation(&self, y: &[Complex64]) -> f64 {
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * self.len];
        buf[..self.len].copy_from_slice(y);
        self.forward.process(&mut buf);
        for (z, s) in buf.iter_mut().zip(&self.spectrum) {
            *z *= s;
        }
        self.inverse.process(&mut buf);
        y.iter().zip(&buf[..self.len]).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SojournMethod {
    FreeAnalytic,
    FreeNumeric,
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct SojournOptions {
    /// Extra time allowed beyond the window transit on each side.
    pub margin: f64,
    /// Width of the fixed quadrature panels in time.
    pub panel_width: f64,
    /// Eigencomponents below this fraction of the peak are dropped.
    pub packet_tol: f64,
    /// Mass left outside `[-K, K]` when sizing the momentum extent.
    pub extent_tol: f64,
    /// Assumed decay exponent of the scattering transients.
    pub zeta: f64,
}

impl Default for SojournOptions {
    fn default() -> Self {
        Self {
            margin: 40.0,
            panel_width: 0.5,
            packet_tol: 1e-15,
            extent_tol: 1e-15,
            zeta: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SojournValue {
    pub value: f64,
    /// Part of `value` due to the interaction: full minus free sojourn of `φ`.
    pub interaction: f64,
    pub tail_estimate: f64,
    pub horizon: f64,
}

/// The incoming state together with `W₋φ` and `Sφ`, needed for full sojourns.
#[derive(Clone, Debug)]
pub struct ScatteringStates {
    pub phi: GridFunction,
    pub w_minus: GridFunction,
    pub s_phi: GridFunction,
}

impl ScatteringStates {
    /// Trivial scattering, `W₋ = S = 1`.
    pub fn free(phi: &GridFunction) -> Self {
        Self {
            phi: phi.clone(),
            w_minus: phi.clone(),
            s_phi: phi.clone(),
        }
    }
}

/// Smallest `K` with at most `tol` of the mass at `|k| > K`.
pub fn momentum_extent(phi: &GridFunction, tol: f64) -> f64 {
    let hat = transform(&phi.to_position());
    let dk = phi.spec().momentum_spacing();
    let mut order: Vec<(f64, f64)> = phi
        .spec()
        .momentum_nodes()
        .into_iter()
        .zip(hat.samples())
        .map(|(k, z)| (k.abs(), z.norm_sqr() * dk))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let total: f64 = order.iter().map(|p| p.1).sum();
    let mut outside = 0.0;
    for (k, w) in order {
        outside += w;
        if outside > tol * total {
            return k;
        }
    }
    0.0
}

/// `T⁰ᵣ(φ) = r ‖φ‖² ∫ f`.
pub fn free_sojourn_analytic(phi: &GridFunction, f: &LocalizationProfile, r: f64) -> f64 {
    r * phi.norm_sqr() * localization_integral(f)
}

pub fn free_sojourn_numeric(phi: &GridFunction, f: &LocalizationProfile, r: f64) -> Result<SojournValue> {
    let rho = SampledDensity::new(phi)?;
    let res = free_window_integral(&rho, f, r, f64::NEG_INFINITY, f64::INFINITY);
    Ok(SojournValue {
        value: res.value,
        interaction: 0.0,
        tail_estimate: res.error,
        horizon: f64::INFINITY,
    })
}

/// Per-time integrand of the full sojourn with its free reference.
pub(crate) struct FullIntegrand<'a> {
    /// `None` for the free propagator, where `W₋φ` evolves by phases.
    pub packet: Option<super::propagator::SpectralPacket>,
    pub outgoing: Vec<Complex64>,
    pub incoming: Vec<Complex64>,
    pub nodes: Vec<f64>,
    pub window: &'a ToeplitzWindow,
}

impl FullIntegrand<'_> {
    /// `(g_full(t), g_free(t))` in the discrete model.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let full = match &self.packet {
            Some(p) => self.window.expectation(&p.evolve_unitary(t)),
            None => self.window.expectation(&self.free_evolve(&self.outgoing, t)),
        };
        (full, self.window.expectation(&self.free_evolve(&self.incoming, t)))
    }

    fn free_evolve(&self, y: &[Complex64], t: f64) -> Vec<Complex64> {
        y.iter().zip(&self.nodes).map(|(y, x)| y * Complex64::from_polar(1.0, -t * x)).collect()
    }
}

pub(crate) fn horizon_for(states: &ScatteringStates, f: &LocalizationProfile, r: f64, opts: &SojournOptions) -> f64 {
    let k = [&states.phi, &states.s_phi, &states.w_minus]
        .iter()
        .map(|s| momentum_extent(s, opts.extent_tol))
        .fold(0.0, f64::max);
    let reach = match f.kind() {
        ProfileKind::SmoothBump { delta, width, .. } => delta + width,
        _ => f.support_radius().unwrap_or(f.delta()),
    };
    r * reach + k + opts.margin
}

/// Full sojourn `Tᵣ(φ) = ∫ dt ⟨e^{-itH}W₋φ, f(P/r) e^{-itH}W₋φ⟩`.
///
/// The discrete integrand is integrated against its free counterpart on the
/// same nodes over `[-T, T]`; beyond the horizon the free asymptotics
/// (`φ` for `t → −∞`, `Sφ` for `t → +∞`) are integrated from the momentum
/// densities.
pub fn full_sojourn(
    prop: &Propagator,
    states: &ScatteringStates,
    f: &LocalizationProfile,
    r: f64,
    opts: &SojournOptions,
) -> Result<SojournValue> {
    let spec = *prop.spec();
    let horizon = horizon_for(states, f, r, opts);
    if horizon > prop.max_horizon() {
        return Err(Error::Horizon(format!(
            "time horizon {horizon:.1} exceeds {:.1}; refine the grid",
            prop.max_horizon()
        )));
    }
    let window = ToeplitzWindow::new(&spec, f, r);
    let sh = spec.spacing().sqrt();
    let integrand = FullIntegrand {
        packet: if prop.is_free() {
            None
        } else {
            Some(prop.packet(&states.w_minus, opts.packet_tol)?)
        },
        outgoing: states.w_minus.samples().iter().map(|z| z * sh).collect(),
        incoming: states.phi.samples().iter().map(|z| z * sh).collect(),
        nodes: spec.nodes(),
        window: &window,
    };
    let panels = (2.0 * horizon / opts.panel_width).ceil() as usize;
    let nodes = quad::composite_nodes(-horizon, horizon, panels);
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|(t, w)| {
            let (full, free) = integrand.at(*t);
            w * (full - free)
        })
        .collect();
    let excess: f64 = values.iter().sum();

    let rho_phi = SampledDensity::new(&states.phi)?;
    let rho_s = SampledDensity::new(&states.s_phi)?;
    let free_total = free_window_integral(&rho_phi, f, r, f64::NEG_INFINITY, f64::INFINITY);
    let tail_s = free_window_integral(&rho_s, f, r, horizon, f64::INFINITY);
    let tail_phi = free_window_integral(&rho_phi, f, r, horizon, f64::INFINITY);

    // deviation from the asymptotic dynamics at the horizon
    let (full_hi, _) = integrand.at(horizon);
    let (full_lo, free_lo) = integrand.at(-horizon);
    let dev_hi = (full_hi - window_occupation(&rho_s, f, r, horizon)).abs();
    let dev_lo = (full_lo - free_lo).abs();
    let zeta = opts.zeta.max(1.5);
    let tail_estimate = (dev_hi + dev_lo) * horizon / (zeta - 1.0) + free_total.error + tail_s.error + tail_phi.error;

    let interaction = excess + (tail_s.value - tail_phi.value);
    Ok(SojournValue {
        value: free_total.value + interaction,
        interaction,
        tail_estimate,
        horizon,
    })
}

pub fn sojourn(
    prop: &Propagator,
    states: &ScatteringStates,
    f: &LocalizationProfile,
    r: f64,
    which: SojournMethod,
    opts: &SojournOptions,
) -> Result<SojournValue> {
    if !(r > 0.0) {
        return Err(Error::InvalidProfile(format!("scale r must be positive, got {r}")));
    }
    match which {
        SojournMethod::FreeAnalytic => Ok(SojournValue {
            value: free_sojourn_analytic(&states.phi, f, r),
            interaction: 0.0,
            tail_estimate: 0.0,
            horizon: f64::INFINITY,
        }),
        SojournMethod::FreeNumeric => free_sojourn_numeric(&states.phi, f, r),
        SojournMethod::Full => full_sojourn(prop, states, f, r, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{GaussianDensity, IndicatorDensity};
    use crate::families::{bump, gaussian};
    use crate::grid::make_grid;
    use crate::resolvent::FiniteRankModel;

    #[test]
    fn toeplitz_window_matches_momentum_sum() {
        let spec = make_grid(8.0, 256).unwrap();
        let phi = gaussian(spec, 0.5, 0.3).map(|x, z| z * Complex64::from_polar(1.0, 2.0 * x));
        let y: Vec<Complex64> = phi.samples().iter().map(|z| z * spec.spacing().sqrt()).collect();
        let rho = SampledDensity::new(&phi).unwrap();
        for f in [
            LocalizationProfile::indicator(1.0).unwrap(),
            crate::localization::make_localization(ProfileKind::Trapezoid { delta: 1.0, width: 1.5 }).unwrap(),
        ] {
            let r = 2.5;
            let w = ToeplitzWindow::new(&spec, &f, r);
            let direct = window_occupation(&rho, &f, r, 0.0);
            assert!((w.expectation(&y) - direct).abs() < 1e-12, "{f:?}");
        }
    }

    #[test]
    fn free_sojourn_identity_for_analytic_densities() {
        let f = LocalizationProfile::indicator(1.0).unwrap();
        let g = GaussianDensity { k0: 0.3, sigma: 1.2 };
        let d = IndicatorDensity { a: -0.5, b: 2.0 };
        for r in [1.0, 10.0] {
            assert!((free_window_integral(&g, &f, r, f64::NEG_INFINITY, f64::INFINITY).value - 2.0 * r).abs() < 1e-9);
            assert!((free_window_integral(&d, &f, r, f64::NEG_INFINITY, f64::INFINITY).value - 2.0 * r).abs() < 1e-9);
        }
        let phi = gaussian(make_grid(16.0, 512).unwrap(), 0.0, 1.0);
        assert_eq!(free_sojourn_analytic(&phi, &f, 10.0), 20.0 * phi.norm_sqr());
    }

    #[test]
    fn full_sojourn_at_zero_coupling_equals_free() {
        let spec = make_grid(8.0, 1024).unwrap();
        let prop = super::super::propagator::build_propagator(&FiniteRankModel::free(spec), spec).unwrap();
        let phi = bump(spec, 0.5, 0.25, 10.0);
        let f = LocalizationProfile::indicator(1.0).unwrap();
        let states = ScatteringStates::free(&phi);
        let opts = SojournOptions {
            margin: 10.0,
            extent_tol: 1e-10,
            ..SojournOptions::default()
        };
        let full = sojourn(&prop, &states, &f, 4.0, SojournMethod::Full, &opts).unwrap();
        let free = sojourn(&prop, &states, &f, 4.0, SojournMethod::FreeNumeric, &opts).unwrap();
        assert_eq!(full.value, free.value);
        assert!((free.value - 8.0).abs() < 1e-8);
    }
}
