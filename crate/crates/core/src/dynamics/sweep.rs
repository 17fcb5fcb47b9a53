//! Sojourn-time sweeps over the dilation scale `r` and their extrapolation.

use num_complex::Complex64;
use rayon::prelude::*;

use super::propagation::{propagation_functional, PropagationMethod};
use super::propagator::Propagator;
use super::sojourn::{free_sojourn_analytic, full_sojourn, horizon_for, ScatteringStates, SojournOptions, ToeplitzWindow};
use super::wave::{wave_operator, WaveMethod, WaveOptions, WaveSign};
use crate::density::SampledDensity;
use crate::error::{Error, Result};
use crate::grid::{certify_support, CompactSupportCertificate, GridFunction};
use crate::localization::LocalizationProfile;
use crate::resolvent::FiniteRankModel;
use crate::scattering::{apply_scattering, ew_time_delay, ScatteringCurve};

/// One row of a time-delay sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SojournRecord {
    pub r: f64,
    pub t0: f64,
    /// Free sojourn of `Sφ`.
    pub t0_s: f64,
    pub t_full: f64,
    pub tau_in: f64,
    pub tau_sym: f64,
    pub tau_free: f64,
    pub tail_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitModel {
    /// `τ_∞ + c r^{-β}`.
    PowerLaw,
    /// The data did not resolve a decay; `τ_∞` is the last value.
    Constant,
}

#[derive(Clone, Copy, Debug)]
pub struct Extrapolation {
    pub tau_inf: f64,
    pub beta: f64,
    pub amplitude: f64,
    pub fit_residual: f64,
    pub model: FitModel,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub sojourn: SojournOptions,
    pub wave: WaveOptions,
    pub wave_method: WaveMethod,
    /// Sobolev order demanded of the incoming state.
    pub sobolev_order: f64,
    /// Number of largest-`r` records used by the fit.
    pub fit_points: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            sojourn: SojournOptions::default(),
            wave: WaveOptions::default(),
            wave_method: WaveMethod::Dressing,
            sobolev_order: 3.0,
            fit_points: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub records: Vec<SojournRecord>,
    pub extrapolation: Extrapolation,
    pub ew_value: f64,
    pub rel_gap: f64,
    /// Fitted power of the transient decay; infinite when faster than any
    /// power over the observed range.
    pub zeta_empirical: f64,
    pub wave_error: f64,
    pub certificate: CompactSupportCertificate,
}

/// Values whose spread is below this are treated as converged.
fn noise_floor(values: &[f64]) -> f64 {
    1e-10 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Fits `y = τ_∞ + c r^{-β}` by scanning `β` and solving the remaining
/// linear least-squares problem.
pub fn fit_power_law(r: &[f64], y: &[f64]) -> Result<Extrapolation> {
    if r.len() != y.len() || r.len() < 2 {
        return Err(Error::Fit(format!("need at least two points, got {}", r.len())));
    }
    let last = *y.last().expect("nonempty");
    let spread = y.iter().map(|v| (v - last).abs()).fold(0.0, f64::max);
    if spread <= noise_floor(y) {
        return Ok(Extrapolation {
            tau_inf: last,
            beta: f64::NAN,
            amplitude: 0.0,
            fit_residual: spread,
            model: FitModel::Constant,
        });
    }
    let n = r.len() as f64;
    let solve = |beta: f64| -> (f64, f64, f64) {
        let xs: Vec<f64> = r.iter().map(|r| r.powf(-beta)).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(y).map(|(x, v)| (x - mx) * (v - my)).sum();
        let c = sxy / sxx;
        let a = my - c * mx;
        let res = xs.iter().zip(y).map(|(x, v)| (a + c * x - v).powi(2)).sum::<f64>().sqrt();
        (a, c, res)
    };
    let mut best = (f64::NAN, 0.0, 0.0, f64::INFINITY);
    for i in 1..=1200 {
        let beta = i as f64 * 0.01;
        let (a, c, res) = solve(beta);
        if res < best.3 {
            best = (beta, a, c, res);
        }
    }
    let (beta, a, c, res) = best;
    // a β at the edge of the scan means the data are not power-law shaped
    if !(beta > 0.01 && beta < 12.0) || !a.is_finite() {
        log::warn!("power-law fit degenerate (beta {beta}); keeping the last value");
        return Ok(Extrapolation {
            tau_inf: last,
            beta: f64::NAN,
            amplitude: 0.0,
            fit_residual: spread,
            model: FitModel::Constant,
        });
    }
    Ok(Extrapolation {
        tau_inf: a,
        beta,
        amplitude: c,
        fit_residual: res,
        model: FitModel::PowerLaw,
    })
}

/// Decay power of `|g_full(t) − g_asym(t)|` over the last decade before the
/// horizon, both time directions pooled.
fn empirical_zeta(prop: &Propagator, states: &ScatteringStates, f: &LocalizationProfile, r: f64, opts: &SojournOptions) -> Result<f64> {
    let spec = *prop.spec();
    let horizon = horizon_for(states, f, r, opts).min(prop.max_horizon());
    let window = ToeplitzWindow::new(&spec, f, r);
    let packet = prop.packet(&states.w_minus, opts.packet_tol)?;
    let sh = spec.spacing().sqrt();
    let nodes = spec.nodes();
    let free = |psi: &GridFunction, t: f64| -> f64 {
        let y: Vec<Complex64> = psi
            .samples()
            .iter()
            .zip(&nodes)
            .map(|(z, x)| z * sh * Complex64::from_polar(1.0, -t * x))
            .collect();
        window.expectation(&y)
    };
    let start = (r * f.delta() + 1.0).max(0.1 * horizon);
    let samples: Vec<(f64, f64)> = (0..40)
        .into_par_iter()
        .map(|i| {
            let t = start * (horizon / start).powf(i as f64 / 39.0);
            let lo = (window.expectation(&packet.evolve_unitary(-t)) - free(&states.phi, -t)).abs();
            let hi = (window.expectation(&packet.evolve_unitary(t)) - free(&states.s_phi, t)).abs();
            (t, lo.max(hi))
        })
        .collect();
    let pts: Vec<(f64, f64)> = samples.into_iter().filter(|(_, d)| *d > 1e-13).map(|(t, d)| (t.ln(), d.ln())).collect();
    if pts.len() < 5 {
        return Ok(f64::INFINITY);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    Ok(-slope)
}

/// Runs the full time-delay experiment for `φ` supported in `support`.
#[allow(clippy::too_many_arguments)]
pub fn time_delay_sweep(
    prop: &Propagator,
    model: &FiniteRankModel,
    curve: &ScatteringCurve,
    phi: &GridFunction,
    support: (f64, f64),
    f: &LocalizationProfile,
    r_list: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if r_list.is_empty() || r_list.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidProfile("r list must be nonempty and positive".into()));
    }
    let phi = phi.to_position();
    let certificate = certify_support(&phi, support, opts.sobolev_order, &curve.excluded)?;
    if model.mu() <= 2.0 {
        log::warn!("decay exponent mu = {} does not exceed 2; transients may not be integrable", model.mu());
    }
    let ew_value = ew_time_delay(curve, &phi)?;
    let s_phi = apply_scattering(curve, &phi)?;
    let wave = wave_operator(prop, model, &phi, WaveSign::Minus, opts.wave_method, &opts.wave)?;
    let states = ScatteringStates {
        phi: phi.clone(),
        w_minus: wave.state,
        s_phi,
    };
    let rho_phi = SampledDensity::new(&states.phi)?;
    let rho_s = SampledDensity::new(&states.s_phi)?;

    let mut records = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let t0 = free_sojourn_analytic(&states.phi, f, r);
        let t0_s = free_sojourn_analytic(&states.s_phi, f, r);
        let full = full_sojourn(prop, &states, f, r, &opts.sojourn)?;
        let i_s = propagation_functional(&rho_s, f, r, PropagationMethod::ClosedForm)?;
        let i_phi = propagation_functional(&rho_phi, f, r, PropagationMethod::ClosedForm)?;
        // anchored on the exact free sojourn rather than its quadrature
        let t_full = t0 + full.interaction;
        let record = SojournRecord {
            r,
            t0,
            t0_s,
            t_full,
            tau_in: t_full - t0,
            tau_sym: t_full - 0.5 * (t0 + t0_s),
            tau_free: 0.5 * (i_s - i_phi),
            tail_estimate: full.tail_estimate,
        };
        log::info!("r = {r}: tau_in = {:.12e}, tail {:.2e}", record.tau_in, record.tail_estimate);
        records.push(record);
    }

    let mut order: Vec<&SojournRecord> = records.iter().collect();
    order.sort_by(|a, b| a.r.total_cmp(&b.r));
    let take = opts.fit_points.max(2).min(order.len());
    let tail = &order[order.len() - take..];
    let rs: Vec<f64> = tail.iter().map(|s| s.r).collect();
    let taus: Vec<f64> = tail.iter().map(|s| s.tau_in).collect();
    let extrapolation = if take >= 2 {
        fit_power_law(&rs, &taus)?
    } else {
        let only = order[0].tau_in;
        Extrapolation {
            tau_inf: only,
            beta: f64::NAN,
            amplitude: 0.0,
            fit_residual: f64::NAN,
            model: FitModel::Constant,
        }
    };
    let rel_gap = if ew_value != 0.0 {
        (extrapolation.tau_inf - ew_value).abs() / ew_value.abs()
    } else {
        (extrapolation.tau_inf - ew_value).abs()
    };
    let r_max = order.last().expect("nonempty").r;
    let zeta_empirical = if prop.is_free() {
        f64::INFINITY
    } else {
        empirical_zeta(prop, &states, f, r_max, &opts.sojourn)?
    };
    if zeta_empirical <= 2.0 {
        log::warn!("empirical transient decay exponent {zeta_empirical:.2} does not exceed 2");
    }
    Ok(SweepResult {
        records,
        extrapolation,
        ew_value,
        rel_gap,
        zeta_empirical,
        wave_error: wave.error_estimate,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_fit_recovers_parameters() {
        let r = [8.0, 16.0, 32.0, 64.0];
        let y: Vec<f64> = r.iter().map(|r: &f64| -1.4 + 3.0 * r.powf(-2.0)).collect();
        let fit = fit_power_law(&r, &y).unwrap();
        assert_eq!(fit.model, FitModel::PowerLaw);
        assert!((fit.tau_inf + 1.4).abs() < 1e-9);
        assert!((fit.beta - 2.0).abs() < 1e-9);
    }

    #[test]
    fn flat_data_is_reported_as_constant() {
        let fit = fit_power_law(&[16.0, 32.0, 64.0], &[-1.43, -1.43 + 1e-13, -1.43]).unwrap();
        assert_eq!(fit.model, FitModel::Constant);
        assert_eq!(fit.tau_inf, -1.43);
    }

    #[test]
    fn too_few_points_is_a_fit_error() {
        assert!(matches!(fit_power_law(&[1.0], &[1.0]), Err(Error::Fit(_))));
    }
}
