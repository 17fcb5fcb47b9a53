//! The propagation functional
//! `Iᵣ(φ) = ∫_0^∞ dt ⟨φ, [f((P − t)/r) − f((P + t)/r)] φ⟩`,
//! which tends to `2⟨φ, Pφ⟩` as `r → ∞`.

use crate::density::{MomentumDensity, SampledDensity};
use crate::error::{Error, Result};
use crate::grid::{sobolev_norm, GridFunction};
use crate::localization::LocalizationProfile;
use crate::quad::{self, Tolerance};

use super::sojourn::{occupation_breaks, window_occupation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationMethod {
    /// `2r ∫ ρ(k) F(k/r) dk` with `F` the odd primitive of `f`.
    ClosedForm,
    /// Time quadrature of the commutator expectation.
    Direct,
}

const K_TOL: Tolerance = Tolerance {
    abs: 1e-14,
    rel: 1e-13,
    max_intervals: 4000,
};
const T_TOL: Tolerance = Tolerance {
    abs: 1e-11,
    rel: 1e-11,
    max_intervals: 4000,
};

pub fn propagation_functional(
    rho: &dyn MomentumDensity,
    f: &LocalizationProfile,
    r: f64,
    method: PropagationMethod,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidProfile(format!("scale r must be positive, got {r}")));
    }
    match method {
        PropagationMethod::ClosedForm => {
            let (lo, hi) = rho.support();
            let mut breaks = rho.breakpoints();
            breaks.extend(rho.landmarks());
            breaks.extend(f.symmetric_kinks().iter().map(|k| r * k));
            breaks.push(0.0);
            let res = quad::integrate_interval(|k| rho.density(k) * f.primitive(k / r), lo, hi, &breaks, K_TOL);
            Ok(2.0 * r * res.value)
        }
        PropagationMethod::Direct => {
            let mut breaks: Vec<f64> = occupation_breaks(rho, f, r).into_iter().flat_map(|t| [t, -t]).filter(|t| *t > 0.0).collect();
            let (lo, hi) = rho.support();
            let end = match f.support_radius() {
                Some(radius) => lo.abs().max(hi.abs()) + r * radius,
                None => f64::INFINITY,
            };
            breaks.retain(|t| *t < end);
            let res = quad::integrate_interval(
                |t| window_occupation(rho, f, r, t) - window_occupation(rho, f, r, -t),
                0.0,
                end,
                &breaks,
                T_TOL,
            );
            if !res.converged {
                return Err(Error::Horizon(format!(
                    "time integral did not converge (error estimate {:.2e})",
                    res.error
                )));
            }
            Ok(res.value)
        }
    }
}

/// Propagation functional of a grid state; requires a finite `H¹⁺` norm.
pub fn propagation_functional_of(phi: &GridFunction, f: &LocalizationProfile, r: f64, method: PropagationMethod) -> Result<f64> {
    let norm = sobolev_norm(phi, 1.5, 0.0);
    if !norm.is_finite() {
        return Err(Error::NotInDomain("state has no finite Sobolev norm above order one".into()));
    }
    let rho = SampledDensity::new(phi)?;
    propagation_functional(&rho, f, r, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{GaussianDensity, IndicatorDensity};
    use crate::localization::{make_localization, ProfileKind};

    #[test]
    fn exact_regime_for_indicator_density() {
        let rho = IndicatorDensity { a: 1.0, b: 2.0 };
        let f = LocalizationProfile::indicator(1.0).unwrap();
        for r in [2.5, 4.0, 100.0] {
            for m in [PropagationMethod::ClosedForm, PropagationMethod::Direct] {
                let v = propagation_functional(&rho, &f, r, m).unwrap();
                assert!((v - 3.0).abs() < 1e-10, "{m:?} r={r}: {v}");
            }
        }
    }

    #[test]
    fn even_density_gives_zero() {
        let rho = GaussianDensity { k0: 0.0, sigma: 1.0 };
        let f = make_localization(ProfileKind::SmoothBump { delta: 1.0, width: 1.0, rho: 3.0 }).unwrap();
        for m in [PropagationMethod::ClosedForm, PropagationMethod::Direct] {
            assert!(propagation_functional(&rho, &f, 4.0, m).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn methods_agree_for_smooth_profile() {
        let rho = GaussianDensity { k0: 1.0, sigma: 0.7 };
        let f = make_localization(ProfileKind::SmoothBump { delta: 1.0, width: 1.0, rho: 4.0 }).unwrap();
        for r in [4.0, 16.0] {
            let a = propagation_functional(&rho, &f, r, PropagationMethod::ClosedForm).unwrap();
            let b = propagation_functional(&rho, &f, r, PropagationMethod::Direct).unwrap();
            assert!((a - b).abs() < 1e-8, "r={r}: {a} vs {b}");
        }
    }
}
