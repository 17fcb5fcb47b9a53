//! Momentum-space localization profiles `f`, used as `f(P/r)`.
//!
//! Every shipped profile is even, nonnegative, identically one on a plateau
//! `(-δ, δ)` and decays at least like `⟨x⟩^{-ρ}` with `ρ > 1`.

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileKind {
    /// Characteristic function of the symmetric interval `J = [lo, hi]`.
    Indicator { lo: f64, hi: f64 },
    /// `1` on `|x| ≤ δ`, then `(1 + ((|x| − δ)/width)²)^{-ρ/2}`.
    SmoothBump { delta: f64, width: f64, rho: f64 },
    /// `1` on `|x| ≤ δ`, linear ramp down to `0` at `|x| = δ + width`.
    Trapezoid { delta: f64, width: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalizationProfile {
    kind: ProfileKind,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("{name} must be positive, got {v}")))
    }
}

pub fn make_localization(kind: ProfileKind) -> Result<LocalizationProfile> {
    match kind {
        ProfileKind::Indicator { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidProfile("indicator set must be bounded".into()));
            }
            if lo != -hi {
                return Err(Error::InvalidProfile(format!(
                    "indicator set [{lo}, {hi}] is not symmetric"
                )));
            }
            positive("indicator half width", hi)?;
        }
        ProfileKind::SmoothBump { delta, width, rho } => {
            positive("delta", delta)?;
            positive("width", width)?;
            if !(rho > 1.0) || !rho.is_finite() {
                return Err(Error::InvalidProfile(format!("decay rho must exceed 1, got {rho}")));
            }
        }
        ProfileKind::Trapezoid { delta, width } => {
            positive("delta", delta)?;
            positive("width", width)?;
        }
    }
    Ok(LocalizationProfile { kind })
}

impl LocalizationProfile {
    pub fn indicator(half_width: f64) -> Result<Self> {
        make_localization(ProfileKind::Indicator {
            lo: -half_width,
            hi: half_width,
        })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn value(&self, x: f64) -> f64 {
        let a = x.abs();
        match self.kind {
            ProfileKind::Indicator { hi, .. } => {
                if a <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            ProfileKind::SmoothBump { delta, width, rho } => {
                if a <= delta {
                    1.0
                } else {
                    let u = (a - delta) / width;
                    (1.0 + u * u).powf(-0.5 * rho)
                }
            }
            ProfileKind::Trapezoid { delta, width } => {
                if a <= delta {
                    1.0
                } else {
                    (1.0 - (a - delta) / width).max(0.0)
                }
            }
        }
    }

    /// Half width of the plateau on which `f ≡ 1`.
    pub fn delta(&self) -> f64 {
        match self.kind {
            ProfileKind::Indicator { hi, .. } => hi,
            ProfileKind::SmoothBump { delta, .. } | ProfileKind::Trapezoid { delta, .. } => delta,
        }
    }

    /// Declared decay exponent; compactly supported profiles report infinity.
    pub fn rho(&self) -> f64 {
        match self.kind {
            ProfileKind::SmoothBump { rho, .. } => rho,
            _ => f64::INFINITY,
        }
    }

    /// Half width of the support when it is compact.
    pub fn support_radius(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Indicator { hi, .. } => Some(hi),
            ProfileKind::Trapezoid { delta, width } => Some(delta + width),
            ProfileKind::SmoothBump { .. } => None,
        }
    }

    /// Nonnegative points where `f` fails to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self.kind {
            ProfileKind::Indicator { hi, .. } => vec![hi],
            ProfileKind::SmoothBump { delta, .. } => vec![delta],
            ProfileKind::Trapezoid { delta, width } => vec![delta, delta + width],
        }
    }

    /// Kinks of `x ↦ f(x)` mirrored to both signs.
    pub fn symmetric_kinks(&self) -> Vec<f64> {
        self.kinks().into_iter().flat_map(|k| [-k, k]).collect()
    }

    /// `∫_0^u f` for `u ≥ 0`; odd extension for `u < 0`.
    pub fn primitive(&self, u: f64) -> f64 {
        if u < 0.0 {
            return -self.primitive(-u);
        }
        match self.kind {
            ProfileKind::Indicator { hi, .. } => u.min(hi),
            ProfileKind::Trapezoid { delta, width } => {
                if u <= delta {
                    u
                } else {
                    let s = (u - delta).min(width);
                    delta + s - 0.5 * s * s / width
                }
            }
            ProfileKind::SmoothBump { delta, width, rho } => {
                if u <= delta {
                    return u;
                }
                let s = (u - delta) / width;
                let tail = if rho == 2.0 {
                    s.atan()
                } else {
                    quad::integrate(|w: f64| w.cosh().powf(1.0 - rho), 0.0, s.asinh(), Tolerance::absolute(1e-13)).value
                };
                delta + width * tail
            }
        }
    }

    /// Half of `∫_ℝ f`.
    fn half_integral(&self) -> f64 {
        match self.kind {
            ProfileKind::SmoothBump { delta, width, rho } => {
                let tail = if rho == 2.0 {
                    std::f64::consts::FRAC_PI_2
                } else {
                    // t = sinh w turns the algebraic tail into an exponential one
                    quad::integrate_upper(|w: f64| w.cosh().powf(1.0 - rho), 0.0, Tolerance::absolute(1e-13)).value
                };
                delta + width * tail
            }
            _ => self.primitive(self.support_radius().unwrap_or(0.0)),
        }
    }
}

/// `∫_ℝ f`.
pub fn localization_integral(f: &LocalizationProfile) -> f64 {
    2.0 * f.half_integral()
}
