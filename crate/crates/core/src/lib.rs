#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Stationary and time-dependent scattering theory for finite-rank
//! perturbations of the position operator `Q` on `L²(ℝ)`.
//!
//! The free Hamiltonian acts by multiplication by the energy variable, so
//! states are sampled on a uniform grid of energies ([`grid`]). The
//! stationary side ([`resolvent`], [`scattering`]) computes the scattering
//! matrix and the Eisenbud–Wigner time delay from boundary values of the
//! resolvent; the time-dependent side ([`dynamics`]) measures sojourn times
//! in momentum windows by exact unitary propagation.

pub mod error;
pub mod density;
pub mod dynamics;
pub mod families;
pub mod grid;
pub mod localization;
pub mod quad;
pub mod resolvent;
pub mod scattering;

pub use error::{Error, Result};
