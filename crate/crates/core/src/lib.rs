//! Resonance-fluorescence spectra of a resonantly driven two-level atom.
//!
//! Two power spectra are computed and cross-checked here: the spectrum of the
//! electric-field signal built from a conditional-measurement correlation
//! function (sequential projective `σx` measurements at `t` and `t + τ`), and
//! the Mollow spectrum built from the quantum regression of `⟨σ+(τ)σ−(0)⟩`.
//! Every closed form has an independent numeric route next to it: a Liouvillian
//! integrator for the dynamics, a demodulated Fourier transform for the
//! spectra, accelerated quadrature for the field kernel, and a quantum-jump
//! Monte Carlo for the stationary state.
//!
//! All rates are angular frequencies in rad/s. Correlation functions are
//! stored as slowly varying envelopes with the optical carrier factored out.

pub mod cli;
pub mod correlation;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod quad;
pub mod special;
pub mod spectrum;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{
    beta_field, beta_mollow, sideband_rate, stationary_state, validate_params, BetaPair,
    BetaTerms, Betas, BlochState, SidebandRate, SystemParams,
};
