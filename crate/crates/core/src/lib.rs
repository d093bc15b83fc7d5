//! Multimode optomechanics for laser imaging of a vibrating membrane.
//!
//! The crate is organized bottom-up:
//!
//! - [`grid_modes`]: sampling grids, Hermite-Gauss beams, membrane modeshapes,
//!   inner products and Fraunhofer propagation.
//! - [`coupling`]: overlap factors `β`, `β∥`, `β⊥`, the scattered mode and its
//!   expansion in the co-translated Hermite-Gauss basis.
//! - [`mechanics`]: oscillator parameters, susceptibility and thermal force noise.
//! - [`spectra`]: closed-form imprecision, backaction, correlation and
//!   entanglement spectra.
//! - [`receivers`]: structured homodyne and far-field camera receivers.
//! - [`mc_oracle`]: semiclassical Monte-Carlo photon shot noise, used to check
//!   the backaction force spectrum independently of the closed forms.
//! - [`cli`]: scenario configuration and tabular output for the `optomech` binary.
//!
//! All quantities are SI. Power spectral densities are single-sided.

pub mod cli;
pub mod constants;
pub mod coupling;
pub mod error;
pub mod grid_modes;
pub mod mc_oracle;
pub mod mechanics;
pub mod receivers;
pub mod spectra;

pub use error::{Error, Result};
