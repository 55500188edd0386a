//! Analysis, Monte Carlo validation and sensing-time optimization for a
//! cognitive dual-hop amplify-and-forward relay network that harvests RF
//! energy from detected primary transmissions.
//!
//! Layering, bottom up:
//!
//! - [`specfun`]: Bessel functions and exponential integrals.
//! - [`fading`]: geometry, activity mixtures, order statistics.
//! - [`sensing`], [`harvest`], [`transmission`]: closed forms per frame phase.
//! - [`energy`]: frame energy, data constraint and the sensing-time optimizer.
//! - [`mcsim`]: the Monte Carlo oracle for all of the above.
//! - [`scenario`] and [`experiments`]: configuration, presets and CSV sweeps.

pub mod energy;
pub mod error;
pub mod experiments;
pub mod fading;
pub mod harvest;
pub mod mcsim;
pub mod scenario;
pub mod sensing;
pub mod specfun;
pub mod transmission;
pub mod units;

#[cfg(test)]
#[path = "../tests/common/quad.rs"]
mod quad;

pub use error::{Error, Result};
