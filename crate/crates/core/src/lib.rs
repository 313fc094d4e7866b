//! Simulation and analysis toolkit for a coherent-feedback clock made of two
//! coupled Kerr resonators.
//!
//! * [`slh`] composes the quantum network and extracts mean-field equations.
//! * [`dynamics`] integrates them, finds fixed points and limit cycles.
//! * [`stochastic`] adds noise and generates first-passage clock ticks.
//! * [`analysis`] emulates the heterodyne measurement chain and fits clock statistics.
//! * [`device`] maps circuit parameters to model parameters.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod device;
pub mod dynamics;
mod error;
pub mod slh;
pub mod stochastic;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/measurement.md")]
    mod measurement {}
    #[doc = include_str!("../../../book/src/device.md")]
    mod device {}
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hz to rad/s.
pub fn angular(hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * hz
}

/// rad/s to Hz.
pub fn hertz(rad_per_s: f64) -> f64 {
    rad_per_s / (2.0 * std::f64::consts::PI)
}
