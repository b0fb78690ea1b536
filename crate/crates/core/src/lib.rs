//! Ergodic capacity of point-to-point MIMO links with residual transceiver
//! hardware impairments.
//!
//! The transmitter and receiver distortion noises have powers proportional
//! to the signal power (levels `delta_t`, `delta_r`). The crate provides:
//!
//! * [`closedform`]: exact capacity for i.i.d. Rayleigh fading built on the
//!   unordered Wishart eigenvalue density, the high-SNR ceiling, and an
//!   independent quadrature evaluator;
//! * [`montecarlo`]: a reproducible, sharded simulation oracle;
//! * [`asymptotics`]: low-SNR metrics, large-array limits and the
//!   large-system deterministic equivalent;
//! * [`specfun`]: the special-function kernels underneath;
//! * [`cli`]: the batch front end used by the `mimo-capacity` binary.

pub mod asymptotics;
pub mod cli;
pub mod closedform;
mod error;
pub mod integrate;
pub mod model;
pub mod montecarlo;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{AntennaConfig, ImpairmentConfig, SnrSpec};
