//! Generative-space mmWave sensing simulator.
//!
//! Sensing is modeled as traversal of a small discrete control space
//! `u = (f, q, s)`: a center-frequency state, an aperture state and a
//! waveform/polarization state. Several FMCW chains ("trunks") each drive a
//! row of frequency-selective clip-on modules; every module radiates a set of
//! frequency-indexed probing states, and each of those states becomes one
//! virtual aperture element.
//!
//! ```text
//! scenario ──> scheduler ──> trajectory ──> fmcw (dechirp per state)
//!                                               │
//!                                  range profile (fast time)
//!                                               │
//!                      back-projection over elements (slow time)
//!                                               │
//!                       4-channel image ──> scattering estimates
//! ```
//!
//! The [`arch`] module carries the analytical comparison of phased-array,
//! TDM-MIMO and multi-chain frequency-as-aperture architectures.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arch;
pub mod config;
pub mod error;
pub mod fmcw;
pub mod generative_space;
pub mod harness;
pub mod imaging;
pub mod polarimetry;
pub mod scene;
pub mod scheduler;

pub use error::{Error, FieldError, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Rounded propagation speed used for back-of-envelope figures.
pub const SPEED_OF_LIGHT_ROUNDED: f64 = 3.0e8;

pub type Vec3 = [f64; 3];

pub(crate) fn distance(a: &Vec3, b: &Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}
