//! Link budget and quantum key distribution feasibility models for
//! free-space optical downlinks from high-altitude platforms (HAPs).
//!
//! The crate is split along the physical chain of the link:
//!
//! - [`geometry`]: slant ranges and ground footprints.
//! - [`optics`]: beam divergence, receiver field of view, pointing and beam wander.
//! - [`atmosphere`]: molecular absorption, visibility-based weather attenuation,
//!   sky radiance presets and turbulence parameters.
//! - [`budget`]: total channel loss under the per-mechanism sum ("method 1")
//!   and the NanoBob estimate.
//! - [`qkd`]: DV-QKD count rates, QBER and loss thresholds; CV-QKD SNR.
//! - [`harness`]: scenario files, figure sweeps, the platform catalog and
//!   table emitters used by the command-line tool.
//!
//! Every computation is a pure function of its inputs.

pub mod atmosphere;
pub mod budget;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod optics;
pub mod qkd;

pub use error::{ModelError, Result};
