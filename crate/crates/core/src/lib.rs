//! Tensor subspace estimation of elevation, azimuth and delay for wideband
//! hybrid uniform cylindrical arrays (UCyA).
//!
//! The crate is `no_std` and only needs an allocator. Processing order:
//!
//! 1. [`array`] describes the geometry and synthesizes snapshots.
//! 2. [`beamspace`] holds the Q-DFT analog and matched digital beamformers.
//! 3. [`focusing`] aligns every subcarrier to the reference frequency.
//! 4. [`estimator`] smooths, decomposes and extracts the path parameters.
//!
//! [`pipeline`] wires the stages together for a fixed array and configuration.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod array;
pub mod beamspace;
pub mod bessel;
pub mod error;
pub mod estimator;
pub mod focusing;
pub mod linalg;
pub mod pipeline;
pub mod tensor;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use tensor::{ComplexTensor, HosvdModel};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
