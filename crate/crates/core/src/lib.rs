//! Error-rate analysis and transmit power optimization for the unordered
//! V-BLAST (zero-forcing successive interference cancellation) detector in
//! i.i.d. Rayleigh fading with BPSK modulation.
//!
//! The crate covers four layers:
//!
//! - closed-form average error rates of the detector: per-step MRC BERs,
//!   block error rate (BLER), and total bit error rate (TBER) including
//!   error propagation ([`analytic`]);
//! - optimum power allocation across transmitters under a total power
//!   constraint, with closed-form high-SNR solutions, exact numerical
//!   optimizers, and low-SNR boundary solutions ([`allocator`]);
//! - SNR gain and robustness analysis of the optimized system ([`gain`],
//!   [`robustness`]);
//! - a deterministic Monte Carlo link simulator that cross-validates the
//!   analytic results ([`sim`]).
//!
//! The library is `no_std` (with `alloc`); all I/O, CLI handling, and file
//! formats live in the companion `vblast-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod allocator;
pub mod analytic;
mod error;
pub mod gain;
mod math;
pub mod model;
pub mod rng;
pub mod robustness;
pub mod sim;
pub mod special;

pub use error::Error;
pub use model::{Modulation, PowerAllocation, SnrPoint, SystemConfig};

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
