//! Transmit power allocation for layered multicast with eavesdroppers.
//!
//! A multi-antenna transmitter broadcasts `L` successively refinable bitstream
//! layers to a user while `K-1` eavesdroppers listen. Each layer gets its own
//! beamforming vector and the transmitter may spend extra power on artificial
//! noise to mask the base layer. This crate builds the power-minimization
//! problems for that setup, solves their semidefinite relaxations with an
//! embedded dense interior-point solver, and checks the optimality
//! certificates that justify extracting rank-one beamformers from the
//! relaxed solutions.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable default
//! features and enable `libm`. Everything here is deterministic; identical
//! inputs produce identical bits on a given build.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod channel;
pub mod linalg;
pub mod metrics;
pub mod problems;
pub mod schemes;
pub mod sdp;

pub use num_complex::Complex;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
