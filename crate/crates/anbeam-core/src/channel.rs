//! System parameters and fading-channel generation.
//!
//! Channels are i.i.d. circularly symmetric complex Gaussian with per-entry
//! variance set by a log-distance path loss, `34.53 + 38 log10(d)` dB for a
//! distance `d` in meters (valid for `d >= 1`). Sampling is driven by a named
//! counter-based generator (ChaCha8) so a scenario is a pure function of the
//! seed: the same `(seed, spec, n_eves)` always reproduces the same bits.
//!
//! Draw order is part of the format: the user channel's `n_tx` entries come
//! first, then each eavesdropper's in index order, one Box-Muller pair per
//! complex entry. Extending `n_eves` therefore extends a scenario without
//! disturbing the earlier draws.

use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)]
use num_traits::Float;

use rand_core::{RngCore, SeedableRng};

use crate::linalg::HermitianMatrix;
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("invalid system spec: {reason}")]
    InvalidSpec { reason: &'static str },
    #[error("path loss model is undefined below one meter (got {meters} m)")]
    DistanceBelowOneMeter { meters: f64 },
}

/// Static system description: array size, layer targets, eavesdropper caps,
/// power budget, and geometry. SINR values are linear and powers are watts;
/// decibel forms belong to the CLI boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// Transmit antennas at the base station.
    pub n_tx: usize,
    /// Number of successively refinable layers `L`.
    pub n_layers: usize,
    /// Per-layer minimum user SINR, linear, length `n_layers`.
    pub gamma_req: Vec<f64>,
    /// Per-eavesdropper maximum base-layer SINR, linear, length `K - 1`.
    pub gamma_tol: Vec<f64>,
    /// Per-antenna power cap in watts, length `n_tx`.
    pub p_max: Vec<f64>,
    /// Receiver noise power in watts.
    pub noise_power: f64,
    /// Transmitter-to-user distance in meters.
    pub user_distance_m: f64,
    /// Transmitter-to-eavesdropper distance in meters (same for all).
    pub eve_distance_m: f64,
}

impl SystemSpec {
    pub fn n_eves(&self) -> usize {
        self.gamma_tol.len()
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let fail = |reason| Err(ChannelError::InvalidSpec { reason });
        if self.n_tx == 0 {
            return fail("n_tx must be at least one");
        }
        if self.n_layers == 0 {
            return fail("n_layers must be at least one");
        }
        if self.gamma_req.len() != self.n_layers {
            return fail("gamma_req length must equal n_layers");
        }
        if !self.gamma_req.iter().all(|g| g.is_finite() && *g > 0.0) {
            return fail("gamma_req entries must be positive and finite");
        }
        if !self.gamma_tol.iter().all(|g| g.is_finite() && *g > 0.0) {
            return fail("gamma_tol entries must be positive and finite");
        }
        if self.p_max.len() != self.n_tx {
            return fail("p_max length must equal n_tx");
        }
        if !self.p_max.iter().all(|p| p.is_finite() && *p > 0.0) {
            return fail("p_max entries must be positive and finite");
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return fail("noise_power must be positive and finite");
        }
        if !(self.user_distance_m.is_finite() && self.user_distance_m >= 1.0) {
            return fail("user_distance_m must be at least one meter");
        }
        if !(self.eve_distance_m.is_finite() && self.eve_distance_m >= 1.0) {
            return fail("eve_distance_m must be at least one meter");
        }
        Ok(())
    }
}

/// One fading realization: user channel `h`, eavesdropper channels `g`, and
/// the noise power the SINR expressions divide by.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub h: Vec<C64>,
    pub g: Vec<Vec<C64>>,
    pub noise_power: f64,
}

/// Log-distance path loss in dB; `d` in meters, defined for `d >= 1`.
pub fn path_loss_db(d: f64) -> Result<f64, ChannelError> {
    if !(d.is_finite() && d >= 1.0) {
        return Err(ChannelError::DistanceBelowOneMeter { meters: d });
    }
    Ok(34.53 + 38.0 * d.log10())
}

/// Linear per-entry channel power `E{|h_n|^2}` at distance `d`.
pub fn path_gain(d: f64) -> Result<f64, ChannelError> {
    Ok(10.0f64.powf(-path_loss_db(d)? / 10.0))
}

struct GaussianSource {
    rng: rand_chacha::ChaCha8Rng,
}

impl GaussianSource {
    fn new(seed: u64) -> Self {
        Self { rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed) }
    }

    fn unit_open(&mut self) -> f64 {
        // 53 uniform bits mapped to (0, 1]; never zero, so ln is safe.
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn unit_half_open(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One Box-Muller pair of independent standard normals.
    fn normal_pair(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.unit_open().ln()).sqrt();
        let theta = TAU * self.unit_half_open();
        (r * theta.cos(), r * theta.sin())
    }

    /// Circularly symmetric complex Gaussian with `E{|x|^2} = variance`.
    fn complex_normal(&mut self, variance: f64) -> C64 {
        let s = (variance / 2.0).sqrt();
        let (re, im) = self.normal_pair();
        C64::new(re * s, im * s)
    }
}

/// Draws one scenario. Pure function of `(seed, spec, n_eves)`.
pub fn sample_scenario(
    seed: u64,
    spec: &SystemSpec,
    n_eves: usize,
) -> Result<Scenario, ChannelError> {
    spec.validate()?;
    let user_var = path_gain(spec.user_distance_m)?;
    let eve_var = path_gain(spec.eve_distance_m)?;
    let mut src = GaussianSource::new(seed);
    let h: Vec<C64> = (0..spec.n_tx).map(|_| src.complex_normal(user_var)).collect();
    let g: Vec<Vec<C64>> = (0..n_eves)
        .map(|_| (0..spec.n_tx).map(|_| src.complex_normal(eve_var)).collect())
        .collect();
    Ok(Scenario { h, g, noise_power: spec.noise_power })
}

/// Rescales so the noise power is one: channels divide by `sqrt(noise)`.
/// Every SINR is invariant, but the solver sees well-conditioned data
/// instead of raw channel gains around 1e-10.
pub fn normalize_scenario(s: &Scenario) -> Scenario {
    let root = s.noise_power.sqrt();
    let scale = 1.0 / root;
    Scenario {
        h: s.h.iter().map(|x| x * scale).collect(),
        g: s.g.iter().map(|gk| gk.iter().map(|x| x * scale).collect()).collect(),
        noise_power: 1.0,
    }
}

/// Channel gram matrix `v v^H`.
pub fn gram(v: &[C64]) -> HermitianMatrix {
    HermitianMatrix::outer(v).expect("channel vectors are non-empty and finite")
}
