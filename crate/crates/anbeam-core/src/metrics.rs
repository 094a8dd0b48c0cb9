//! Link-quality and secrecy metrics computed from covariance-form solutions.
//!
//! The receiver decodes layers successively: layer `i` sees every higher
//! layer, the artificial noise, and thermal noise as interference. The same
//! structure is assumed at an eavesdropper. Secrecy rate per layer is the
//! clipped difference between the user rate and the best eavesdropper rate.
//!
//! All functions work on covariance matrices, so they apply equally to
//! rank-one solutions and to relaxed solutions with higher rank.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::SystemSpec;
use crate::linalg::{HermitianMatrix, LinalgError};
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("layer {layer} out of range for {n_layers} layers")]
    LayerOutOfRange { layer: usize, n_layers: usize },
    #[error("noise power must be positive and finite")]
    BadNoise,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn received_powers(
    ch: &[C64],
    w_blocks: &[HermitianMatrix],
    v: &HermitianMatrix,
) -> Result<(Vec<f64>, f64), MetricsError> {
    let mut per_layer = Vec::with_capacity(w_blocks.len());
    for w in w_blocks {
        per_layer.push(w.quad_form(ch)?);
    }
    Ok((per_layer, v.quad_form(ch)?))
}

fn sinr_at(
    ch: &[C64],
    w_blocks: &[HermitianMatrix],
    v: &HermitianMatrix,
    noise_power: f64,
    layer: usize,
) -> Result<f64, MetricsError> {
    if layer >= w_blocks.len() {
        return Err(MetricsError::LayerOutOfRange { layer, n_layers: w_blocks.len() });
    }
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(MetricsError::BadNoise);
    }
    let (layer_power, an_power) = received_powers(ch, w_blocks, v)?;
    let interference: f64 = layer_power[layer + 1..].iter().sum();
    Ok(layer_power[layer] / (interference + an_power + noise_power))
}

/// User SINR for `layer` (zero-based) under successive decoding.
pub fn sinr_layer(
    h: &[C64],
    w_blocks: &[HermitianMatrix],
    v: &HermitianMatrix,
    noise_power: f64,
    layer: usize,
) -> Result<f64, MetricsError> {
    sinr_at(h, w_blocks, v, noise_power, layer)
}

/// Eavesdropper SINR for `layer` through channel `g`, same decoding order.
pub fn sinr_eve(
    g: &[C64],
    w_blocks: &[HermitianMatrix],
    v: &HermitianMatrix,
    noise_power: f64,
    layer: usize,
) -> Result<f64, MetricsError> {
    sinr_at(g, w_blocks, v, noise_power, layer)
}

/// Secrecy rate of `layer` in bit/s/Hz:
/// `[log2(1 + sinr_user) - max_k log2(1 + sinr_eve_k)]^+`.
///
/// With no eavesdroppers present the subtrahend is empty and the plain user
/// rate is returned.
pub fn secrecy_rate(
    h: &[C64],
    g_list: &[Vec<C64>],
    w_blocks: &[HermitianMatrix],
    v: &HermitianMatrix,
    noise_power: f64,
    layer: usize,
) -> Result<f64, MetricsError> {
    let user = (1.0 + sinr_layer(h, w_blocks, v, noise_power, layer)?).log2();
    let mut worst_eve = 0.0f64;
    for g in g_list {
        let rate = (1.0 + sinr_eve(g, w_blocks, v, noise_power, layer)?).log2();
        worst_eve = worst_eve.max(rate);
    }
    Ok((user - worst_eve).max(0.0))
}

/// Total radiated power: `sum_i Tr(W_i) + Tr(V)`.
pub fn power_total(w_blocks: &[HermitianMatrix], v: &HermitianMatrix) -> f64 {
    w_blocks.iter().map(|w| w.trace()).sum::<f64>() + v.trace()
}

/// Per-antenna power: diagonal of `sum_i W_i + V`.
pub fn power_per_antenna(
    w_blocks: &[HermitianMatrix],
    v: &HermitianMatrix,
) -> Result<Vec<f64>, MetricsError> {
    let dim = v.dim();
    let mut out = Vec::with_capacity(dim);
    for n in 0..dim {
        let mut acc = v.get(n, n).re;
        for w in w_blocks {
            if w.dim() != dim {
                return Err(MetricsError::Linalg(LinalgError::DimMismatch {
                    left: dim,
                    right: w.dim(),
                }));
            }
            acc += w.get(n, n).re;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Guaranteed base-layer secrecy whenever the SINR constraints hold:
/// `log2(1 + gamma_req_1) - log2(1 + max_k gamma_tol_k)`.
pub fn secrecy_floor(spec: &SystemSpec) -> f64 {
    let user = (1.0 + spec.gamma_req[0]).log2();
    let eve = spec
        .gamma_tol
        .iter()
        .fold(0.0f64, |acc, t| acc.max((1.0 + t).log2()));
    user - eve
}
