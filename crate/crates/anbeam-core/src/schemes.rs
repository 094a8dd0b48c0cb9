//! Power-allocation schemes and their optimality certificates.
//!
//! Five entry points share one outcome type:
//!
//! * [`solve_relaxation`]: the rank-relaxed problem. Its objective is a
//!   certified lower bound on every scheme; when all returned blocks are
//!   rank one it is the exact optimum.
//! * [`solve_scheme1`]: the conservative variant with guaranteed rank-one
//!   structure (a non-rank-one block is a solver bug and is reported as
//!   `Failed`, never silently accepted).
//! * [`solve_scheme2`]: the hybrid rule: take the relaxation when its blocks
//!   are rank one (certified global optimum), otherwise fall back to scheme
//!   1. The relaxation result is reused, not re-solved.
//! * [`solve_baseline_single`] / [`solve_baseline_mrt`]: the two reference
//!   schemes (single-layer transmission, matched-direction beams).
//!
//! Certificates never trust the object they certify: [`verify_feasibility`]
//! recomputes SINRs and powers through the metrics module, and [`check_kkt`]
//! rebuilds the dual slack blocks from the multipliers and channel data and
//! compares them against the solver's certificate.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{gram, Scenario, SystemSpec};
use crate::linalg::{frob_inner, HermitianMatrix, DEFAULT_RANK_TOL};
use crate::metrics::{self, MetricsError};
use crate::problems::{
    build_baseline_mrt, build_baseline_single, build_relaxed, build_suboptimal1, gamma_single,
    BuiltProblem, LayerVariables, ProblemError,
};
use crate::sdp::{self, SdpError, SdpSolution, SolveOptions, SolveStatus};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Relaxed,
    Scheme1,
    Scheme2,
    BaselineSingle,
    BaselineMrt,
}

impl core::fmt::Display for Scheme {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let name = match self {
            Scheme::Relaxed => "relaxed",
            Scheme::Scheme1 => "scheme1",
            Scheme::Scheme2 => "scheme2",
            Scheme::BaselineSingle => "baseline-single",
            Scheme::BaselineMrt => "baseline-mrt",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeStatus {
    Solved,
    Infeasible,
    Failed,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error("beamformer extraction needs rank-one blocks; layer {layer} has rank {rank}")]
    RankNotOne { layer: usize, rank: usize },
    #[error("certificate checks require a solved relaxation")]
    NotOptimal,
    #[error("certificate checks apply to the relaxed problem only")]
    WrongKind,
}

/// Result of one scheme on one channel realization. Matrix payloads are
/// populated from the solver's final iterate even on non-`Solved` statuses
/// (for diagnosis); consumers must gate on `status`.
#[derive(Debug, Clone)]
pub struct AllocationOutcome {
    pub scheme: Scheme,
    pub status: OutcomeStatus,
    /// Per-layer transmit covariances (one entry for the single-layer baseline).
    pub w_blocks: Vec<HermitianMatrix>,
    /// Artificial-noise covariance.
    pub v: HermitianMatrix,
    /// Extracted beamformers, present iff `status == Solved` and every layer
    /// block is rank one.
    pub beamformers: Option<Vec<Vec<C64>>>,
    pub total_power: f64,
    pub per_antenna_power: Vec<f64>,
    /// Numerical rank of each layer block at the 1e-6 eigenvalue-ratio threshold.
    pub rank_flags: Vec<usize>,
    /// True iff this outcome carries a global-optimality certificate (the
    /// relaxation itself, or the hybrid when it certified rank one).
    pub global_optimal: bool,
    pub solver_iterations: usize,
    pub duality_gap: f64,
}

impl AllocationOutcome {
    pub fn all_rank_one(&self) -> bool {
        !self.rank_flags.is_empty() && self.rank_flags.iter().all(|&r| r == 1)
    }
}

fn reconstruct_layers(built: &BuiltProblem, sol: &SdpSolution) -> Vec<HermitianMatrix> {
    match &built.layers {
        LayerVariables::Blocks(idx) => idx.iter().map(|&b| sol.blocks[b].clone()).collect(),
        LayerVariables::FixedDirection { scalars, direction } => {
            let rank1 = HermitianMatrix::outer(direction).expect("direction is nonzero");
            scalars.iter().map(|&s| rank1.scaled(sol.scalars[s])).collect()
        }
    }
}

fn outcome_from_solution(
    scheme: Scheme,
    built: &BuiltProblem,
    sol: &SdpSolution,
    global_optimal_if_solved: bool,
) -> AllocationOutcome {
    let status = match sol.status {
        SolveStatus::Optimal => OutcomeStatus::Solved,
        SolveStatus::Infeasible => OutcomeStatus::Infeasible,
        SolveStatus::Unbounded | SolveStatus::NumericalFailure => OutcomeStatus::Failed,
    };
    let w_blocks = reconstruct_layers(built, sol);
    let v = sol.blocks[built.an_block].clone();
    let rank_flags: Vec<usize> = w_blocks
        .iter()
        .map(|w| w.numerical_rank(DEFAULT_RANK_TOL))
        .collect();
    let beamformers = if status == OutcomeStatus::Solved {
        extract_beamformers(&w_blocks).ok()
    } else {
        None
    };
    let total_power = metrics::power_total(&w_blocks, &v);
    let per_antenna_power =
        metrics::power_per_antenna(&w_blocks, &v).expect("blocks share the antenna dimension");
    AllocationOutcome {
        scheme,
        status,
        w_blocks,
        v,
        beamformers,
        total_power,
        per_antenna_power,
        rank_flags,
        global_optimal: global_optimal_if_solved && status == OutcomeStatus::Solved,
        solver_iterations: sol.iterations,
        duality_gap: sol.residuals.duality_gap,
    }
}

/// Built problem plus raw solver output, for certificate checks and for the
/// hybrid rule (which reuses the relaxation instead of re-solving it).
pub struct SolveArtifacts {
    pub built: BuiltProblem,
    pub solution: SdpSolution,
}

pub fn solve_relaxation_with_artifacts(
    s: &Scenario,
    spec: &SystemSpec,
) -> Result<(AllocationOutcome, SolveArtifacts), SchemeError> {
    let built = build_relaxed(s, spec)?;
    let solution = sdp::solve(&built.sdp, SolveOptions::default())?;
    let out = outcome_from_solution(Scheme::Relaxed, &built, &solution, true);
    Ok((out, SolveArtifacts { built, solution }))
}

/// Rank-relaxed solve: the certified power lower bound.
pub fn solve_relaxation(s: &Scenario, spec: &SystemSpec) -> Result<AllocationOutcome, SchemeError> {
    solve_relaxation_with_artifacts(s, spec).map(|(out, _)| out)
}

/// Conservative scheme: rank-one by construction of its problem; a non-rank-
/// one solved block is demoted to `Failed` instead of silently accepted.
pub fn solve_scheme1(s: &Scenario, spec: &SystemSpec) -> Result<AllocationOutcome, SchemeError> {
    let built = build_suboptimal1(s, spec)?;
    let solution = sdp::solve(&built.sdp, SolveOptions::default())?;
    let mut out = outcome_from_solution(Scheme::Scheme1, &built, &solution, false);
    if out.status == OutcomeStatus::Solved && !out.all_rank_one() {
        out.status = OutcomeStatus::Failed;
        out.beamformers = None;
    }
    Ok(out)
}

/// Hybrid rule: return the relaxation when it certifies rank one (global
/// optimum), otherwise the conservative scheme. The relaxation being
/// infeasible settles the question outright, because the conservative
/// feasible set is contained in the relaxed one.
pub fn solve_scheme2(s: &Scenario, spec: &SystemSpec) -> Result<AllocationOutcome, SchemeError> {
    let (relaxed, _) = solve_relaxation_with_artifacts(s, spec)?;
    solve_scheme2_from(s, spec, relaxed)
}

/// Hybrid rule applied to an already-computed relaxation outcome; used by
/// the Monte Carlo harness to avoid duplicate solves.
pub fn solve_scheme2_from(
    s: &Scenario,
    spec: &SystemSpec,
    relaxed: AllocationOutcome,
) -> Result<AllocationOutcome, SchemeError> {
    debug_assert_eq!(relaxed.scheme, Scheme::Relaxed);
    match relaxed.status {
        OutcomeStatus::Solved if relaxed.all_rank_one() => {
            let mut out = relaxed;
            out.scheme = Scheme::Scheme2;
            out.global_optimal = true;
            Ok(out)
        }
        OutcomeStatus::Infeasible => {
            let mut out = relaxed;
            out.scheme = Scheme::Scheme2;
            out.global_optimal = false;
            Ok(out)
        }
        _ => {
            let mut out = solve_scheme1(s, spec)?;
            out.scheme = Scheme::Scheme2;
            Ok(out)
        }
    }
}

/// Single-layer baseline at the combined SINR target.
pub fn solve_baseline_single(
    s: &Scenario,
    spec: &SystemSpec,
) -> Result<AllocationOutcome, SchemeError> {
    let built = build_baseline_single(s, spec)?;
    let solution = sdp::solve(&built.sdp, SolveOptions::default())?;
    Ok(outcome_from_solution(Scheme::BaselineSingle, &built, &solution, false))
}

/// Matched-direction baseline: beams fixed along `h/||h||`.
pub fn solve_baseline_mrt(
    s: &Scenario,
    spec: &SystemSpec,
) -> Result<AllocationOutcome, SchemeError> {
    let built = build_baseline_mrt(s, spec)?;
    let solution = sdp::solve(&built.sdp, SolveOptions::default())?;
    Ok(outcome_from_solution(Scheme::BaselineMrt, &built, &solution, false))
}

/// Recovers `w_i` with `w_i w_i^H = W_i` from rank-one blocks (scaled
/// dominant eigenvector, phase fixed by the linear algebra layer).
pub fn extract_beamformers(
    w_blocks: &[HermitianMatrix],
) -> Result<Vec<Vec<C64>>, SchemeError> {
    let mut out = Vec::with_capacity(w_blocks.len());
    for (layer, w) in w_blocks.iter().enumerate() {
        let rank = w.numerical_rank(DEFAULT_RANK_TOL);
        if rank != 1 {
            return Err(SchemeError::RankNotOne { layer, rank });
        }
        let (lead, u) = w.dominant_component().expect("rank-one block is nonzero");
        let scale = lead.max(0.0).sqrt();
        out.push(u.into_iter().map(|z| z * scale).collect());
    }
    Ok(out)
}

/// Independent feasibility audit of a solved outcome. All figures are
/// relative; `max_violation` also folds in any negative eigenvalue of the
/// artificial-noise block.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    /// Per layer: relative SINR shortfall below its floor.
    pub c1_violation: Vec<f64>,
    /// Per eavesdropper: relative SINR excess above the cap.
    pub c2_violation: Vec<f64>,
    /// Per antenna: relative power excess above the cap.
    pub c3_violation: Vec<f64>,
    /// Smallest eigenvalue of the artificial-noise covariance.
    pub an_min_eig: f64,
    pub max_violation: f64,
}

pub fn verify_feasibility(
    s: &Scenario,
    spec: &SystemSpec,
    out: &AllocationOutcome,
) -> Result<FeasibilityReport, SchemeError> {
    // Prefer the extracted beamformers when present: this audits the final
    // deliverable, not the solver's matrix iterate.
    let w_blocks: Vec<HermitianMatrix> = match &out.beamformers {
        Some(ws) => ws
            .iter()
            .map(|w| HermitianMatrix::outer(w))
            .collect::<Result<_, _>>()
            .map_err(MetricsError::from)?,
        None => out.w_blocks.clone(),
    };
    let single = [gamma_single(spec)];
    let targets: &[f64] = if out.scheme == Scheme::BaselineSingle {
        &single
    } else {
        &spec.gamma_req
    };

    let mut c1 = Vec::with_capacity(targets.len());
    for (i, &gamma) in targets.iter().enumerate() {
        let sinr = metrics::sinr_layer(&s.h, &w_blocks, &out.v, s.noise_power, i)?;
        c1.push(((gamma - sinr) / gamma).max(0.0));
    }
    let mut c2 = Vec::with_capacity(s.g.len());
    for (k, g) in s.g.iter().enumerate() {
        let sinr = metrics::sinr_eve(g, &w_blocks, &out.v, s.noise_power, 0)?;
        c2.push(((sinr - spec.gamma_tol[k]) / spec.gamma_tol[k]).max(0.0));
    }
    let per_antenna = metrics::power_per_antenna(&w_blocks, &out.v)?;
    let c3: Vec<f64> = per_antenna
        .iter()
        .zip(&spec.p_max)
        .map(|(p, cap)| ((p - cap) / cap).max(0.0))
        .collect();
    let an_min_eig = out.v.min_eig();
    let eig_violation = (-an_min_eig).max(0.0) / out.total_power.abs().max(1.0);
    let max_violation = c1
        .iter()
        .chain(&c2)
        .chain(&c3)
        .copied()
        .fold(eig_violation, f64::max);
    Ok(FeasibilityReport { c1_violation: c1, c2_violation: c2, c3_violation: c3, an_min_eig, max_violation })
}

/// Multiplier-level certificate for a solved relaxation, rebuilt from the
/// constraint duals and raw channel data.
#[derive(Debug, Clone)]
pub struct KktReport {
    /// Per-layer SINR-floor multipliers (target-scaled).
    pub lambda: Vec<f64>,
    /// Per-eavesdropper cap multipliers (cap-scaled).
    pub beta: Vec<f64>,
    /// Per-antenna power multipliers.
    pub delta: Vec<f64>,
    /// Relative Frobenius mismatch between each reconstructed dual slack and
    /// the solver's certificate: layers first, artificial noise last.
    pub stationarity_residual: Vec<f64>,
    /// Per-layer `|Tr(Y_i W_i)|`.
    pub complementarity: Vec<f64>,
    /// `|Tr(Z V)|`.
    pub an_complementarity: f64,
    /// Worst of the complementarity figures.
    pub complementarity_residual: f64,
    /// Smallest eigenvalue of each reconstructed layer slack (dual feasibility).
    pub min_eig_y: Vec<f64>,
    pub min_eig_z: f64,
    /// Per layer `|SINR_i - floor_i| / floor_i`: the floors bind at any optimum.
    pub c1_activity: Vec<f64>,
}

pub fn check_kkt(
    artifacts: &SolveArtifacts,
    s: &Scenario,
    spec: &SystemSpec,
) -> Result<KktReport, SchemeError> {
    let built = &artifacts.built;
    let sol = &artifacts.solution;
    if built.kind != crate::problems::ProblemKind::Relaxed {
        return Err(SchemeError::WrongKind);
    }
    if sol.status != SolveStatus::Optimal {
        return Err(SchemeError::NotOptimal);
    }
    let layer_blocks = match &built.layers {
        LayerVariables::Blocks(b) => b,
        LayerVariables::FixedDirection { .. } => return Err(SchemeError::WrongKind),
    };
    let l = layer_blocks.len();
    let n = spec.n_tx;

    // Cleared-row duals; the target-scaled multipliers of the fractional
    // form are gamma * dual because clearing multiplied each row through by
    // its denominator.
    let a: Vec<f64> = built.c1_rows.iter().map(|&r| sol.duals[r]).collect();
    let b: Vec<f64> = built.c2_rows.iter().map(|&r| sol.duals[r]).collect();
    let delta: Vec<f64> = built.c3_rows.iter().map(|&r| sol.duals[r]).collect();
    let lambda: Vec<f64> = a.iter().zip(&spec.gamma_req).map(|(ai, g)| ai * g).collect();
    let beta: Vec<f64> = b.iter().zip(&spec.gamma_tol).map(|(bk, g)| bk * g).collect();

    let h_mat = gram(&s.h);
    let g_mats: Vec<HermitianMatrix> = s.g.iter().map(|g| gram(g)).collect();
    let upsilon = {
        let mut diag = alloc::vec![1.0; n];
        for (d, dn) in diag.iter_mut().zip(&delta) {
            *d += dn;
        }
        HermitianMatrix::from_real_diag(&diag)
    };

    // Dual slack for layer i (0-based): the base layer gains the
    // eavesdropper terms with positive sign, higher layers with the
    // cap-scaled negative sign plus the accumulated floor pressure.
    let mut slacks: Vec<HermitianMatrix> = Vec::with_capacity(l + 1);
    for i in 0..l {
        let mut y = upsilon.clone();
        if i == 0 {
            for (k, g) in g_mats.iter().enumerate() {
                y.add_scaled_assign(g, b[k]).expect("channel grams share the antenna dimension");
            }
            y.add_scaled_assign(&h_mat, -a[0]).expect("channel grams share the antenna dimension");
        } else {
            for (k, g) in g_mats.iter().enumerate() {
                y.add_scaled_assign(g, -spec.gamma_tol[k] * b[k]).expect("channel grams share the antenna dimension");
            }
            let pressure: f64 = (0..i).map(|j| spec.gamma_req[j] * a[j]).sum();
            y.add_scaled_assign(&h_mat, pressure - a[i]).expect("channel grams share the antenna dimension");
        }
        slacks.push(y);
    }
    let mut z = upsilon.clone();
    z.add_scaled_assign(&h_mat, lambda.iter().sum::<f64>()).expect("channel grams share the antenna dimension");
    for (k, g) in g_mats.iter().enumerate() {
        z.add_scaled_assign(g, -beta[k]).expect("channel grams share the antenna dimension");
    }
    slacks.push(z);

    let mut stationarity = Vec::with_capacity(l + 1);
    let block_order: Vec<usize> = layer_blocks.iter().copied().chain([built.an_block]).collect();
    for (slack, &blk) in slacks.iter().zip(&block_order) {
        let diff = slack.sub(&sol.dual_blocks[blk]).expect("same dimension");
        stationarity.push(diff.frobenius_norm() / (1.0 + slack.frobenius_norm()));
    }

    let mut complementarity = Vec::with_capacity(l);
    for (i, &blk) in layer_blocks.iter().enumerate() {
        complementarity.push(frob_inner(&slacks[i], &sol.blocks[blk])?.abs());
    }
    let an_complementarity = frob_inner(&slacks[l], &sol.blocks[built.an_block])?.abs();
    let complementarity_residual = complementarity
        .iter()
        .copied()
        .fold(an_complementarity, f64::max);

    let min_eig_y: Vec<f64> = slacks[..l].iter().map(|y| y.min_eig()).collect();
    let min_eig_z = slacks[l].min_eig();

    let w_blocks: Vec<HermitianMatrix> =
        layer_blocks.iter().map(|&bi| sol.blocks[bi].clone()).collect();
    let v = &sol.blocks[built.an_block];
    let mut c1_activity = Vec::with_capacity(l);
    for (i, &gamma) in spec.gamma_req.iter().enumerate() {
        let sinr = metrics::sinr_layer(&s.h, &w_blocks, v, s.noise_power, i)?;
        c1_activity.push((sinr - gamma).abs() / gamma);
    }

    Ok(KktReport {
        lambda,
        beta,
        delta,
        stationarity_residual: stationarity,
        complementarity,
        an_complementarity,
        complementarity_residual,
        min_eig_y,
        min_eig_z,
        c1_activity,
    })
}

/// Numerical evaluation of the rank-one structure claim.
#[derive(Debug, Clone)]
pub struct RankStructureReport {
    pub rank_w1: usize,
    /// True when every cap multiplier is at most 1e-6.
    pub all_beta_zero: bool,
    pub higher_ranks: Vec<usize>,
    /// `rank_w1 == 1`, and if the caps are all slack, every higher layer is
    /// rank one as well. False indicates a solver or builder bug.
    pub consistent: bool,
}

pub fn check_rank_structure(out: &AllocationOutcome, report: &KktReport) -> RankStructureReport {
    let rank_w1 = out.rank_flags.first().copied().unwrap_or(0);
    let all_beta_zero = report.beta.iter().all(|b| *b <= 1e-6);
    let higher_ranks: Vec<usize> = out.rank_flags.iter().skip(1).copied().collect();
    let higher_ok = !all_beta_zero || higher_ranks.iter().all(|&r| r == 1);
    RankStructureReport {
        rank_w1,
        all_beta_zero,
        higher_ranks,
        consistent: rank_w1 == 1 && higher_ok,
    }
}

/// Backward-recursion closed form for the no-eavesdropper case with slack
/// antenna caps: matched beams are optimal, each layer needs
/// `p_i = gamma_i (sigma^2 + ||h||^2 sum_{j>i} p_j) / ||h||^2`.
pub fn no_eve_power_oracle(h: &[C64], gamma_req: &[f64], noise_power: f64) -> f64 {
    let gain: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    let mut above = 0.0;
    let mut total = 0.0;
    for &gamma in gamma_req.iter().rev() {
        let p = gamma * (noise_power + gain * above) / gain;
        total += p;
        above += p;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{normalize_scenario, sample_scenario};
    use alloc::vec;
    use approx::assert_relative_eq;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn open_spec(n_tx: usize, gamma_req: Vec<f64>) -> SystemSpec {
        SystemSpec {
            n_tx,
            n_layers: gamma_req.len(),
            gamma_req,
            gamma_tol: vec![],
            p_max: vec![1e6; n_tx],
            noise_power: 1.0,
            user_distance_m: 50.0,
            eve_distance_m: 30.0,
        }
    }

    /// 4 antennas, three layers at 6/9/12 dB, three eavesdroppers capped at
    /// -10 dB, 43 dBm antenna budget, -95 dBm noise.
    fn table_spec() -> SystemSpec {
        SystemSpec {
            n_tx: 4,
            n_layers: 3,
            gamma_req: vec![10f64.powf(0.6), 10f64.powf(0.9), 10f64.powf(1.2)],
            gamma_tol: vec![0.1, 0.1, 0.1],
            p_max: vec![19.952623149688797; 4],
            noise_power: 3.1622776601683794e-13,
            user_distance_m: 50.0,
            eve_distance_m: 30.0,
        }
    }

    fn table_scenario(seed: u64) -> (Scenario, SystemSpec) {
        let spec = table_spec();
        let s = sample_scenario(seed, &spec, spec.n_eves()).unwrap();
        (normalize_scenario(&s), spec)
    }

    #[test]
    fn no_eavesdropper_solution_matches_backward_recursion() {
        // Frozen instance: h = (1, 0), floors (1, 3) => p2 = 3, p1 = 4.
        let spec = open_spec(2, vec![1.0, 3.0]);
        let s = Scenario { h: vec![re(1.0), re(0.0)], g: vec![], noise_power: 1.0 };
        assert_relative_eq!(no_eve_power_oracle(&s.h, &spec.gamma_req, 1.0), 7.0, max_relative = 1e-12);

        let out = solve_relaxation(&s, &spec).unwrap();
        assert_eq!(out.status, OutcomeStatus::Solved);
        assert_relative_eq!(out.total_power, 7.0, max_relative = 1e-5);
        assert!(out.v.trace() <= 1e-7 * out.total_power);
        assert!(out.global_optimal);
        assert!(out.all_rank_one());
    }

    #[test]
    fn scalar_channel_closed_form() {
        let spec = open_spec(1, vec![2.0]);
        let s = Scenario { h: vec![re(1.0)], g: vec![], noise_power: 1.0 };
        let out = solve_relaxation(&s, &spec).unwrap();
        assert_eq!(out.status, OutcomeStatus::Solved);
        assert_relative_eq!(out.total_power, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn conservative_scheme_equals_relaxation_without_eavesdroppers() {
        let spec = open_spec(3, vec![2.0, 1.0]);
        let s = Scenario {
            h: vec![re(1.0), C64::new(0.5, -0.5), re(0.25)],
            g: vec![],
            noise_power: 1.0,
        };
        let relaxed = solve_relaxation(&s, &spec).unwrap();
        let s1 = solve_scheme1(&s, &spec).unwrap();
        assert_eq!(s1.status, OutcomeStatus::Solved);
        assert_relative_eq!(relaxed.total_power, s1.total_power, max_relative = 1e-6);
        assert!(s1.all_rank_one());
        assert!(s1.beamformers.is_some());
    }

    #[test]
    fn hybrid_reuses_the_rank_one_relaxation() {
        let (s, spec) = table_scenario(11);
        let (relaxed, _) = solve_relaxation_with_artifacts(&s, &spec).unwrap();
        assert_eq!(relaxed.status, OutcomeStatus::Solved);
        assert!(relaxed.all_rank_one(), "ranks {:?}", relaxed.rank_flags);

        let hybrid = solve_scheme2(&s, &spec).unwrap();
        assert_eq!(hybrid.scheme, Scheme::Scheme2);
        assert!(hybrid.global_optimal);
        // Identical payload, bit for bit: the hybrid must reuse, not re-solve.
        assert_eq!(hybrid.total_power.to_bits(), relaxed.total_power.to_bits());
        for (a, b) in hybrid.w_blocks.iter().zip(&relaxed.w_blocks) {
            assert_eq!(a.entries(), b.entries());
        }
    }

    #[test]
    fn power_ordering_across_schemes() {
        for seed in [3u64, 17, 40] {
            let (s, spec) = table_scenario(seed);
            let relaxed = solve_relaxation(&s, &spec).unwrap();
            let s1 = solve_scheme1(&s, &spec).unwrap();
            let s2 = solve_scheme2(&s, &spec).unwrap();
            let single = solve_baseline_single(&s, &spec).unwrap();
            let mrt = solve_baseline_mrt(&s, &spec).unwrap();
            for out in [&relaxed, &s1, &s2, &single, &mrt] {
                assert_eq!(out.status, OutcomeStatus::Solved, "seed {seed} scheme {}", out.scheme);
            }
            let slack = 1e-6 * (1.0 + relaxed.total_power.abs());
            assert!(relaxed.total_power <= s2.total_power + slack);
            assert!(s2.total_power <= s1.total_power + slack);
            assert!(s1.total_power <= mrt.total_power + slack, "seed {seed}");
            assert!(relaxed.total_power <= single.total_power + slack);
        }
    }

    #[test]
    fn beamformer_extraction_round_trips() {
        let w = HermitianMatrix::basis(3, 0).scaled(4.0);
        let vecs = extract_beamformers(&[w]).unwrap();
        assert_relative_eq!(vecs[0][0].re, 2.0, max_relative = 1e-12);
        assert!(vecs[0][1].norm() <= 1e-12 && vecs[0][2].norm() <= 1e-12);

        let target = vec![C64::new(0.3, -1.1), C64::new(0.0, 0.7), re(2.0)];
        let block = HermitianMatrix::outer(&target).unwrap();
        let recovered = extract_beamformers(core::slice::from_ref(&block)).unwrap();
        let round = HermitianMatrix::outer(&recovered[0]).unwrap();
        let diff = round.sub(&block).unwrap();
        assert!(diff.frobenius_norm() <= 1e-9 * block.frobenius_norm());
        let norm_sq: f64 = recovered[0].iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(norm_sq, block.trace(), max_relative = 1e-6);

        let err = extract_beamformers(&[HermitianMatrix::identity(2)]).unwrap_err();
        assert_eq!(err, SchemeError::RankNotOne { layer: 0, rank: 2 });
    }

    #[test]
    fn feasibility_audit_accepts_solved_and_flags_tampering() {
        let (s, spec) = table_scenario(23);
        let out = solve_relaxation(&s, &spec).unwrap();
        assert_eq!(out.status, OutcomeStatus::Solved);
        let report = verify_feasibility(&s, &spec, &out).unwrap();
        assert!(report.max_violation <= 1e-6, "violation {}", report.max_violation);

        // Halving the base-layer beam starves its SINR floor.
        let mut tampered = out.clone();
        tampered.w_blocks[0] = tampered.w_blocks[0].scaled(0.25);
        tampered.beamformers = None;
        let report = verify_feasibility(&s, &spec, &tampered).unwrap();
        assert!(report.c1_violation[0] > 1e-3, "c1 {:?}", report.c1_violation);

        // An indefinite artificial-noise block is a hard violation.
        let mut negative = out.clone();
        let mut diag = vec![0.0; spec.n_tx];
        diag[0] = -1e-3;
        negative.v = negative.v.add(&HermitianMatrix::from_real_diag(&diag)).unwrap();
        negative.beamformers = None;
        let report = verify_feasibility(&s, &spec, &negative).unwrap();
        assert!(report.an_min_eig < -1e-4);
        assert!(report.max_violation > 1e-6);
    }

    #[test]
    fn kkt_certificate_holds_on_solved_instances() {
        for seed in [5u64, 31] {
            let (s, spec) = table_scenario(seed);
            let (out, artifacts) = solve_relaxation_with_artifacts(&s, &spec).unwrap();
            assert_eq!(out.status, OutcomeStatus::Solved);
            let report = check_kkt(&artifacts, &s, &spec).unwrap();

            for (i, activity) in report.c1_activity.iter().enumerate() {
                assert!(*activity <= 1e-6, "seed {seed} layer {i} activity {activity}");
            }
            for (i, l) in report.lambda.iter().enumerate() {
                assert!(*l > 0.0, "seed {seed} lambda[{i}] = {l}");
            }
            for (i, res) in report.stationarity_residual.iter().enumerate() {
                assert!(*res <= 1e-6, "seed {seed} block {i} stationarity {res}");
            }
            for (i, comp) in report.complementarity.iter().enumerate() {
                let tr = out.w_blocks[i].trace();
                assert!(*comp <= 1e-6 * tr.max(1e-12), "seed {seed} layer {i}: {comp} vs Tr {tr}");
            }
            let scale = 1.0 + report.lambda.iter().sum::<f64>();
            for me in &report.min_eig_y {
                assert!(*me >= -1e-7 * scale, "seed {seed} min eig {me}");
            }
            assert!(report.min_eig_z >= -1e-7 * scale);
            assert!(out.duality_gap <= 1e-7);
        }
    }

    #[test]
    fn rank_one_claim_is_consistent() {
        // Active eavesdropper caps: only the base layer claim applies.
        let (s, spec) = table_scenario(47);
        let (out, artifacts) = solve_relaxation_with_artifacts(&s, &spec).unwrap();
        let report = check_kkt(&artifacts, &s, &spec).unwrap();
        let structure = check_rank_structure(&out, &report);
        assert_eq!(structure.rank_w1, 1);
        assert!(structure.consistent);

        // Caps slackened into irrelevance: every multiplier vanishes and all
        // layers are rank one.
        let mut slack_spec = spec.clone();
        slack_spec.gamma_tol = vec![1e9; 3];
        let (out, artifacts) = solve_relaxation_with_artifacts(&s, &slack_spec).unwrap();
        assert_eq!(out.status, OutcomeStatus::Solved);
        let report = check_kkt(&artifacts, &s, &slack_spec).unwrap();
        let structure = check_rank_structure(&out, &report);
        assert!(structure.all_beta_zero, "beta {:?}", report.beta);
        assert!(structure.consistent);
        assert!(out.all_rank_one(), "ranks {:?}", out.rank_flags);

        // No eavesdroppers at all: trivially consistent.
        let spec0 = open_spec(2, vec![1.0, 2.0]);
        let s0 = Scenario { h: vec![re(1.0), re(0.5)], g: vec![], noise_power: 1.0 };
        let (out0, artifacts0) = solve_relaxation_with_artifacts(&s0, &spec0).unwrap();
        let report0 = check_kkt(&artifacts0, &s0, &spec0).unwrap();
        let structure0 = check_rank_structure(&out0, &report0);
        assert!(structure0.all_beta_zero && structure0.consistent);
    }

    #[test]
    fn secrecy_floor_holds_on_solved_instances() {
        let floor = {
            let spec = table_spec();
            metrics::secrecy_floor(&spec)
        };
        assert_relative_eq!(floor, 2.1789526558763246, max_relative = 1e-12);
        for seed in [2u64, 29, 61] {
            let (s, spec) = table_scenario(seed);
            for out in [
                solve_relaxation(&s, &spec).unwrap(),
                solve_scheme1(&s, &spec).unwrap(),
            ] {
                assert_eq!(out.status, OutcomeStatus::Solved);
                let rate = metrics::secrecy_rate(&s.h, &s.g, &out.w_blocks, &out.v, s.noise_power, 0)
                    .unwrap();
                assert!(rate >= floor - 1e-3, "seed {seed}: rate {rate} vs floor {floor}");
            }
        }
    }

    #[test]
    fn hybrid_branch_is_scale_invariant() {
        let (s, spec) = table_scenario(83);
        let base = solve_scheme2(&s, &spec).unwrap();
        let mut scaled = spec.clone();
        for p in &mut scaled.p_max {
            *p *= 10.0;
        }
        let wide = solve_scheme2(&s, &scaled).unwrap();
        assert_eq!(base.global_optimal, wide.global_optimal);
        assert_eq!(base.rank_flags, wide.rank_flags);
        assert_relative_eq!(base.total_power, wide.total_power, max_relative = 1e-6);
    }

    #[test]
    fn infeasible_relaxation_settles_the_hybrid() {
        // Demand an SINR the antenna budget cannot deliver.
        let mut spec = table_spec();
        spec.p_max = vec![1e-9; 4];
        let s = {
            let raw = sample_scenario(7, &spec, spec.n_eves()).unwrap();
            normalize_scenario(&raw)
        };
        let out = solve_scheme2(&s, &spec).unwrap();
        assert_eq!(out.status, OutcomeStatus::Infeasible);
        assert_eq!(out.scheme, Scheme::Scheme2);
        assert!(!out.global_optimal);
    }
}
