//! Seeded Monte Carlo engine.
//!
//! One trial draws one channel realization and runs every enabled scheme on
//! it, so the schemes are compared on identical channels. A trial is a pure
//! function of `(config, sweep value, trial index)`; a sweep may therefore
//! run its trials on a thread pool and still produce the same records, in
//! the same order, as a serial run.
//!
//! Random-stream layout: the eavesdropper-count axis derives a trial's seed
//! from the trial index alone and the generator draws eavesdropper channels
//! in sequence, so neighboring sweep points share the user channel and the
//! common eavesdroppers (paired sampling; per-trial power is then monotone
//! in the eavesdropper count). The antenna axis mixes the antenna count into
//! the seed, since the channel dimension changes per point anyway.

use anbeam_core::channel::{normalize_scenario, sample_scenario, Scenario, SystemSpec};
use anbeam_core::metrics;
use anbeam_core::schemes::{
    check_kkt, check_rank_structure, solve_baseline_mrt, solve_baseline_single,
    solve_relaxation_with_artifacts, solve_scheme1, solve_scheme2_from, verify_feasibility,
    AllocationOutcome, KktReport, OutcomeStatus, Scheme, SchemeError,
};
use rayon::prelude::*;

use crate::config::{watts_to_dbm, ExperimentConfig, SweepAxis};

/// splitmix64 finalizer: a full-avalanche 64-bit mix.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Scenario seed for one trial. Each component passes through a full mix so
/// neighboring indices land in unrelated parts of the seed space.
pub fn trial_seed(base: u64, stream: u64, trial: u64) -> u64 {
    mix(mix(mix(base).wrapping_add(stream)).wrapping_add(trial))
}

/// Condensed certificate audit of one solved relaxation.
#[derive(Debug, Clone)]
pub struct KktSummary {
    /// Smallest SINR-floor multiplier; positive at any optimum.
    pub lambda_min: f64,
    /// Largest eavesdropper-cap multiplier; near zero means every cap is slack.
    pub beta_max: f64,
    /// Worst relative distance of a user SINR from its floor.
    pub c1_activity_max: f64,
    /// Worst relative mismatch between reconstructed and returned dual slacks.
    pub stationarity_max: f64,
    /// Worst `|Tr(Y_i W_i)| / Tr(W_i)` over the layers.
    pub complementarity_max: f64,
    /// Smallest eigenvalue over the reconstructed layer dual slacks.
    pub min_eig_y: f64,
    /// Smallest eigenvalue of the artificial-noise dual slack.
    pub min_eig_z: f64,
    pub rank_w1: usize,
    pub all_beta_zero: bool,
    /// Rank structure matches the multipliers: base layer rank one, and all
    /// layers rank one whenever every cap multiplier vanishes.
    pub rank_consistent: bool,
    /// Worst of activity, stationarity, and relative complementarity.
    pub max_residual: f64,
}

fn summarize_kkt(report: &KktReport, out: &AllocationOutcome) -> KktSummary {
    let structure = check_rank_structure(out, report);
    let lambda_min = report.lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let beta_max = report.beta.iter().copied().fold(0.0, f64::max);
    let c1_activity_max = report.c1_activity.iter().copied().fold(0.0, f64::max);
    let stationarity_max = report
        .stationarity_residual
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let complementarity_max = report
        .complementarity
        .iter()
        .zip(&out.w_blocks)
        .map(|(c, w)| c / w.trace().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let min_eig_y = report.min_eig_y.iter().copied().fold(f64::INFINITY, f64::min);
    KktSummary {
        lambda_min,
        beta_max,
        c1_activity_max,
        stationarity_max,
        complementarity_max,
        min_eig_y,
        min_eig_z: report.min_eig_z,
        rank_w1: structure.rank_w1,
        all_beta_zero: structure.all_beta_zero,
        rank_consistent: structure.consistent,
        max_residual: stationarity_max.max(complementarity_max).max(c1_activity_max),
    }
}

/// One scheme's outcome on one realization, condensed for aggregation.
/// Power fields are present only when the scheme solved.
#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub status: OutcomeStatus,
    pub total_power_w: Option<f64>,
    pub total_power_dbm: Option<f64>,
    /// Numerical rank of each layer covariance.
    pub rank_flags: Vec<usize>,
    pub all_rank_one: bool,
    pub global_optimal: bool,
    /// Base-layer secrecy rate in bit/s/Hz, recomputed from the covariances.
    pub secrecy_l1: Option<f64>,
    /// Worst relative constraint violation from the independent audit.
    pub feasibility_violation: Option<f64>,
    pub solver_iterations: usize,
    pub duality_gap: f64,
    /// Present for a solved relaxation only.
    pub kkt: Option<KktSummary>,
}

/// Everything recorded about one channel realization, one entry per enabled
/// scheme in configuration order.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub sweep_value: usize,
    pub results: Vec<SchemeResult>,
}

fn failed(scheme: Scheme) -> SchemeResult {
    SchemeResult {
        scheme,
        status: OutcomeStatus::Failed,
        total_power_w: None,
        total_power_dbm: None,
        rank_flags: Vec::new(),
        all_rank_one: false,
        global_optimal: false,
        secrecy_l1: None,
        feasibility_violation: None,
        solver_iterations: 0,
        duality_gap: f64::NAN,
        kkt: None,
    }
}

fn scheme_result(
    s: &Scenario,
    spec: &SystemSpec,
    out: &AllocationOutcome,
    kkt: Option<KktSummary>,
) -> SchemeResult {
    let solved = out.status == OutcomeStatus::Solved;
    let secrecy_l1 = if solved {
        metrics::secrecy_rate(&s.h, &s.g, &out.w_blocks, &out.v, s.noise_power, 0).ok()
    } else {
        None
    };
    let feasibility_violation = if solved {
        verify_feasibility(s, spec, out).ok().map(|r| r.max_violation)
    } else {
        None
    };
    SchemeResult {
        scheme: out.scheme,
        status: out.status,
        total_power_w: solved.then_some(out.total_power),
        total_power_dbm: solved.then(|| watts_to_dbm(out.total_power)),
        rank_flags: out.rank_flags.clone(),
        all_rank_one: out.all_rank_one(),
        global_optimal: out.global_optimal,
        secrecy_l1,
        feasibility_violation,
        solver_iterations: out.solver_iterations,
        duality_gap: out.duality_gap,
        kkt,
    }
}

fn solo(
    r: Result<AllocationOutcome, SchemeError>,
    scheme: Scheme,
    s: &Scenario,
    spec: &SystemSpec,
) -> SchemeResult {
    match r {
        Ok(out) => scheme_result(s, spec, &out, None),
        Err(_) => failed(scheme),
    }
}

/// Runs every enabled scheme on the trial's shared channel realization.
/// `sweep_value` must come from `cfg.sweep_values` (or equal the baseline
/// value). Scheme-level failures are recorded, never raised; the relaxation
/// is solved once and reused by the hybrid scheme.
pub fn run_trial(cfg: &ExperimentConfig, sweep_value: usize, trial: usize) -> TrialRecord {
    let spec = cfg
        .spec_for(sweep_value)
        .expect("validated configurations resize cleanly");
    let (stream, n_eves) = match cfg.sweep_axis {
        SweepAxis::EveCount => (0, sweep_value),
        SweepAxis::AntennaCount => (sweep_value as u64, spec.n_eves()),
    };
    let seed = trial_seed(cfg.seed, stream, trial as u64);
    let raw = sample_scenario(seed, &spec, n_eves).expect("validated spec samples cleanly");
    let s = normalize_scenario(&raw);

    let wants = |scheme| cfg.schemes.contains(&scheme);
    let relax = if wants(Scheme::Relaxed) || wants(Scheme::Scheme2) {
        Some(solve_relaxation_with_artifacts(&s, &spec))
    } else {
        None
    };

    let mut results = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let result = match scheme {
            Scheme::Relaxed => match &relax {
                Some(Ok((out, artifacts))) => {
                    let kkt = if out.status == OutcomeStatus::Solved {
                        check_kkt(artifacts, &s, &spec)
                            .ok()
                            .map(|report| summarize_kkt(&report, out))
                    } else {
                        None
                    };
                    scheme_result(&s, &spec, out, kkt)
                }
                _ => failed(scheme),
            },
            Scheme::Scheme2 => match &relax {
                Some(Ok((out, _))) => match solve_scheme2_from(&s, &spec, out.clone()) {
                    Ok(hybrid) => scheme_result(&s, &spec, &hybrid, None),
                    Err(_) => failed(scheme),
                },
                _ => failed(scheme),
            },
            Scheme::Scheme1 => solo(solve_scheme1(&s, &spec), scheme, &s, &spec),
            Scheme::BaselineSingle => solo(solve_baseline_single(&s, &spec), scheme, &s, &spec),
            Scheme::BaselineMrt => solo(solve_baseline_mrt(&s, &spec), scheme, &s, &spec),
        };
        results.push(result);
    }
    TrialRecord { trial_index: trial, sweep_value, results }
}

/// All trial records for a sweep, ordered by sweep point then trial index.
/// The parallel path maps over the same job list and collects in order, so
/// both paths return identical records.
pub fn run_sweep(cfg: &ExperimentConfig, parallel: bool) -> Vec<TrialRecord> {
    let jobs: Vec<(usize, usize)> = cfg
        .sweep_values
        .iter()
        .flat_map(|&v| (0..cfg.n_trials).map(move |t| (v, t)))
        .collect();
    if parallel {
        jobs.par_iter().map(|&(v, t)| run_trial(cfg, v, t)).collect()
    } else {
        jobs.iter().map(|&(v, t)| run_trial(cfg, v, t)).collect()
    }
}

/// Per-scheme summary at one sweep point. Power is averaged in watts over
/// solved trials and converted to dBm afterwards; a point with no solved
/// trial keeps `None` instead of a fabricated number.
#[derive(Debug, Clone)]
pub struct SchemeAggregate {
    pub scheme: Scheme,
    pub trials_total: usize,
    pub trials_solved: usize,
    pub mean_power_w: Option<f64>,
    pub mean_power_dbm: Option<f64>,
    /// Fraction of solved trials whose layer covariances were all rank one.
    pub rank_one_rate: Option<f64>,
    pub mean_secrecy_l1: Option<f64>,
    /// Fraction of solved trials carrying a global-optimality certificate.
    pub global_optimal_rate: Option<f64>,
    /// solved / total.
    pub feasibility_rate: f64,
}

/// One sweep point's aggregates, sorted by scheme name for stable output.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub sweep_value: usize,
    pub schemes: Vec<SchemeAggregate>,
}

fn aggregate_scheme(scheme: Scheme, records: &[&TrialRecord]) -> SchemeAggregate {
    let mut total = 0usize;
    let mut solved = 0usize;
    let mut power_sum = 0.0;
    let mut rank_one = 0usize;
    let mut global = 0usize;
    let mut secrecy_sum = 0.0;
    let mut secrecy_n = 0usize;
    for rec in records {
        let Some(res) = rec.results.iter().find(|r| r.scheme == scheme) else {
            continue;
        };
        total += 1;
        if res.status != OutcomeStatus::Solved {
            continue;
        }
        solved += 1;
        power_sum += res.total_power_w.unwrap_or(0.0);
        if res.all_rank_one {
            rank_one += 1;
        }
        if res.global_optimal {
            global += 1;
        }
        if let Some(sec) = res.secrecy_l1 {
            secrecy_sum += sec;
            secrecy_n += 1;
        }
    }
    let frac = |num: usize| (solved > 0).then(|| num as f64 / solved as f64);
    SchemeAggregate {
        scheme,
        trials_total: total,
        trials_solved: solved,
        mean_power_w: (solved > 0).then(|| power_sum / solved as f64),
        mean_power_dbm: (solved > 0).then(|| watts_to_dbm(power_sum / solved as f64)),
        rank_one_rate: frac(rank_one),
        mean_secrecy_l1: (secrecy_n > 0).then(|| secrecy_sum / secrecy_n as f64),
        global_optimal_rate: frac(global),
        feasibility_rate: if total > 0 { solved as f64 / total as f64 } else { 0.0 },
    }
}

/// Reduces trial records to per-point, per-scheme statistics. Accumulation
/// follows record order, so identical records give identical floating-point
/// sums regardless of how the trials were executed.
pub fn aggregate(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SweepPoint> {
    cfg.sweep_values
        .iter()
        .map(|&v| {
            let at_point: Vec<&TrialRecord> =
                records.iter().filter(|r| r.sweep_value == v).collect();
            let mut schemes: Vec<SchemeAggregate> = cfg
                .schemes
                .iter()
                .map(|&scheme| aggregate_scheme(scheme, &at_point))
                .collect();
            schemes.sort_by_key(|a| a.scheme.to_string());
            SweepPoint { sweep_value: v, schemes }
        })
        .collect()
}
