//! Output formats: the sweep CSV, the per-trial JSON-lines dump, and the
//! plain-text reports behind `solve-one` and `validate`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anbeam_core::metrics;
use anbeam_core::schemes::{OutcomeStatus, Scheme};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::harness::{SchemeResult, SweepPoint, TrialRecord};

pub const CSV_HEADER: &str = "sweep_value,scheme,mean_power_dbm,trials_solved,trials_total,\
rank_one_rate,mean_secrecy_l1,global_optimal_rate";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn write_file(path: &Path, text: &str) -> Result<(), ReportError> {
    std::fs::write(path, text)
        .map_err(|source| ReportError::Io { path: path.to_path_buf(), source })
}

fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.9}"),
        None => "NA".to_string(),
    }
}

/// Sweep table as CSV: one row per (sweep value, scheme), sweep value major
/// and scheme name minor, nine fractional digits on every statistic, `NA`
/// where a point has no solved trial.
pub fn csv_string(points: &[SweepPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for point in points {
        for agg in &point.schemes {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                point.sweep_value,
                agg.scheme,
                cell(agg.mean_power_dbm),
                agg.trials_solved,
                agg.trials_total,
                cell(agg.rank_one_rate),
                cell(agg.mean_secrecy_l1),
                cell(agg.global_optimal_rate),
            )
            .expect("writing to a string cannot fail");
        }
    }
    out
}

pub fn write_csv(path: &Path, points: &[SweepPoint]) -> Result<(), ReportError> {
    write_file(path, &csv_string(points))
}

pub fn status_name(status: OutcomeStatus) -> &'static str {
    match status {
        OutcomeStatus::Solved => "solved",
        OutcomeStatus::Infeasible => "infeasible",
        OutcomeStatus::Failed => "failed",
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Serialize)]
struct SchemeDump<'a> {
    scheme: String,
    status: &'static str,
    total_power_dbm: Option<f64>,
    rank_flags: &'a [usize],
    all_rank_one: bool,
    global_optimal: bool,
    secrecy_l1: Option<f64>,
    feasibility_violation: Option<f64>,
    kkt_max_residual: Option<f64>,
    solver_iterations: usize,
    duality_gap: Option<f64>,
}

#[derive(Serialize)]
struct TrialDump<'a> {
    trial: usize,
    sweep_value: usize,
    schemes: Vec<SchemeDump<'a>>,
}

/// One JSON object per trial, in record order. Non-finite diagnostics are
/// dumped as null.
pub fn jsonl_string(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        let dump = TrialDump {
            trial: rec.trial_index,
            sweep_value: rec.sweep_value,
            schemes: rec
                .results
                .iter()
                .map(|r| SchemeDump {
                    scheme: r.scheme.to_string(),
                    status: status_name(r.status),
                    total_power_dbm: r.total_power_dbm.and_then(finite),
                    rank_flags: &r.rank_flags,
                    all_rank_one: r.all_rank_one,
                    global_optimal: r.global_optimal,
                    secrecy_l1: r.secrecy_l1.and_then(finite),
                    feasibility_violation: r.feasibility_violation.and_then(finite),
                    kkt_max_residual: r.kkt.as_ref().and_then(|k| finite(k.max_residual)),
                    solver_iterations: r.solver_iterations,
                    duality_gap: finite(r.duality_gap),
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&dump).expect("dump structs hold only finite values"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl(path: &Path, records: &[TrialRecord]) -> Result<(), ReportError> {
    write_file(path, &jsonl_string(records))
}

fn power_cells(r: &SchemeResult) -> String {
    match (r.total_power_dbm, r.total_power_w) {
        (Some(dbm), Some(w)) => format!("{dbm:8.3} dBm ({w:.6e} W)"),
        _ => "-".to_string(),
    }
}

/// Human-readable report for a single realization: per-scheme powers, rank
/// structure, secrecy, and the relaxation's certificate figures.
pub fn solve_one_report(cfg: &ExperimentConfig, record: &TrialRecord) -> String {
    let spec = cfg
        .spec_for(record.sweep_value)
        .expect("record came from this configuration");
    let mut out = String::new();
    writeln!(
        out,
        "instance: seed {}, trial {}, {} antennas, {} layers, {} eavesdroppers",
        cfg.seed,
        record.trial_index,
        spec.n_tx,
        spec.n_layers,
        spec.n_eves(),
    )
    .expect("writing to a string cannot fail");
    for r in &record.results {
        writeln!(
            out,
            "{:<16} {:<11} {:<28} ranks {:?}  secrecy_l1 {}  global {}",
            r.scheme.to_string(),
            status_name(r.status),
            power_cells(r),
            r.rank_flags,
            cell(r.secrecy_l1),
            if r.global_optimal { "yes" } else { "no" },
        )
        .expect("writing to a string cannot fail");
    }
    if let Some(r) = record
        .results
        .iter()
        .find(|r| r.scheme == Scheme::Relaxed)
    {
        if let Some(k) = &r.kkt {
            writeln!(out, "relaxation certificates:").expect("writing to a string cannot fail");
            writeln!(
                out,
                "  duality gap {:.3e}, feasibility violation {}",
                r.duality_gap,
                cell(r.feasibility_violation),
            )
            .expect("writing to a string cannot fail");
            writeln!(
                out,
                "  floor activity {:.3e}, lambda_min {:.3e}, beta_max {:.3e}",
                k.c1_activity_max, k.lambda_min, k.beta_max,
            )
            .expect("writing to a string cannot fail");
            writeln!(
                out,
                "  stationarity {:.3e}, complementarity {:.3e}, min_eig Y {:.3e}, min_eig Z {:.3e}",
                k.stationarity_max, k.complementarity_max, k.min_eig_y, k.min_eig_z,
            )
            .expect("writing to a string cannot fail");
            writeln!(
                out,
                "  rank structure: base layer rank {}, caps {}, {}",
                k.rank_w1,
                if k.all_beta_zero { "slack" } else { "active" },
                if k.rank_consistent { "consistent" } else { "INCONSISTENT" },
            )
            .expect("writing to a string cannot fail");
        }
    }
    out
}

/// Result of the cross-checking audit: the printable text and whether every
/// check passed.
pub struct AuditOutcome {
    pub text: String,
    pub ok: bool,
}

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn chain_pairs() -> [(Scheme, Scheme); 4] {
    [
        (Scheme::Relaxed, Scheme::Scheme2),
        (Scheme::Scheme2, Scheme::Scheme1),
        (Scheme::Scheme1, Scheme::BaselineMrt),
        (Scheme::Relaxed, Scheme::BaselineSingle),
    ]
}

fn solved_power(rec: &TrialRecord, scheme: Scheme) -> Option<f64> {
    rec.results
        .iter()
        .find(|r| r.scheme == scheme && r.status == OutcomeStatus::Solved)
        .and_then(|r| r.total_power_w)
}

/// Cross-checks every solved record: independent constraint audit,
/// multiplier certificates, rank structure, the power ordering chain, and
/// the base-layer secrecy floor.
pub fn audit_report(cfg: &ExperimentConfig, records: &[TrialRecord]) -> AuditOutcome {
    let mut checks: Vec<Check> = Vec::new();

    // Constraint audit on every solved outcome of every scheme.
    let mut worst_violation = 0.0f64;
    let mut solved_outcomes = 0usize;
    for rec in records {
        for r in &rec.results {
            if r.status != OutcomeStatus::Solved {
                continue;
            }
            solved_outcomes += 1;
            if let Some(v) = r.feasibility_violation {
                worst_violation = worst_violation.max(v);
            }
        }
    }
    checks.push(Check {
        name: "feasibility",
        ok: worst_violation <= 1e-6,
        detail: format!(
            "worst relative violation {worst_violation:.3e} over {solved_outcomes} solved outcomes"
        ),
    });

    // Multiplier certificates on every solved relaxation.
    let mut relaxed_solved = 0usize;
    let mut worst_activity = 0.0f64;
    let mut worst_stationarity = 0.0f64;
    let mut worst_complementarity = 0.0f64;
    let mut min_lambda = f64::INFINITY;
    let mut worst_gap = 0.0f64;
    let mut missing_kkt = 0usize;
    let mut inconsistent = 0usize;
    for rec in records {
        let Some(r) = rec
            .results
            .iter()
            .find(|r| r.scheme == Scheme::Relaxed && r.status == OutcomeStatus::Solved)
        else {
            continue;
        };
        relaxed_solved += 1;
        worst_gap = worst_gap.max(r.duality_gap);
        match &r.kkt {
            Some(k) => {
                worst_activity = worst_activity.max(k.c1_activity_max);
                worst_stationarity = worst_stationarity.max(k.stationarity_max);
                worst_complementarity = worst_complementarity.max(k.complementarity_max);
                min_lambda = min_lambda.min(k.lambda_min);
                if !k.rank_consistent {
                    inconsistent += 1;
                }
            }
            None => missing_kkt += 1,
        }
    }
    let kkt_ok = missing_kkt == 0
        && (relaxed_solved == 0
            || (worst_activity <= 1e-6
                && worst_stationarity <= 1e-6
                && worst_complementarity <= 1e-6
                && min_lambda > 0.0
                && worst_gap <= 1e-7));
    checks.push(Check {
        name: "kkt",
        ok: kkt_ok,
        detail: format!(
            "activity {worst_activity:.3e}, stationarity {worst_stationarity:.3e}, \
complementarity {worst_complementarity:.3e}, min lambda {min_lambda:.3e}, \
gap {worst_gap:.3e} over {relaxed_solved} solved relaxations ({missing_kkt} missing)"
        ),
    });
    checks.push(Check {
        name: "rank-structure",
        ok: inconsistent == 0,
        detail: format!(
            "{} of {relaxed_solved} solved relaxations consistent",
            relaxed_solved - inconsistent
        ),
    });

    // Power ordering chain on trials where both sides of a pair solved.
    let mut worst_excess = f64::NEG_INFINITY;
    let mut compared = 0usize;
    let mut order_ok = true;
    for rec in records {
        for (lo, hi) in chain_pairs() {
            if !(cfg.schemes.contains(&lo) && cfg.schemes.contains(&hi)) {
                continue;
            }
            let (Some(p_lo), Some(p_hi)) = (solved_power(rec, lo), solved_power(rec, hi)) else {
                continue;
            };
            compared += 1;
            let excess = p_lo - p_hi;
            worst_excess = worst_excess.max(excess);
            if excess > 1e-6 * p_lo.max(p_hi).max(1.0) {
                order_ok = false;
            }
        }
    }
    checks.push(Check {
        name: "ordering",
        ok: order_ok,
        detail: if compared > 0 {
            format!("worst lower-bound excess {worst_excess:.3e} over {compared} comparisons")
        } else {
            "no comparable scheme pairs".to_string()
        },
    });

    // Base-layer secrecy floor, recomputed per sweep point.
    let mut floor_ok = true;
    let mut worst_margin = f64::INFINITY;
    let mut floor_checked = 0usize;
    for rec in records {
        let spec = cfg
            .spec_for(rec.sweep_value)
            .expect("record came from this configuration");
        let floor = metrics::secrecy_floor(&spec);
        for r in &rec.results {
            if r.status != OutcomeStatus::Solved {
                continue;
            }
            if let Some(sec) = r.secrecy_l1 {
                floor_checked += 1;
                let margin = sec - floor;
                worst_margin = worst_margin.min(margin);
                if margin < -1e-3 {
                    floor_ok = false;
                }
            }
        }
    }
    checks.push(Check {
        name: "secrecy-floor",
        ok: floor_ok,
        detail: if floor_checked > 0 {
            format!("worst margin {worst_margin:.3e} over {floor_checked} solved outcomes")
        } else {
            "no solved outcomes".to_string()
        },
    });

    let total_outcomes: usize = records.iter().map(|r| r.results.len()).sum();
    let mut text = String::new();
    writeln!(
        text,
        "audit: {} trials x {} sweep points, seed {}, {} of {} outcomes solved",
        cfg.n_trials,
        cfg.sweep_values.len(),
        cfg.seed,
        solved_outcomes,
        total_outcomes,
    )
    .expect("writing to a string cannot fail");
    let mut ok = true;
    for check in &checks {
        ok &= check.ok;
        writeln!(
            text,
            "check {}: {}  ({})",
            check.name,
            if check.ok { "ok" } else { "FAIL" },
            check.detail,
        )
        .expect("writing to a string cannot fail");
    }
    writeln!(text, "audit: {}", if ok { "ok" } else { "FAIL" })
        .expect("writing to a string cannot fail");
    AuditOutcome { text, ok }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_print_nine_digits_or_na() {
        assert_eq!(cell(Some(1.5)), "1.500000000");
        assert_eq!(cell(Some(-0.25)), "-0.250000000");
        assert_eq!(cell(None), "NA");
    }

    #[test]
    fn non_finite_diagnostics_become_null() {
        assert_eq!(finite(f64::NAN), None);
        assert_eq!(finite(f64::INFINITY), None);
        assert_eq!(finite(1.0), Some(1.0));
    }

    #[test]
    fn status_names_cover_every_outcome() {
        assert_eq!(status_name(OutcomeStatus::Solved), "solved");
        assert_eq!(status_name(OutcomeStatus::Infeasible), "infeasible");
        assert_eq!(status_name(OutcomeStatus::Failed), "failed");
    }

    #[test]
    fn empty_sweep_is_just_the_header() {
        assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
    }
}
