//! Command line: single seeded solves, Monte Carlo sweeps, and the
//! certificate audit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anbeam::config::{parse_scheme, ConfigError, ExperimentConfig, FileConfig, Overrides, SweepAxis};
use anbeam::harness::{aggregate, run_sweep, run_trial};
use anbeam::report::{self, ReportError};

#[derive(Parser)]
#[command(
    name = "anbeam",
    version,
    about = "Transmit-power minimization for layered multicast with eavesdroppers: \
seeded Monte Carlo sweeps over an embedded dense SDP solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one seeded realization and print powers, ranks, and certificates.
    SolveOne(JobArgs),
    /// Sweep the eavesdropper count and emit the averaged-power CSV.
    SweepEves(JobArgs),
    /// Sweep the antenna count and emit the averaged-power CSV.
    SweepAntennas(JobArgs),
    /// Replay the configured eavesdropper sweep and audit every certificate.
    Validate(JobArgs),
}

#[derive(Args)]
struct JobArgs {
    /// Base seed for the random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per sweep point (sweeps and validate).
    #[arg(long)]
    trials: Option<usize>,
    /// Flat key-value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (CSV for sweeps, text otherwise); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated sweep points, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    /// Comma-separated subset of relaxed,scheme1,scheme2,baseline-single,baseline-mrt.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Run trials on one thread instead of the worker pool.
    #[arg(long)]
    serial: bool,
    /// Also write one JSON object per trial to this file.
    #[arg(long)]
    dump_trials: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum MainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

fn resolve(axis: SweepAxis, args: &JobArgs) -> Result<ExperimentConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let schemes = match &args.schemes {
        Some(names) => Some(
            names
                .iter()
                .map(|n| parse_scheme(n))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let ov = Overrides {
        seed: args.seed,
        trials: args.trials,
        sweep_values: args.values.clone(),
        schemes,
        out: args.out.clone(),
    };
    ExperimentConfig::resolve(axis, &file, &ov)
}

/// Pins the sweep to the single point that reproduces the base system, for
/// the subcommands that do not sweep.
fn single_point(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.sweep_values = vec![cfg.baseline_sweep_value()];
    cfg
}

fn deliver(out: &Option<PathBuf>, text: &str) -> Result<(), ReportError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| ReportError::Io {
                path: path.clone(),
                source,
            })?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep(axis: SweepAxis, args: &JobArgs) -> Result<ExitCode, MainError> {
    let cfg = resolve(axis, args)?;
    let records = run_sweep(&cfg, !args.serial);
    if let Some(path) = &args.dump_trials {
        report::write_jsonl(path, &records)?;
    }
    let points = aggregate(&cfg, &records);
    match &cfg.output_path {
        Some(path) => {
            report::write_csv(path, &points)?;
            let rows: usize = points.iter().map(|p| p.schemes.len()).sum();
            println!("wrote {} data rows to {}", rows, path.display());
        }
        None => print!("{}", report::csv_string(&points)),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, MainError> {
    match &cli.command {
        Command::SolveOne(args) => {
            let cfg = single_point(resolve(SweepAxis::EveCount, args)?);
            let record = run_trial(&cfg, cfg.sweep_values[0], 0);
            let text = report::solve_one_report(&cfg, &record);
            deliver(&cfg.output_path, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepEves(args) => sweep(SweepAxis::EveCount, args),
        Command::SweepAntennas(args) => sweep(SweepAxis::AntennaCount, args),
        Command::Validate(args) => {
            let cfg = resolve(SweepAxis::EveCount, args)?;
            let records = run_sweep(&cfg, !args.serial);
            let audit = report::audit_report(&cfg, &records);
            deliver(&cfg.output_path, &audit.text)?;
            Ok(if audit.ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
