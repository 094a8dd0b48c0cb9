//! Monte Carlo harness around the core allocation library: configuration
//! with decibel boundaries, seeded trial execution, deterministic
//! aggregation, and the file formats behind the `anbeam` command-line tool.

pub mod config;
pub mod harness;
pub mod report;
