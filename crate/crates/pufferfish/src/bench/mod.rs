// SPDX-License-Identifier: Apache-2.0

//! Synthetic Top-K experiment: Markov-chain sequences, four mechanisms,
//! ranking metrics and tabular reports.

mod config;
mod experiment;
mod report;

pub use config::{ChainSpec, ExperimentConfig, MechanismName};
pub use experiment::{bench_curve, generate_dataset, run_experiment, Dataset};
pub use report::{emit_report, render_report, Report, ReportFormat, ReportRow, REPORT_SCHEMA};
