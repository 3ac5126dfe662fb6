//! Config-driven experiment sweeps and their reports.

mod config;
mod report;
mod run;

pub use config::{DistributionSpec, ExperimentConfig, ReportFormat, Task};
pub use report::{emit_report, format_sig, render_report, REPORT_COLUMNS};
pub use run::{run_experiment, ExperimentReport, NSummary, ReportRow};
