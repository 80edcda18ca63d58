//! Command implementations behind the `oma` binary.

pub mod commands;
pub mod report;
pub mod settings;
pub mod svg;

pub use commands::{
    campaign, cmd_logdec, cmd_peaks, cmd_scale, cmd_simulate, cmd_spectrum, cmd_ssi, load_scenario,
};
pub use report::{cmd_report, ReportError, ReportSummary};
pub use settings::{AnalysisConfig, Settings};
