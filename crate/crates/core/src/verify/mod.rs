//! The verification suite: every check over a set of spins, collected into
//! a report with pass flags, residuals and a ledger of formulas that did
//! not hold as stated.

mod config;
pub mod registry;
mod report;
mod suite;

pub use config::{parse_override, OutputFormat, SuiteConfig, TOLERANCE_ENV};
pub use report::{
    export_report, CheckKind, CheckParams, CheckRecord, Discrepancy, ReportConfig, VerificationReport,
};
pub use suite::run_suite;
