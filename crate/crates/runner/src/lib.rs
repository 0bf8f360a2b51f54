//! Named, seeded experiments over `fractal_lab`, their records and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod record;
pub mod report;
pub mod scenarios;

pub use config::ScenarioConfig;
pub use error::{Result, RunnerError};
pub use record::ExperimentRecord;
pub use report::Report;
pub use scenarios::{find, run_scenario, Artifacts, REGISTRY};
