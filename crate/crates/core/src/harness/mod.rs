//! Scenario runs, epsilon sweeps and reports behind the command-line tool.

pub mod config;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{ScenarioConfig, ScenarioKind, Validation};
pub use report::{report, Verdict};
pub use run::{execute, run, Assertion, RunArtifacts, RunStatus, RunSummary, SCHEMA_VERSION};
pub use sweep::{sweep, ConvergenceReport, SlopeFit};
