//! Scenarios, sweeps, persistence, verification and the acceptance battery.

pub mod acceptance;
pub mod config;
pub mod datum;
pub mod persist;
pub mod run;
pub mod scenarios;
pub mod verify;

pub use acceptance::{battery, run_criterion, ACCEPTANCE_IDS};
pub use config::{ConfigFile, InitialData, Scenario, ScenarioSpec, Toggles, Tolerances};
pub use datum::{Bump, Datum, Geometry};
pub use persist::{load_trajectory, read_diagnostics_csv, save_trajectory, write_diagnostics_csv, TRAJECTORY_SCHEMA};
pub use run::{run_scenario, sweep, ScenarioOutcome, SweepRow, SweepSummary};
pub use scenarios::{default_config, default_scenarios};
pub use verify::{trajectory_checks, verify_targets, whole_line_checks, CheckResult, VerificationSuite};
