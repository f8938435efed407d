//! Scenario configs, the check suites they run, and JSON reports.

pub mod cli;
pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{load, Overrides, Scenario, ScenarioKind};
pub use report::{merge, merge_all, Check, Report, ScenarioReport};
pub use scenarios::run_scenario;

/// Runs every scenario in order into one report.
pub fn run_all(scenarios: &[Scenario]) -> Report {
    Report { scenarios: scenarios.iter().map(run_scenario).collect(), ..Report::default() }
}
