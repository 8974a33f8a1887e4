//! Declarative property suites and reproducible reports.

pub mod config;
pub mod density;
pub mod random;
pub mod report;
mod suites;

use rayon::prelude::*;

pub use config::{DensitySpec, Problem, ProblemConfig, Scenario, SuiteConfig, SuiteKind, Tolerances};
pub use density::{approximation_chain, density_ladder, mollification_order, Rung};
pub use random::TrigFamily;
pub use report::{emit_report, to_json, Environment, Format, Report, SuiteRecord, SummaryRow, Table};
pub use suites::Tally;

use crate::error::Result;

/// Runs the selected suites on every scenario. Scenarios run in parallel;
/// records are ordered by scenario id, then by suite as listed.
pub fn run_suite(config: &SuiteConfig) -> Result<Report> {
    config.validate()?;
    let mut scenarios: Vec<&Scenario> = config.scenarios.iter().collect();
    scenarios.sort_by(|a, b| a.id.cmp(&b.id));
    let records: Vec<Vec<SuiteRecord>> = scenarios
        .par_iter()
        .map(|s| match s.build() {
            Ok(problem) => config.suites.iter().map(|&k| suites::run(k, s, &problem, config)).collect(),
            Err(e) => config.suites.iter().map(|&k| SuiteRecord::failed(k, &s.id, &e)).collect(),
        })
        .collect();
    Ok(Report::new(config.clone(), records.concat()))
}

/// Runs only the density ladder of every scenario.
pub fn run_density(config: &SuiteConfig) -> Result<Report> {
    let config = SuiteConfig { suites: vec![SuiteKind::Density], ..config.clone() };
    run_suite(&config)
}
