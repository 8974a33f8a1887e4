//! Runs every property suite on one random integrand per family and on the
//! quadratic benchmark, then writes the report under `target/suite-example`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orlicz::discretization::{DomainSpec, KernelSpec};
use orlicz::harness::{emit_report, run_suite, Format, Scenario, SuiteConfig};
use orlicz::phi::families::Family;

fn main() -> orlicz::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut scenarios = vec![Scenario::square_benchmark(64)];
    for (k, family) in Family::ALL.into_iter().enumerate() {
        let mut s = Scenario::square_benchmark(48);
        s.id = family.name().to_string();
        s.phi = family.sample(&mut rng);
        s.kernel = KernelSpec::Gaussian { sigma: 0.3, r0: None };
        s.domain = DomainSpec::unit_interval(48);
        s.density.domain = Some(DomainSpec::unit_interval(512));
        s.functions.clear();
        s.seed = 100 + k as u64;
        scenarios.push(s);
    }
    let config = SuiteConfig { scenarios, ..SuiteConfig::default() };
    let report = run_suite(&config)?;
    for r in &report.records {
        let slack = r.worst_slack.map_or("n/a".to_string(), |s| format!("{s:+.2e}"));
        let status = r.error.as_deref().unwrap_or(if r.pass { "pass" } else { "FAIL" });
        println!("{:<18} {:<12} {:>7} checks  worst {slack:>10}  {status}", r.scenario, r.suite.name(), r.checked);
    }
    let out = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target/suite-example");
    emit_report(&report, &out, &[Format::Json, Format::Csv, Format::Markdown])?;
    println!("all pass: {}; report in {}", report.pass, out.display());
    Ok(())
}
