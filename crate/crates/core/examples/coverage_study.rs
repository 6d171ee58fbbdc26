//! A small custom Monte Carlo coverage study, rendered like the published tables.
//!
//! cargo run --release --example coverage_study [-- reps]

use elci::simulation::run_coverage_study;
use elci::tables::report_table;
use elci::{DistributionSpec, FunctionalSpec, Method, ScenarioSpec};

fn main() -> elci::Result<()> {
    let reps = std::env::args().nth(1).and_then(|r| r.parse().ok()).unwrap_or(200);
    let f: FunctionalSpec = "survival:y=0.9".parse()?;
    let base = ScenarioSpec::new(
        "weibull-exp4.3-surv0.9",
        DistributionSpec::weibull(1.0, 10.0),
        DistributionSpec::exponential(4.3),
        30,
        f,
    )?;
    println!("true theta = {:.6}", base.theta0);
    let specs = vec![base.with_n(30), base.with_n(60)];
    let report = run_coverage_study(&specs, &[0.10], &[Method::ElChi2, Method::ScaledEl], reps, 1)?;
    print!("{}", report_table(&report).to_tsv());
    Ok(())
}
