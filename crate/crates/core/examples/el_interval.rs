//! Empirical-likelihood intervals for several functionals of one sample,
//! with the multiplier and endpoint diagnostics.

use elci::{confidence_interval, ingest_csv, log_el_ratio, solve_lambda, w_hat, CsvConfig, FunctionalSpec};

fn main() -> elci::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/weibull_exp43.csv");
    let sample = ingest_csv(path, &CsvConfig::default())?;

    for desc in ["mean", "survival:y=0.95", "mrl:t0=0.9", "quantile:p=0.5"] {
        let f: FunctionalSpec = desc.parse()?;
        let ci = confidence_interval(&sample, &f, 0.05)?;
        println!(
            "{desc:<16} theta_hat = {:.5}  95% [{:.5}, {:.5}]  evaluations = {}+{}",
            ci.theta_hat, ci.lower, ci.upper, ci.lower_diag.evaluations, ci.upper_diag.evaluations
        );
        for w in ci.warnings() {
            println!("{:<16} note: {w}", "");
        }
    }

    // The statistic at a candidate value, from the multiplier directly.
    let f = FunctionalSpec::mean();
    let theta = 0.93;
    let w = w_hat(&sample, &f, theta)?.w;
    let d = solve_lambda(&w)?;
    println!(
        "\nat theta = {theta}: lambda = {:.6} in ({:.3}, {:.3}), {} Newton steps, l = {:.5} (check {:.5})",
        d.lambda,
        d.bracket.0,
        d.bracket.1,
        d.iterations,
        d.log_ratio(&w),
        log_el_ratio(&sample, &f, theta)?
    );
    Ok(())
}
