//! User-defined estimating functions: a linear score `a(x) - θ b(x)` and a
//! general monotone score solved numerically.

use elci::{confidence_interval, ingest_csv, point_estimate, CsvConfig, FunctionalSpec};

fn main() -> elci::Result<()> {
    let sample = ingest_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/weibull_exp43.csv"), &CsvConfig::default())?;

    // E[log Y], as a linear score with b = 1.
    let log_mean = FunctionalSpec::linear("log-mean", |x: f64| x.max(1e-300).ln(), |_| 1.0);
    let ci = confidence_interval(&sample, &log_mean, 0.05)?;
    println!("E log Y: {:.5}  [{:.5}, {:.5}]", ci.theta_hat, ci.lower, ci.upper);

    // Root of E tanh(4 (Y - θ)) = 0, a smooth M-estimator of location.
    let tanh_loc = FunctionalSpec::custom("tanh-location", |x, t| (4.0 * (x - t)).tanh(), (0.0, 5.0))?;
    let th = point_estimate(&sample, &tanh_loc)?;
    let ci = confidence_interval(&sample, &tanh_loc, 0.05)?;
    println!("tanh location: {th:.5}  [{:.5}, {:.5}]", ci.lower, ci.upper);
    Ok(())
}
