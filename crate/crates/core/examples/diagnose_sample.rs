//! Per-sample diagnostics: influence and score spreads, the multiplier at the
//! estimate and at a shifted value, and the jackknife scale.

use elci::el::solve_lambda;
use elci::{ingest_csv, jackknife_variance, point_estimate, score_vector, w_hat, CsvConfig, FunctionalSpec};

fn main() -> elci::Result<()> {
    let sample = ingest_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/weibull_exp43.csv"), &CsvConfig::default())?;
    let f: FunctionalSpec = "mrl:t0=0.9".parse()?;
    let th = point_estimate(&sample, &f)?;
    let w = w_hat(&sample, &f, th)?;
    let v = score_vector(&sample, &f, th)?;
    println!("theta_hat = {th:.6}");
    println!("W: mean {:.2e}, variance {:.6}", w.mean(), w.sample_variance());
    println!("V: sigma1^2 {:.6}", v.sigma1_sq());
    println!("jackknife variance {:.3e}", jackknife_variance(&sample, &f)?);
    for shift in [0.0, 0.01, 0.03] {
        let wt = w_hat(&sample, &f, th + shift)?.w;
        match solve_lambda(&wt) {
            Ok(d) => println!("theta_hat + {shift}: lambda {:.5}, l = {:.4}", d.lambda, d.log_ratio(&wt)),
            Err(e) => println!("theta_hat + {shift}: {e}"),
        }
    }
    Ok(())
}
