//! The inverse-censoring-weighted comparator next to the plain EL interval:
//! score vectors, jackknife scale and the two intervals side by side.

use elci::simulation::sample_scenario;
use elci::tables::mean_scenario;
use elci::{confidence_interval, jackknife_variance, point_estimate, scaled_interval, score_vector};

fn main() -> elci::Result<()> {
    for label in ["uniform-c2.5", "uniform-c1.3"] {
        let spec = mean_scenario(label, 80)?;
        let sample = sample_scenario(&spec, 7);
        let f = &spec.functional;
        let theta_hat = point_estimate(&sample, f)?;
        let v = score_vector(&sample, f, theta_hat)?;
        let jack = jackknife_variance(&sample, f)?;
        let n = sample.len() as f64;

        let i1 = confidence_interval(&sample, f, 0.05)?;
        let i2 = scaled_interval(&sample, f, 0.05)?;
        println!("{label}: censored {:.1}%", 100.0 * sample.censored_fraction());
        println!("  sigma1^2 = {:.5}, n * jackknife = {:.5}, r_hat = {:.4}", v.sigma1_sq(), n * jack, i2.scale.unwrap());
        println!("  I1 [{:.4}, {:.4}] width {:.4}", i1.lower, i1.upper, i1.width());
        println!("  I2 [{:.4}, {:.4}] width {:.4}", i2.lower, i2.upper, i2.width());
    }
    Ok(())
}
