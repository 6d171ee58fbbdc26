//! Known-truth variances by quadrature: the influence-function variance in
//! two algebraically equal forms, and the larger variance of the weighted score.

use elci::tables::{mean_scenario, mrl_scenario, MEAN_SCENARIOS};
use elci::asymptotic_variance;

fn main() -> elci::Result<()> {
    println!("{:<22} {:>10} {:>10} {:>10} {:>8}", "scenario", "sigma2", "alt form", "sigma1^2", "ratio");
    let mut specs = Vec::new();
    for label in MEAN_SCENARIOS {
        specs.push(mean_scenario(label, 80)?);
    }
    specs.push(mrl_scenario(4.3, 0.5, 80)?);
    for s in specs {
        let v = asymptotic_variance(&s.functional, s.theta0, s.lifetime, s.censoring)?;
        println!(
            "{:<22} {:>10.6} {:>10.6} {:>10.6} {:>8.4}",
            s.label, v.sigma2_influence, v.sigma2_influence_alt, v.sigma2_score, v.ratio
        );
    }
    Ok(())
}
