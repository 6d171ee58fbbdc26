//! Censoring proportions of the study designs, and the censoring parameter
//! that gives a requested proportion.

use elci::roots::bisect_secant;
use elci::simulation::censoring_probability;
use elci::DistributionSpec;

fn main() -> elci::Result<()> {
    let uniform = DistributionSpec::uniform(0.0, 1.0);
    let weibull = DistributionSpec::weibull(1.0, 10.0);
    for c in [2.5, 1.3] {
        println!("Uniform(0,1) vs Uniform(0,{c}): P(censored) = {:.4}", censoring_probability(&uniform, &DistributionSpec::uniform(0.0, c))?);
    }
    for m in [4.3, 2.7] {
        println!("Weibull(1,10) vs Exp(mean {m}): P(censored) = {:.4}", censoring_probability(&weibull, &DistributionSpec::exponential(m))?);
    }

    for target in [0.2, 0.3] {
        let c = bisect_secant(
            |c| censoring_probability(&uniform, &DistributionSpec::uniform(0.0, c)).unwrap() - target,
            1.0,
            10.0,
            1e-12,
            1e-12,
            200,
        )?;
        let m = bisect_secant(
            |m| censoring_probability(&weibull, &DistributionSpec::exponential(m)).unwrap() - target,
            0.5,
            50.0,
            1e-12,
            1e-12,
            200,
        )?;
        println!("{:.0}% censoring: uniform c = {c:.4}, exponential mean = {m:.4}", 100.0 * target);
    }
    Ok(())
}
