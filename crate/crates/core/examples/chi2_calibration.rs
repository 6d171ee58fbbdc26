//! The EL statistic at the true parameter over replications, against χ²₁.

use elci::simulation::statistic_at_truth;
use elci::tables::mean_scenario;
use elci::chi2_quantile;

fn main() -> elci::Result<()> {
    let spec = mean_scenario("uniform-c2.5", 200)?;
    let mut l = statistic_at_truth(&spec, 1000, 3)?;
    l.sort_by(f64::total_cmp);
    let mean = l.iter().sum::<f64>() / l.len() as f64;
    println!("mean l(theta0) = {mean:.4} (chi2_1 mean 1)");
    for p in [0.5, 0.9, 0.95] {
        let q = l[(p * l.len() as f64) as usize - 1];
        println!("{:>4.0}% quantile: {q:.4} vs {:.4}", 100.0 * p, chi2_quantile(p)?);
    }
    Ok(())
}
