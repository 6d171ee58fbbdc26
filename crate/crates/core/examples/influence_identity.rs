//! Estimated influence values for a few scores and the exact identity
//! `mean(W_n) = ∫ ξ dF_n` that holds on every sample with distinct times.

use elci::simulation::sample_scenario;
use elci::tables::mean_scenario;
use elci::{w_hat, Builtin, FunctionalSpec, KmFit};

fn main() -> elci::Result<()> {
    let spec = mean_scenario("uniform-c2.5", 50)?;
    let sample = sample_scenario(&spec, 2024);
    let fit = KmFit::new(&sample);

    let scores = [
        FunctionalSpec::mean(),
        FunctionalSpec::builtin(Builtin::Survival { y: 0.5 })?,
        FunctionalSpec::builtin(Builtin::MeanResidualLife { t0: 0.3 })?,
    ];
    for f in &scores {
        let theta = 0.4;
        let w = w_hat(&sample, f, theta)?;
        let target = fit.integrate(f.xi(theta));
        println!(
            "{:<14} mean(W) = {:+.15}  int xi dF_n = {:+.15}  gap = {:.1e}",
            f.label(),
            w.mean(),
            target,
            (w.mean() - target).abs()
        );
    }
    Ok(())
}
