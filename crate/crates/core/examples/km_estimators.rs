//! Product-limit fits for lifetime and censoring, the tail sum ψ_n, and the
//! identity `1 - H_n = (1 - F_n)(1 - G_n)` on a bundled data file.
//!
//! cargo run --example km_estimators [-- path/to.csv]

use elci::{empirical_subdistributions, ingest_csv, km_censor, km_event, km_integral, psi_n, CsvConfig};

fn main() -> elci::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/weibull_exp43.csv").into());
    let sample = ingest_csv(&path, &CsvConfig::default())?;
    println!("n = {}, events = {}, censored = {:.1}%", sample.len(), sample.event_count(), 100.0 * sample.censored_fraction());

    let f = km_event(&sample);
    let g = km_censor(&sample);
    let h = empirical_subdistributions(&sample);

    println!("{:>8} {:>10} {:>10} {:>12}", "x", "F_n(x)", "G_n(x)", "identity");
    for x in [0.7, 0.85, 0.95, 1.0, 1.05, 1.2] {
        let gap = (1.0 - h.h.eval(x)) - (1.0 - f.eval(x)) * (1.0 - g.eval(x));
        println!("{x:>8.3} {:>10.5} {:>10.5} {gap:>12.2e}", f.eval(x), g.eval(x));
    }

    let mean = km_integral(&sample, |x| x);
    let psi = psi_n(&sample, |x| x - mean);
    println!("KM mean = {mean:.6}, total F_n mass = {:.6}", f.terminal());
    println!("psi_n(0) for the centred score = {:.3e}", psi.eval(0.0));
    Ok(())
}
