//! Rebuilds one of the published simulation tables at a chosen replication count.
//!
//! cargo run --release --example reproduce_table -- 3 500

use elci::tables::build_table;

fn main() -> elci::Result<()> {
    let mut args = std::env::args().skip(1);
    let id = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let reps = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let table = build_table(id, reps, 42, None)?;
    print!("{}", table.to_tsv());
    eprintln!("max |deviation| from published: {:.4}", table.max_deviation);
    Ok(())
}
