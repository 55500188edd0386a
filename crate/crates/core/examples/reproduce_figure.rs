//! Regenerate one figure's data as CSV.
//!
//! ```text
//! cargo run --release --example reproduce_figure -- fig7 out.csv
//! ```
//!
//! Pass `--no-mc` as a third argument to skip the simulated columns.

use std::fs::File;

use greenrelay::experiments::{self, RunOptions};
use greenrelay::scenario::Scenario;

fn main() -> greenrelay::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "fig3".into());
    let out = args.next();
    let mc = args.next().as_deref() != Some("--no-mc");

    let s = Scenario::preset(&name)?.with("run.trials", 100_000.0)?;
    let table = experiments::figure(&name, &s, RunOptions::from_scenario(&s, mc))?;
    match out {
        Some(path) => table.write_csv(File::create(path)?)?,
        None => print!("{}", table.to_csv()),
    }
    Ok(())
}
