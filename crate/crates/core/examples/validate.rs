//! Every closed form against its simulation, then a deliberately wrong model
//! against the same simulation.

use greenrelay::experiments::{self, RunOptions};
use greenrelay::scenario::Scenario;

fn main() -> greenrelay::Result<()> {
    let s = Scenario::build(None, None, &[])?;
    let opts = RunOptions { trials: 200_000, seed: 3, mc: true };

    let t = experiments::validate(&s, opts)?;
    print!("{}", t.to_csv());
    println!("all passed: {}\n", experiments::all_passed(&t));

    let wrong = s.clone().with("links.alpha", 3.5)?;
    let t = experiments::validate_against(&wrong, &s, opts)?;
    print!("{}", t.to_csv());
    println!("all passed: {}", experiments::all_passed(&t));
    Ok(())
}
