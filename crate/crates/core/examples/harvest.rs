//! Average power harvested at the source and each relay, closed form next to
//! a short simulation.

use greenrelay::harvest::{avg_harvested_power, avg_harvested_power_source};
use greenrelay::mcsim::mc_harvest;
use greenrelay::scenario::Scenario;

fn main() -> greenrelay::Result<()> {
    let s = Scenario::preset("fig6")?.with("primary.count", 3.0)?;
    let links = s.links();
    let p_d = 1.0;

    let src = avg_harvested_power_source(&links, &s.primary, &s.policy, p_d)?;
    let sim = mc_harvest(&links.gains_ps(), &s.primary, s.policy.eta, p_d, 200_000, 1)?;
    println!("S   {:.4e} W  (mc {:.4e} +- {:.1e})", src.e_bar, sim.mean, sim.stderr);

    for i in 0..links.relays() {
        let r = avg_harvested_power(i, &links, &s.primary, &s.policy, p_d)?;
        let sim = mc_harvest(&links.gains_pr(i), &s.primary, s.policy.eta, p_d, 200_000, 2 + i as u64)?;
        println!("R{}  {:.4e} W  (mc {:.4e} +- {:.1e})", i + 1, r.e_bar, sim.mean, sim.stderr);
    }
    Ok(())
}
