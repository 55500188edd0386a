//! Clipping level for the saturated relay amplifier.

use greenrelay::mcsim::{mc_clipped_gain, SensingSetup};
use greenrelay::scenario::Scenario;
use greenrelay::sensing::{modified_gain_mean, solve_saturation_gain, SensingModel};
use greenrelay::Error;

fn main() -> greenrelay::Result<()> {
    let s = Scenario::preset("fig3")?;
    let links = s.links();
    let sens = SensingModel::new(&links, &s.primary, &s.policy)?;
    let setup = SensingSetup::new(&links, &s.primary, &s.policy)?;

    for target in [0.9, 0.99, 0.999, 1.0] {
        let g = match solve_saturation_gain(0, &links, &s.primary, &s.policy, target) {
            Ok(g) => g,
            Err(e @ Error::NoRoot { .. }) => {
                println!("target {target}: {e}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let exact = modified_gain_mean(&sens.relays[0].first_hop, g.gain_u, g.threshold);
        let r = &setup.relays[0];
        let sim = mc_clipped_gain(&r.hop1_means, setup.p_on, g.gain_u, g.threshold, 200_000, 5)?;
        println!(
            "target {target}: K={:.4e} W  threshold={:.4e}  mean gain {:.6e} (mc {:.6e} +- {:.1e})",
            g.k, g.threshold, exact, sim.mean, sim.stderr
        );
    }
    Ok(())
}
