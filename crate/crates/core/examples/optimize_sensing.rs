//! Energy-optimal sensing time under increasing data targets.

use greenrelay::energy::EnergyModel;
use greenrelay::scenario::Scenario;
use greenrelay::Error;

fn main() -> greenrelay::Result<()> {
    let s = Scenario::preset("table1")?;
    let links = s.links();
    let model = EnergyModel::new(0, &s.energy_inputs(&links))?;
    let capacity = model.expected_data(1.0 / model.bandwidth, model.rate);
    println!("at most {capacity:.1} bits per frame");

    for frac in [0.0, 0.25, 0.5, 0.9, 1.5] {
        match model.optimize(frac * capacity) {
            Ok(o) => println!(
                "D*={:>8.1}  T_S*={:.4e} s  E={:.4e} J  {:?}  mu={:.3e}  necessary={}",
                frac * capacity,
                o.t_s,
                o.e_min,
                o.activity,
                o.mu_kkt,
                o.necessary
            ),
            // the last target is out of reach on purpose
            Err(e @ Error::Infeasible { .. }) => println!("D*={:>8.1}  {e}", frac * capacity),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
