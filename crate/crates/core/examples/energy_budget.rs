//! Frame energy with and without harvesting across sensing times.

use greenrelay::energy::EnergyModel;
use greenrelay::scenario::Scenario;

fn main() -> greenrelay::Result<()> {
    let base = Scenario::preset("fig7")?;
    println!("{:>8} {:>3} {:>13} {:>13} {:>10}", "T_S[ms]", "L", "E_total[J]", "E_plain[J]", "ECG");
    for count in 1..=4 {
        let s = base.clone().with("primary.count", count as f64)?;
        let links = s.links();
        let model = EnergyModel::new(s.relay, &s.energy_inputs(&links))?;
        for t_ms in [1.0, 20.0, 50.0, 90.0] {
            let t = t_ms * 1e-3;
            println!(
                "{t_ms:>8.1} {count:>3} {:>13.4e} {:>13.4e} {:>10.4}",
                model.total_energy(t)?,
                model.total_energy_nonharvesting(t)?,
                model.ecg(t)?
            );
        }
    }
    Ok(())
}
