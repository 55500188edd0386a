//! Outage against the secondary power budget, for a few relay counts and
//! channel-estimate ages.

use greenrelay::scenario::Scenario;
use greenrelay::sensing::SensingModel;
use greenrelay::transmission::TransModel;

fn main() -> greenrelay::Result<()> {
    let base = Scenario::preset("fig4")?;
    for relays in [1, 2, 4] {
        for rho in [0.1, 0.9] {
            let s = base
                .clone()
                .with("secondary.relays", relays as f64)?
                .with("csi.rho", rho)?;
            let mut line = format!("M={relays} rho={rho:<4}");
            for p_db in [-20.0, -10.0, 0.0, 10.0] {
                let s = s.clone().with_text("secondary.p_max", &format!("{p_db} dB"))?;
                let links = s.links();
                let p_d = SensingModel::new(&links, &s.primary, &s.policy)?
                    .detection_probability(s.lambda_snr(), s.samples().round());
                let model = TransModel::new(&links, &s.primary, &s.policy, s.csi, p_d, s.iid)?;
                line += &format!("  {:>10.3e}", model.outage(s.gamma_th_snr()));
            }
            println!("{line}");
        }
    }
    Ok(())
}
