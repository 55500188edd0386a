//! Cooperative detection probability as the nearest primary moves away.
//!
//! ```text
//! cargo run --example detection
//! ```

use greenrelay::scenario::Scenario;
use greenrelay::sensing::SensingModel;

fn main() -> greenrelay::Result<()> {
    let base = Scenario::preset("fig3")?;
    println!("{:>6} {:>4} {:>12}", "d_p1", "L", "P_d");
    for count in 1..=3 {
        for d in [0.2, 0.4, 0.8, 1.2, 1.5] {
            let s = base.clone().with("primary.count", count as f64)?.with("links.d_p1", d)?;
            let links = s.links();
            let model = SensingModel::new(&links, &s.primary, &s.policy)?;
            let p_d = model.detection_probability(s.lambda_snr(), s.samples().round());
            println!("{d:>6.2} {count:>4} {p_d:>12.6}");
        }
    }
    Ok(())
}
