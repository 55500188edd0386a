//! Closed forms against independent simulation at fixed seeds.

use greenrelay::energy::EnergyModel;
use greenrelay::harvest::avg_harvested_power;
use greenrelay::mcsim::{
    mc_clipped_gain, mc_detection, mc_ecg, mc_frame_energy, mc_harvest, mc_outage, mc_report_e2e_cdf,
    FrameSetup, SensingSetup, TransSetup,
};
use greenrelay::scenario::Scenario;
use greenrelay::sensing::{modified_gain_mean, solve_saturation_gain, SensingModel};
use greenrelay::transmission::TransModel;

const TRIALS: u64 = 1_000_000;
const K: f64 = 3.0;

fn scenario(preset: Option<&str>, overrides: &[(&str, &str)]) -> Scenario {
    let o: Vec<(String, String)> = overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    Scenario::build(preset, None, &o).unwrap()
}

#[test]
fn report_cdf_at_five_points() {
    let s = scenario(Some("fig3"), &[("links.d_p1", "0.8")]);
    let links = s.links();
    let model = SensingModel::new(&links, &s.primary, &s.policy).unwrap();
    let setup = SensingSetup::new(&links, &s.primary, &s.policy).unwrap();
    let path = &model.relays[0];
    for (k, p) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
        // quantile of the analytic law by bisection on a log scale
        let (mut a, mut b) = (1e-12f64, 1e12f64);
        for _ in 0..200 {
            let m = (a * b).sqrt();
            if path.e2e_cdf(m) < p {
                a = m;
            } else {
                b = m;
            }
        }
        let x = (a * b).sqrt();
        let est = mc_report_e2e_cdf(&setup, 0, x, TRIALS, 100 + k as u64).unwrap();
        assert!(est.agrees(path.e2e_cdf(x), K, true), "p={p}: {est:?}");
    }
}

#[test]
fn detection_probability_on_a_hard_point() {
    // far enough that P_d sits well inside (0, 1)
    let s = scenario(Some("fig3"), &[("links.d_p1", "1.5"), ("timing.t_s", "1e-5")]);
    let links = s.links();
    let model = SensingModel::new(&links, &s.primary, &s.policy).unwrap();
    let u = s.samples().round();
    let exact = model.detection_probability(s.lambda_snr(), u);
    assert!(exact > 0.05 && exact < 0.95, "{exact}");
    let setup = SensingSetup::new(&links, &s.primary, &s.policy).unwrap();
    let est = mc_detection(&setup, s.lambda_snr(), u as u64, TRIALS / 10, 7).unwrap();
    assert!(est.agrees(exact, K, true), "{est:?} vs {exact}");
}

#[test]
fn selection_frequencies_three_unequal_relays() {
    let s = scenario(None, &[("secondary.relays", "3"), ("links.relay_step", "0.05"), ("csi.rho", "0.7")]);
    let links = s.links();
    let model = TransModel::new(&links, &s.primary, &s.policy, s.csi, 0.4, false).unwrap();
    let total: f64 = model.relays.iter().map(|r| r.selection).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let setup = TransSetup::new(&links, &s.primary, &s.policy, s.csi, 0.4).unwrap();
    let est = mc_outage(&setup, s.gamma_th_snr(), TRIALS, 21).unwrap();
    for (i, r) in model.relays.iter().enumerate() {
        assert!(est.selection[i].agrees(r.selection, K, true), "relay {i}: {:?} vs {}", est.selection[i], r.selection);
    }
    assert!(est.outage.agrees(model.outage(s.gamma_th_snr()), K, true));
}

#[test]
fn outage_fig4_curve() {
    for (k, p_max) in ["-20 dB", "-5 dB", "5 dB"].into_iter().enumerate() {
        let s = scenario(Some("fig4"), &[("secondary.p_max", p_max)]);
        let links = s.links();
        let sens = SensingModel::new(&links, &s.primary, &s.policy).unwrap();
        let p_d = sens.detection_probability(s.lambda_snr(), s.samples().round());
        let model = TransModel::new(&links, &s.primary, &s.policy, s.csi, p_d, s.iid).unwrap();
        let setup = TransSetup::new(&links, &s.primary, &s.policy, s.csi, p_d).unwrap();
        let est = mc_outage(&setup, s.gamma_th_snr(), TRIALS, 30 + k as u64).unwrap();
        assert!(est.outage.agrees(model.outage(s.gamma_th_snr()), K, true), "{p_max}: {:?}", est.outage);
    }
}

#[test]
fn single_relay_outage_ignores_csi_age() {
    let mut means = Vec::new();
    for (k, rho) in ["0.1", "0.99"].into_iter().enumerate() {
        let s = scenario(Some("fig4"), &[("secondary.relays", "1"), ("csi.rho", rho)]);
        let links = s.links();
        let setup = TransSetup::new(&links, &s.primary, &s.policy, s.csi, 0.5).unwrap();
        means.push(mc_outage(&setup, s.gamma_th_snr(), TRIALS, 40 + k as u64).unwrap().outage);
    }
    let gap = (means[0].mean - means[1].mean).abs();
    let se = (means[0].stderr.powi(2) + means[1].stderr.powi(2)).sqrt();
    assert!(gap <= K * se, "{means:?}");
}

#[test]
fn harvest_single_primary_collapse_and_ladder() {
    for (k, count) in ["1", "3"].into_iter().enumerate() {
        let s = scenario(Some("fig6"), &[("primary.count", count)]);
        let links = s.links();
        let r = avg_harvested_power(0, &links, &s.primary, &s.policy, 1.0).unwrap();
        if count == "1" {
            let g = links.gbar(links.d_pr[0][0]);
            let expect = s.policy.eta * s.primary.power * s.primary.p_on * g * g;
            assert!(((r.e_tilde - expect) / expect).abs() < 1e-12);
        }
        let est = mc_harvest(&links.gains_pr(0), &s.primary, s.policy.eta, 1.0, TRIALS, 50 + k as u64).unwrap();
        assert!(est.agrees(r.e_bar, K, false), "L={count}: {est:?} vs {}", r.e_bar);
    }
}

#[test]
fn harvest_is_linear_in_efficiency() {
    let s = scenario(Some("fig6"), &[]);
    let links = s.links();
    let a = mc_harvest(&links.gains_pr(0), &s.primary, 0.2, 0.7, 20_000, 5).unwrap();
    let b = mc_harvest(&links.gains_pr(0), &s.primary, 0.4, 0.7, 20_000, 5).unwrap();
    assert!((b.mean - 2.0 * a.mean).abs() <= 1e-12 * b.mean);
}

#[test]
fn clipped_gain_at_the_root() {
    let s = scenario(Some("fig3"), &[]);
    let links = s.links();
    let sat = solve_saturation_gain(0, &links, &s.primary, &s.policy, s.clip_target).unwrap();
    assert!(sat.residual.abs() <= 1e-9);
    assert!(sat.threshold >= 0.0);
    let sens = SensingModel::new(&links, &s.primary, &s.policy).unwrap();
    let exact = modified_gain_mean(&sens.relays[0].first_hop, sat.gain_u, sat.threshold);
    let setup = SensingSetup::new(&links, &s.primary, &s.policy).unwrap();
    let r = &setup.relays[0];
    let est = mc_clipped_gain(&r.hop1_means, setup.p_on, sat.gain_u, sat.threshold, TRIALS, 60).unwrap();
    assert!(est.agrees(exact, K, false), "{est:?} vs {exact}");
}

#[test]
fn frame_energy_and_gain() {
    let s = scenario(Some("fig8"), &[("timing.t_s", "0.02")]);
    let links = s.links();
    let inp = s.energy_inputs(&links);
    let model = EnergyModel::new(0, &inp).unwrap();
    let setup = FrameSetup::new(0, &inp).unwrap();
    let t_s = s.timing.t_s;
    let e = mc_frame_energy(&setup, t_s, true, TRIALS, 70).unwrap();
    assert!(e.agrees(model.total_energy(t_s).unwrap(), K, false), "{e:?}");
    let e = mc_frame_energy(&setup, t_s, false, TRIALS, 71).unwrap();
    assert!(e.agrees(model.total_energy_nonharvesting(t_s).unwrap(), K, false), "{e:?}");
    let g = mc_ecg(&setup, t_s, TRIALS, 72).unwrap();
    assert!(g.agrees(model.ecg(t_s).unwrap(), K, false), "{g:?}");
}

#[test]
fn stderr_follows_square_root_law() {
    let s = scenario(Some("fig3"), &[("links.d_p1", "1.5"), ("timing.t_s", "1e-5")]);
    let links = s.links();
    let setup = SensingSetup::new(&links, &s.primary, &s.policy).unwrap();
    let u = s.samples().round() as u64;
    let a = mc_detection(&setup, s.lambda_snr(), u, 50_000, 3).unwrap();
    let b = mc_detection(&setup, s.lambda_snr(), u, 100_000, 3).unwrap();
    let ratio = a.stderr / b.stderr;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn excluded_relay_leaves_the_competition() {
    let s = scenario(
        Some("fig8"),
        &[
            ("secondary.relays", "3"),
            ("links.relay_step", "0.05"),
            ("opt.relay", "2"),
            ("opt.exclude", "[0]"),
            ("timing.t_s", "0.002"),
            ("primary.count", "1"),
            ("links.d_p1", "1.5"),
        ],
    );
    let links = s.links();
    let inp = s.energy_inputs(&links);
    let model = EnergyModel::new(2, &inp).unwrap();

    let pair = links.without_relays(&[0]).unwrap();
    assert_eq!(pair.relays(), 2);
    let p_d = model.detection_probability(s.timing.t_s);
    let reduced = TransModel::new(&pair, &s.primary, &s.policy, s.csi, p_d, false).unwrap();
    assert!((model.selection - reduced.relays[1].selection).abs() < 1e-15);
    let full = TransModel::new(&links, &s.primary, &s.policy, s.csi, p_d, false).unwrap();
    assert!(model.selection > full.relays[2].selection);

    let setup = FrameSetup::new(2, &inp).unwrap();
    assert_eq!(setup.selected_as, 1);
    let t_s = s.timing.t_s;
    let e = mc_frame_energy(&setup, t_s, true, TRIALS, 80).unwrap();
    assert!(e.agrees(model.total_energy(t_s).unwrap(), K, false), "{e:?} vs {}", model.total_energy(t_s).unwrap());
}
