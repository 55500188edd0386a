use greenrelay::experiments::{self, Cell, RunOptions, FIGURES};
use greenrelay::scenario::Scenario;
use greenrelay::Error;

fn opts(trials: u64, seed: u64) -> RunOptions {
    RunOptions { trials, seed, mc: true }
}

#[test]
fn default_scenario_validates() {
    let s = Scenario::build(None, None, &[]).unwrap();
    let t = experiments::validate(&s, opts(1_000_000, 1)).unwrap();
    assert!(t.rows.len() >= 8);
    assert!(experiments::all_passed(&t), "{}", t.to_csv());
}

#[test]
fn pass_survives_a_seed_change() {
    let s = Scenario::build(None, None, &[]).unwrap();
    let t = experiments::validate(&s, opts(1_000_000, 77)).unwrap();
    assert!(experiments::all_passed(&t), "{}", t.to_csv());
}

#[test]
fn corrupted_path_loss_fails_validation() {
    let truth = Scenario::build(None, None, &[]).unwrap();
    let wrong = truth.clone().with("links.alpha", 3.0).unwrap();
    let t = experiments::validate_against(&wrong, &truth, opts(200_000, 1)).unwrap();
    assert!(!experiments::all_passed(&t));
    let status = t.column("status").unwrap();
    let failed = t.rows.iter().filter(|r| r[status] == Cell::Text("fail".into())).count();
    assert!(failed >= 2, "{}", t.to_csv());
}

#[test]
fn every_figure_runs_without_simulation() {
    for &name in FIGURES {
        let s = Scenario::preset(name).unwrap();
        let t = experiments::figure(name, &s, RunOptions { trials: 1, seed: 1, mc: false }).unwrap();
        assert!(!t.rows.is_empty(), "{name}");
    }
    let s = Scenario::preset("fig3").unwrap();
    assert!(experiments::figure("fig5", &s, opts(1, 1)).is_err());
}

#[test]
fn detection_figure_shape() {
    let s = Scenario::preset("fig3").unwrap();
    let t = experiments::fig3(&s, RunOptions { trials: 1, seed: 1, mc: false }).unwrap();
    assert_eq!(&t.header[..5], &["d_p1", "L", "lambda_db", "pd", "pd_mc"]);
    let d: Vec<f64> = (0..t.rows.len()).map(|i| t.real(i, "d_p1").unwrap()).collect();
    let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = d.iter().cloned().fold(0.0, f64::max);
    assert!((lo - 0.1).abs() < 1e-12 && (hi - 1.5).abs() < 1e-12);
    let mc = t.column("pd_mc").unwrap();
    assert!(t.rows.iter().all(|r| r[mc] == Cell::Empty));
}

#[test]
fn energy_figure_has_both_curves() {
    let s = Scenario::preset("fig7").unwrap();
    let t = experiments::fig7(&s, RunOptions { trials: 1, seed: 1, mc: false }).unwrap();
    for i in 0..t.rows.len() {
        assert!(t.real(i, "e_nonharv").unwrap() >= t.real(i, "e_total").unwrap());
    }
}

#[test]
fn consumption_gain_falls_with_more_primaries() {
    let s = Scenario::preset("fig8").unwrap();
    let t = experiments::fig8(&s, RunOptions { trials: 1, seed: 1, mc: false }).unwrap();
    let at = |want: f64| -> Vec<f64> {
        let mut v: Vec<(f64, f64)> = (0..t.rows.len())
            .filter(|&i| (t.real(i, "t_s").unwrap() - want).abs() < 1e-12)
            .map(|i| (t.real(i, "L").unwrap(), t.real(i, "ecg").unwrap()))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.into_iter().map(|p| p.1).collect()
    };
    let g20 = at(0.02);
    assert!(g20.len() >= 2 && g20[1] < g20[0], "{g20:?}");
}

#[test]
fn optimize_reports_an_infeasible_target() {
    let s = Scenario::build(None, None, &[("timing.d_star".into(), "1e12".into())]).unwrap();
    match experiments::optimize(&s) {
        Err(Error::Infeasible { target, max_bits }) => assert!(target > max_bits),
        other => panic!("{other:?}"),
    }
}

#[test]
fn csv_round_trip() {
    let s = Scenario::build(None, None, &[]).unwrap();
    let t = experiments::optimize(&s).unwrap();
    let text = t.to_csv();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap().len(), t.header.len());
    assert_eq!(reader.records().count(), t.rows.len());
}
