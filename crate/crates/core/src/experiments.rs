//! Sweeps and reports built on a [`Scenario`], emitted as CSV tables.
//!
//! Every sweep point is evaluated independently (in parallel) and draws its
//! Monte Carlo stream from [`derive_seed`]`(seed, k)`, so output depends only
//! on the scenario and the seed.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::energy::{Activity, EnergyModel};
use crate::error::{Error, Result};
use crate::harvest::{avg_harvested_power, avg_harvested_power_source};
use crate::mcsim::{
    derive_seed, mc_clipped_gain, mc_detection, mc_ecg, mc_frame_energy, mc_harvest, mc_outage,
    mc_report_e2e_cdf, FrameSetup, MCEstimate, SensingSetup, TransSetup,
};
use crate::scenario::Scenario;
use crate::sensing::{modified_gain_mean, report_e2e_cdf, solve_saturation_gain, SensingModel};
use crate::transmission::TransModel;
use crate::units::{db_to_lin, lin_to_db};

pub const FIGURES: &[&str] = &["fig3", "fig4", "fig6", "fig7", "fig8", "table1"];

/// Absolute `|z|` above which `validate` reports a failure.
pub const VALIDATE_Z: f64 = 4.0;

/// Optimal sensing times (s) published for the `table1` scenario, by `[M-1][L-1]`.
pub const REFERENCE_TS_STAR: [[f64; 4]; 4] = [
    [0.0873, 0.0815, 0.0658, 0.000115],
    [0.0873, 0.0815, 0.00372, 0.000115],
    [0.0873, 0.0815, 0.00372, 0.000115],
    [0.0873, 0.0815, 0.00370, 0.000106],
];

/// Sensing times (s) swept by `fig7` and `fig8`.
pub const TS_GRID: [f64; 12] = [
    0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09,
];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => write!(f, "{v:.8e}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.rows.get(row)?.get(self.column(name)?)
    }

    /// Numeric value of a cell; `None` for text or empty cells.
    pub fn real(&self, row: usize, name: &str) -> Option<f64> {
        match self.get(row, name)? {
            Cell::Real(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    fn extend(&mut self, rows: Vec<Vec<Vec<Cell>>>) {
        self.rows.extend(rows.into_iter().flatten());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub trials: u64,
    pub seed: u64,
    pub mc: bool,
}

impl RunOptions {
    pub fn from_scenario(s: &Scenario, mc: bool) -> Self {
        Self {
            trials: s.trials,
            seed: s.seed,
            mc,
        }
    }

    fn seed(&self, k: usize) -> u64 {
        derive_seed(self.seed, k as u64)
    }
}

/// `[mc, stderr, z]`, empty when the estimate was skipped.
fn mc_cells(est: Option<MCEstimate>, analytic: f64, bernoulli: bool) -> [Cell; 3] {
    match est {
        Some(e) => [
            Cell::Real(e.mean),
            Cell::Real(e.stderr),
            Cell::Real(e.z_score(analytic, bernoulli)),
        ],
        None => [Cell::Empty, Cell::Empty, Cell::Empty],
    }
}

fn maybe<T>(on: bool, f: impl FnOnce() -> Result<T>) -> Result<Option<T>> {
    if on {
        f().map(Some)
    } else {
        Ok(None)
    }
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

fn with_power(s: &Scenario, key: &str, watts: f64) -> Result<Scenario> {
    s.with_text(key, &format!("{watts:e} W"))
}

fn sensing_pd(s: &Scenario) -> Result<f64> {
    let links = s.links();
    Ok(SensingModel::new(&links, &s.primary, &s.policy)?.detection_probability(s.lambda_snr(), s.samples()))
}

fn u_rounded(s: &Scenario) -> u64 {
    s.timing.samples_rounded(s.policy.bandwidth)
}

pub fn figure(name: &str, s: &Scenario, opts: RunOptions) -> Result<Table> {
    match name {
        "fig3" => fig3(s, opts),
        "fig4" => fig4(s, opts),
        "fig6" => fig6(s, opts),
        "fig7" => fig7(s, opts),
        "fig8" => fig8(s, opts),
        "table1" => table1(s),
        _ => Err(Error::Config(format!(
            "unknown figure `{name}`; expected one of {}",
            FIGURES.join(", ")
        ))),
    }
}

/// Detection probability vs `d_P1` for `L = 1..=count` and thresholds
/// `lambda - 5 dB` and `lambda`.
pub fn fig3(s: &Scenario, opts: RunOptions) -> Result<Table> {
    let mut points = Vec::new();
    for l in 1..=s.primary.count {
        for lam in [s.policy.lambda / db_to_lin(5.0), s.policy.lambda] {
            for d in range(0.1, 1.5, 0.1) {
                points.push((l, lam, d));
            }
        }
    }
    let mut t = Table::new(&["d_p1", "L", "lambda_db", "pd", "pd_mc", "stderr", "z"]);
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(k, &(l, lam, d))| {
            let p = s.with("primary.count", l as f64)?.with("links.d_p1", d)?;
            let p = with_power(&p, "secondary.lambda", lam)?;
            let pd = sensing_pd(&p)?;
            let links = p.links();
            let mc = maybe(opts.mc, || {
                let setup = SensingSetup::new(&links, &p.primary, &p.policy)?;
                mc_detection(&setup, p.lambda_snr(), u_rounded(&p), opts.trials, opts.seed(k))
            })?;
            let mut row = vec![d.into(), l.into(), lin_to_db(p.lambda_snr()).into(), pd.into()];
            row.extend(mc_cells(mc, pd, true));
            Ok(vec![row])
        })
        .collect::<Result<Vec<_>>>()?;
    t.extend(rows);
    Ok(t)
}

/// Outage vs `P_max/N0` in [-30, 10] dB for `M` in {1, 2, 4} (up to the
/// scenario's relay count) and `rho` in {0.1, scenario rho}.
pub fn fig4(s: &Scenario, opts: RunOptions) -> Result<Table> {
    let mut points = Vec::new();
    for m in [1usize, 2, 4].into_iter().filter(|&m| m <= s.ladder.relays.max(1)) {
        for rho in [0.1, s.csi.rho] {
            for pmax_db in range(-30.0, 10.0, 5.0) {
                points.push((m, rho, pmax_db));
            }
        }
    }
    let mut t = Table::new(&["pmax_db", "M", "rho", "pd", "outage", "outage_mc", "stderr", "z"]);
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(k, &(m, rho, pmax_db))| {
            let p = s.with("secondary.relays", m as f64)?.with("csi.rho", rho)?;
            let p = with_power(&p, "secondary.p_max", p.policy.n0 * db_to_lin(pmax_db))?;
            let links = p.links();
            let pd = sensing_pd(&p)?;
            let model = TransModel::new(&links, &p.primary, &p.policy, p.csi, pd, p.iid)?;
            let out = model.outage(p.gamma_th_snr());
            let mc = maybe(opts.mc, || {
                let setup = TransSetup::new(&links, &p.primary, &p.policy, p.csi, pd)?;
                Ok(mc_outage(&setup, p.gamma_th_snr(), opts.trials, opts.seed(k))?.outage)
            })?;
            let mut row = vec![pmax_db.into(), m.into(), rho.into(), pd.into(), out.into()];
            row.extend(mc_cells(mc, out, true));
            Ok(vec![row])
        })
        .collect::<Result<Vec<_>>>()?;
    t.extend(rows);
    Ok(t)
}

const ENERGY_HEADER: [&str; 8] = [
    "e_total",
    "e_total_mc",
    "stderr",
    "z",
    "e_nonharv",
    "e_nonharv_mc",
    "stderr_nonharv",
    "z_nonharv",
];

fn energy_cells(p: &Scenario, t_s: f64, opts: RunOptions, k: usize) -> Result<(f64, Vec<Cell>)> {
    let links = p.links();
    let inp = p.energy_inputs(&links);
    let model = EnergyModel::new(p.relay, &inp)?;
    let e = model.total_energy(t_s)?;
    let e_nh = model.total_energy_nonharvesting(t_s)?;
    let (mc, mc_nh) = match maybe(opts.mc, || {
        let setup = FrameSetup::new(p.relay, &inp)?;
        Ok((
            mc_frame_energy(&setup, t_s, true, opts.trials, opts.seed(2 * k))?,
            mc_frame_energy(&setup, t_s, false, opts.trials, opts.seed(2 * k + 1))?,
        ))
    })? {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    let mut cells = vec![e.into()];
    cells.extend(mc_cells(mc, e, false));
    cells.push(e_nh.into());
    cells.extend(mc_cells(mc_nh, e_nh, false));
    Ok((model.detection_probability(t_s), cells))
}

/// Frame energy vs `d_P1` for `L = 1..=4`.
pub fn fig6(s: &Scenario, opts: RunOptions) -> Result<Table> {
    let points: Vec<(usize, f64)> = (1..=4)
        .flat_map(|l| range(0.1, 1.5, 0.1).into_iter().map(move |d| (l, d)))
        .collect();
    let mut header = vec!["d_p1", "L", "pd"];
    header.extend(ENERGY_HEADER);
    let mut t = Table::new(&header);
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(k, &(l, d))| {
            let p = s.with("primary.count", l as f64)?.with("links.d_p1", d)?;
            let (pd, cells) = energy_cells(&p, p.timing.t_s, opts, k)?;
            let mut row = vec![d.into(), l.into(), pd.into()];
            row.extend(cells);
            Ok(vec![row])
        })
        .collect::<Result<Vec<_>>>()?;
    t.extend(rows);
    Ok(t)
}

fn ts_points(s: &Scenario) -> Vec<(usize, f64)> {
    let t = s.timing.remaining();
    (1..=4)
        .flat_map(|l| TS_GRID.into_iter().filter(move |&x| x < t).map(move |x| (l, x)))
        .collect()
}

/// Frame energy, with and without harvesting, vs `T_S` for `L = 1..=4`.
pub fn fig7(s: &Scenario, opts: RunOptions) -> Result<Table> {
    let mut header = vec!["t_s", "L", "pd"];
    header.extend(ENERGY_HEADER);
    let mut t = Table::new(&header);
    let rows = ts_points(s)
        .par_iter()
        .enumerate()
        .map(|(k, &(l, t_s))| {
            let p = s.with("primary.count", l as f64)?;
            let (pd, cells) = energy_cells(&p, t_s, opts, k)?;
            let mut row = vec![t_s.into(), l.into(), pd.into()];
            row.extend(cells);
            Ok(vec![row])
        })
        .collect::<Result<Vec<_>>>()?;
    t.extend(rows);
    Ok(t)
}

/// Consumption-to-harvest ratio vs `T_S` for `L = 1..=4`.
pub fn fig8(s: &Scenario, opts: RunOptions) -> Result<Table> {
    let mut t = Table::new(&["t_s", "L", "pd", "ecg", "ecg_mc", "stderr", "z"]);
    let rows = ts_points(s)
        .par_iter()
        .enumerate()
        .map(|(k, &(l, t_s))| {
            let p = s.with("primary.count", l as f64)?;
            let links = p.links();
            let inp = p.energy_inputs(&links);
            let model = EnergyModel::new(p.relay, &inp)?;
            let ecg = model.ecg(t_s)?;
            let mc = maybe(opts.mc, || {
                mc_ecg(&FrameSetup::new(p.relay, &inp)?, t_s, opts.trials, opts.seed(k))
            })?;
            let mut row = vec![t_s.into(), l.into(), model.detection_probability(t_s).into(), ecg.into()];
            row.extend(mc_cells(mc, ecg, false));
            Ok(vec![row])
        })
        .collect::<Result<Vec<_>>>()?;
    t.extend(rows);
    Ok(t)
}

pub fn activity_name(a: Activity) -> &'static str {
    match a {
        Activity::Interior => "interior",
        Activity::LowerBound => "lower_bound",
        Activity::ConstraintActive => "constraint_active",
        Activity::UpperBound => "upper_bound",
    }
}

const OPT_HEADER: [&str; 10] = [
    "ts_star",
    "e_min",
    "activity",
    "mu",
    "mu_kkt",
    "constraint",
    "gradient",
    "necessary",
    "lower",
    "upper",
];

fn optimum_cells(p: &Scenario) -> Result<Vec<Cell>> {
    let links = p.links();
    let model = EnergyModel::new(p.relay, &p.energy_inputs(&links))?;
    let o = model.optimize(p.d_star)?;
    Ok(vec![
        o.t_s.into(),
        o.e_min.into(),
        activity_name(o.activity).into(),
        o.mu.into(),
        o.mu_kkt.into(),
        o.constraint.into(),
        o.gradient.into(),
        (if o.necessary { "true" } else { "false" }).into(),
        o.lower.into(),
        o.upper.into(),
    ])
}

/// Optimal sensing time over `M, L = 1..=4`, next to the published grid.
pub fn table1(s: &Scenario) -> Result<Table> {
    let mut header = vec!["M", "L", "reference", "rel_err"];
    header.extend(OPT_HEADER);
    let mut t = Table::new(&header);
    let cells: Vec<(usize, usize)> = (1..=4).flat_map(|m| (1..=4).map(move |l| (m, l))).collect();
    let rows = cells
        .par_iter()
        .map(|&(m, l)| {
            let p = s.with("secondary.relays", m as f64)?.with("primary.count", l as f64)?;
            let p = if p.relay >= m { p.with("opt.relay", 0.0)? } else { p };
            let opt = optimum_cells(&p)?;
            let reference = REFERENCE_TS_STAR[m - 1][l - 1];
            let ts = match opt[0] {
                Cell::Real(v) => v,
                _ => unreachable!(),
            };
            let mut row = vec![m.into(), l.into(), reference.into(), ((ts - reference) / reference).into()];
            row.extend(opt);
            Ok(vec![row])
        })
        .collect::<Result<Vec<_>>>()?;
    t.extend(rows);
    Ok(t)
}

/// Scenario copies along the `[sweep]` axis, or the scenario itself.
pub fn sweep_points(s: &Scenario) -> Result<Vec<(Option<f64>, Scenario)>> {
    match &s.sweep {
        None => Ok(vec![(None, s.clone())]),
        Some((key, values)) => values
            .iter()
            .map(|&v| Ok((Some(v), s.with(key, v)?)))
            .collect(),
    }
}

fn swept<F>(s: &Scenario, header: &[&str], f: F) -> Result<Table>
where
    F: Fn(usize, &Scenario) -> Result<Vec<Vec<Cell>>> + Sync,
{
    let points = sweep_points(s)?;
    let mut h: Vec<&str> = Vec::new();
    if let Some((key, _)) = &s.sweep {
        h.push(key.as_str());
    }
    h.extend(header);
    let mut t = Table::new(&h);
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(k, (v, p))| {
            let rows = f(k, p)?;
            Ok(rows
                .into_iter()
                .map(|r| match v {
                    Some(v) => std::iter::once(Cell::Real(*v)).chain(r).collect(),
                    None => r,
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    t.extend(rows);
    Ok(t)
}

/// Detection probability at the scenario's threshold and sample count.
pub fn detect(s: &Scenario, opts: RunOptions) -> Result<Table> {
    swept(s, &["samples", "delta", "pd", "pd_mc", "stderr", "z"], |k, p| {
        let links = p.links();
        let model = SensingModel::new(&links, &p.primary, &p.policy)?;
        let delta = model.delta(p.lambda_snr());
        let pd = model.detection_probability(p.lambda_snr(), p.samples());
        let mc = maybe(opts.mc, || {
            let setup = SensingSetup::new(&links, &p.primary, &p.policy)?;
            mc_detection(&setup, p.lambda_snr(), u_rounded(p), opts.trials, opts.seed(k))
        })?;
        let mut row = vec![p.samples().into(), delta.into(), pd.into()];
        row.extend(mc_cells(mc, pd, true));
        Ok(vec![row])
    })
}

/// Outage probability at the scenario's SNR threshold.
pub fn outage(s: &Scenario, opts: RunOptions) -> Result<Table> {
    swept(s, &["pd", "outage", "outage_mc", "stderr", "z"], |k, p| {
        let links = p.links();
        let pd = sensing_pd(p)?;
        let out = TransModel::new(&links, &p.primary, &p.policy, p.csi, pd, p.iid)?.outage(p.gamma_th_snr());
        let mc = maybe(opts.mc, || {
            let setup = TransSetup::new(&links, &p.primary, &p.policy, p.csi, pd)?;
            Ok(mc_outage(&setup, p.gamma_th_snr(), opts.trials, opts.seed(k))?.outage)
        })?;
        let mut row = vec![pd.into(), out.into()];
        row.extend(mc_cells(mc, out, true));
        Ok(vec![row])
    })
}

/// Average harvested power of the source and every relay.
pub fn harvest(s: &Scenario, opts: RunOptions) -> Result<Table> {
    let header = ["node", "pd", "e_tilde", "e_bar", "e_bar_mc", "stderr", "z"];
    swept(s, &header, |k, p| {
        let links = p.links();
        let pd = sensing_pd(p)?;
        let m = links.relays();
        let mut rows = Vec::with_capacity(m + 1);
        for node in 0..=m {
            let (name, report, gains) = if node == 0 {
                let r = avg_harvested_power_source(&links, &p.primary, &p.policy, pd)?;
                ("S".to_string(), r, links.gains_ps())
            } else {
                let r = avg_harvested_power(node - 1, &links, &p.primary, &p.policy, pd)?;
                (format!("R{node}"), r, links.gains_pr(node - 1))
            };
            let mc = maybe(opts.mc, || {
                let seed = opts.seed(k * (m + 1) + node);
                mc_harvest(&gains, &p.primary, p.policy.eta, pd, opts.trials, seed)
            })?;
            let mut row = vec![Cell::Text(name), pd.into(), report.e_tilde.into(), report.e_bar.into()];
            row.extend(mc_cells(mc, report.e_bar, false));
            rows.push(row);
        }
        Ok(rows)
    })
}

/// Frame energy (both modes) and consumption gain at the scenario's `T_S`.
pub fn energy(s: &Scenario, opts: RunOptions) -> Result<Table> {
    let mut header = vec!["t_s", "pd"];
    header.extend(ENERGY_HEADER);
    header.extend(["ecg", "ecg_mc", "stderr_ecg", "z_ecg"]);
    swept(s, &header, |k, p| {
        let t_s = p.timing.t_s;
        let (pd, mut cells) = energy_cells(p, t_s, opts, k)?;
        let links = p.links();
        let inp = p.energy_inputs(&links);
        match EnergyModel::new(p.relay, &inp)?.ecg(t_s) {
            Ok(ecg) => {
                let mc = maybe(opts.mc, || {
                    mc_ecg(&FrameSetup::new(p.relay, &inp)?, t_s, opts.trials, derive_seed(opts.seed(k), 7))
                })?;
                cells.push(ecg.into());
                cells.extend(mc_cells(mc, ecg, false));
            }
            Err(Error::ZeroHarvest) => cells.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
            Err(e) => return Err(e),
        }
        let mut row = vec![t_s.into(), pd.into()];
        row.extend(cells);
        Ok(vec![row])
    })
}

/// Minimum-energy sensing time under the scenario's data target.
pub fn optimize(s: &Scenario) -> Result<Table> {
    swept(s, &{
        let mut h = vec!["d_star"];
        h.extend(OPT_HEADER);
        h
    }, |_, p| {
        let mut row = vec![p.d_star.into()];
        row.extend(optimum_cells(p)?);
        Ok(vec![row])
    })
}

struct Pair {
    name: &'static str,
    analytic: f64,
    mc: MCEstimate,
    bernoulli: bool,
}

/// Every analytic/Monte Carlo pair of a scenario, with `z`-scores.
pub fn validate(s: &Scenario, opts: RunOptions) -> Result<Table> {
    validate_against(s, s, opts)
}

/// As [`validate`], with the closed forms evaluated on `analytic` and the
/// simulator driven by `simulated`; used for negative controls.
pub fn validate_against(analytic: &Scenario, simulated: &Scenario, opts: RunOptions) -> Result<Table> {
    if !opts.mc {
        return Err(Error::Config("validate needs Monte Carlo; drop --no-mc".into()));
    }
    let a = analytic;
    let b = simulated;
    let la = a.links();
    let lb = b.links();
    let (n, seed) = (opts.trials, |k: usize| opts.seed(k));
    let u = u_rounded(b);
    let relay = a.relay;

    let sens_a = SensingModel::new(&la, &a.primary, &a.policy)?;
    let pd_a = sens_a.detection_probability(a.lambda_snr(), u as f64);
    let pd_b = SensingModel::new(&lb, &b.primary, &b.policy)?.detection_probability(b.lambda_snr(), u as f64);
    let sens_b = SensingSetup::new(&lb, &b.primary, &b.policy)?;

    let trans_a = TransModel::new(&la, &a.primary, &a.policy, a.csi, pd_a, a.iid)?;
    let trans_b = TransSetup::new(&lb, &b.primary, &b.policy, b.csi, pd_b)?;

    let inp_a = a.energy_inputs(&la);
    let inp_b = b.energy_inputs(&lb);
    let energy_a = EnergyModel::new(relay, &inp_a)?;
    let frame_b = FrameSetup::new(relay, &inp_b)?;
    let t_s = a.timing.t_s;

    let mut jobs: Vec<Box<dyn Fn() -> Result<Option<Pair>> + Send + Sync + '_>> = Vec::new();
    jobs.push(Box::new(|| {
        Ok(Some(Pair {
            name: "detection_probability",
            analytic: pd_a,
            mc: mc_detection(&sens_b, b.lambda_snr(), u, n, seed(0))?,
            bernoulli: true,
        }))
    }));
    jobs.push(Box::new(|| {
        let x = a.lambda_snr();
        Ok(Some(Pair {
            name: "report_e2e_cdf",
            analytic: report_e2e_cdf(x, relay, &la, &a.primary, &a.policy)?,
            mc: mc_report_e2e_cdf(&sens_b, relay, b.lambda_snr(), n, seed(1))?,
            bernoulli: true,
        }))
    }));
    jobs.push(Box::new(|| {
        let est = mc_outage(&trans_b, b.gamma_th_snr(), n, seed(2))?;
        Ok(Some(Pair {
            name: "outage_probability",
            analytic: trans_a.outage(a.gamma_th_snr()),
            mc: est.outage,
            bernoulli: true,
        }))
    }));
    jobs.push(Box::new(|| {
        let est = mc_outage(&trans_b, b.gamma_th_snr(), n, seed(3))?;
        Ok(Some(Pair {
            name: "relay_selection_probability",
            analytic: trans_a.relays[relay].selection,
            mc: est.selection[relay],
            bernoulli: true,
        }))
    }));
    jobs.push(Box::new(|| {
        let r = avg_harvested_power(relay, &la, &a.primary, &a.policy, pd_a)?;
        Ok(Some(Pair {
            name: "harvested_power_relay",
            analytic: r.e_bar,
            mc: mc_harvest(&lb.gains_pr(relay), &b.primary, b.policy.eta, pd_b, n, seed(4))?,
            bernoulli: false,
        }))
    }));
    jobs.push(Box::new(|| {
        let r = avg_harvested_power_source(&la, &a.primary, &a.policy, pd_a)?;
        Ok(Some(Pair {
            name: "harvested_power_source",
            analytic: r.e_bar,
            mc: mc_harvest(&lb.gains_ps(), &b.primary, b.policy.eta, pd_b, n, seed(5))?,
            bernoulli: false,
        }))
    }));
    jobs.push(Box::new(|| {
        let sat_a = match solve_saturation_gain(relay, &la, &a.primary, &a.policy, a.clip_target) {
            Ok(g) => g,
            Err(Error::NoRoot { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let path = &sens_a.relays[relay];
        let analytic = modified_gain_mean(&path.first_hop, sat_a.gain_u, sat_a.threshold);
        let r = &sens_b.relays[relay];
        Ok(Some(Pair {
            name: "clipped_gain_mean",
            analytic,
            mc: mc_clipped_gain(&r.hop1_means, sens_b.p_on, sat_a.gain_u, sat_a.threshold, n, seed(6))?,
            bernoulli: false,
        }))
    }));
    jobs.push(Box::new(|| {
        Ok(Some(Pair {
            name: "frame_energy",
            analytic: energy_a.total_energy(t_s)?,
            mc: mc_frame_energy(&frame_b, t_s, true, n, seed(7))?,
            bernoulli: false,
        }))
    }));
    jobs.push(Box::new(|| {
        Ok(Some(Pair {
            name: "frame_energy_nonharvesting",
            analytic: energy_a.total_energy_nonharvesting(t_s)?,
            mc: mc_frame_energy(&frame_b, t_s, false, n, seed(8))?,
            bernoulli: false,
        }))
    }));
    jobs.push(Box::new(|| {
        let analytic = match energy_a.ecg(t_s) {
            Ok(v) => v,
            Err(Error::ZeroHarvest) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(Some(Pair {
            name: "energy_consumption_gain",
            analytic,
            mc: mc_ecg(&frame_b, t_s, n, seed(9))?,
            bernoulli: false,
        }))
    }));

    let pairs = jobs.par_iter().map(|job| job()).collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["quantity", "analytic", "mc", "stderr", "z", "status"]);
    for p in pairs.into_iter().flatten() {
        let z = p.mc.z_score(p.analytic, p.bernoulli);
        let status = if z.abs() <= VALIDATE_Z { "pass" } else { "fail" };
        t.rows.push(vec![
            p.name.into(),
            p.analytic.into(),
            p.mc.mean.into(),
            p.mc.stderr.into(),
            z.into(),
            status.into(),
        ]);
    }
    Ok(t)
}

/// `true` when every row of a `validate` table passed.
pub fn all_passed(t: &Table) -> bool {
    let Some(c) = t.column("status") else { return false };
    t.rows.iter().all(|r| r[c] == Cell::Text("pass".into()))
}
