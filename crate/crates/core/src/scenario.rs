//! Scenario files: TOML with one table per model part. Powers are strings
//! with a unit (`"17 dBm"`, `"10 dB"` relative to the noise floor, `"0.1 W"`,
//! `"5 mW"`). Every key has a default, and presets for the published
//! experiments only override what differs.
//!
//! Key reference (defaults in brackets):
//!
//! ```text
//! [primary]   count [3], power ["10 dB"], p_on [0.5]
//! [secondary] relays [1], p_max ["10 dB"], q ["2 dB"], lambda ["10 dB"],
//!             gamma_th ["3 dB"], eta [0.35], bandwidth [1e6],
//!             p_tx ["10 dBm"], p_rx ["9 dBm"], n0 ["-131 dBm"]
//! [links]     alpha [4], d_p1 [0.4], d_p1_s, d_p1_r, d_p1_d [= d_p1 when < 0],
//!             primary_step [0.01], d_sr1 [0.1], d_rd1 [0.1],
//!             relay_step [0.005], iid [false]
//! [csi]       rho [0.9], f_doppler [0], t_diff [0], carrier [2.5e9]
//!             (rho < 0 derives it from the Doppler pair)
//! [timing]    t_total [0.101], t_r [0.001], t_s [2e-4], rate [1e5], d_star [0]
//! [opt]       relay [0], clip_target [0.99], exclude [[]]
//!             (relays in `exclude` still sense but never carry data)
//! [run]       trials [1000000], seed [1]
//! [sweep]     var [""], values [[]]
//! ```

use serde::Deserialize;
use toml::{Table, Value};

use crate::energy::{EnergyInputs, FrameTiming};
use crate::error::{Error, Result};
use crate::fading::{Ladder, LinkSet, PrimaryModel};
use crate::sensing::SecondaryPolicy;
use crate::transmission::CsiModel;
use crate::units::Power;

const DEFAULTS: &str = r#"
[primary]
count = 3
power = "10 dB"
p_on = 0.5

[secondary]
relays = 1
p_max = "10 dB"
q = "2 dB"
lambda = "10 dB"
gamma_th = "3 dB"
eta = 0.35
bandwidth = 1e6
p_tx = "10 dBm"
p_rx = "9 dBm"
n0 = "-131 dBm"

[links]
alpha = 4.0
d_p1 = 0.4
d_p1_s = -1.0
d_p1_r = -1.0
d_p1_d = -1.0
primary_step = 0.01
d_sr1 = 0.1
d_rd1 = 0.1
relay_step = 0.005
iid = false

[csi]
rho = 0.9
f_doppler = 0.0
t_diff = 0.0
carrier = 2.5e9

[timing]
t_total = 0.101
t_r = 0.001
t_s = 2e-4
rate = 1e5
d_star = 0.0

[opt]
relay = 0
clip_target = 0.99
exclude = []

[run]
trials = 1000000
seed = 1

[sweep]
var = ""
values = []
"#;

/// Overrides on top of the defaults for each named experiment.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig3", FIG3),
    ("fig4", FIG4),
    ("fig6", FIG6),
    ("fig7", FIG7),
    ("fig8", FIG8),
    ("table1", TABLE1),
];

const FIG3: &str = r#"
[primary]
power = "10 dB"
[secondary]
relays = 1
p_max = "10 dB"
q = "2 dB"
lambda = "10 dB"
[links]
d_p1 = 0.4
d_rd1 = 0.1
[timing]
t_s = 2e-4
"#;

const FIG4: &str = r#"
[primary]
count = 2
power = "30 dB"
[secondary]
relays = 4
p_max = "0 dB"
q = "6 dB"
lambda = "3 dB"
gamma_th = "3 dB"
[links]
d_p1 = 0.3
d_p1_d = 0.4
d_sr1 = 0.1
d_rd1 = 0.1
relay_step = 0.0
iid = true
[csi]
rho = 0.9
[timing]
t_s = 2e-4
"#;

const FIG6: &str = r#"
[primary]
count = 2
power = "20 dBm"
[secondary]
relays = 4
p_max = "20 dBm"
q = "17 dBm"
lambda = "17 dBm"
p_tx = "10 dBm"
p_rx = "9 dBm"
[links]
d_p1 = 0.4
d_sr1 = 0.1
d_rd1 = 0.1
relay_step = 0.0
iid = true
[timing]
t_total = 0.1
t_r = 0.001
t_s = 0.02
"#;

const FIG7: &str = r#"
[primary]
count = 2
power = "20 dBm"
[secondary]
relays = 4
p_max = "20 dBm"
q = "17 dBm"
lambda = "17 dBm"
p_tx = "10 dBm"
p_rx = "9 dBm"
[links]
d_p1 = 0.4
d_sr1 = 0.1
d_rd1 = 0.1
relay_step = 0.0
iid = true
[timing]
t_total = 0.1
t_r = 0.001
t_s = 0.02
"#;

const FIG8: &str = r#"
[primary]
count = 2
power = "20 dBm"
[secondary]
relays = 1
p_max = "20 dBm"
q = "17 dBm"
lambda = "17 dBm"
p_tx = "10 dBm"
p_rx = "9 dBm"
[links]
d_p1 = 0.5
d_sr1 = 0.2
d_rd1 = 0.2
iid = false
[timing]
t_total = 0.1
t_r = 0.001
t_s = 0.02
"#;

const TABLE1: &str = r#"
[primary]
count = 1
power = "30 dB"
[secondary]
relays = 1
p_max = "30 dB"
q = "7 dB"
lambda = "7 dB"
p_tx = "10 dBm"
p_rx = "9 dBm"
[links]
d_p1 = 1.0
d_sr1 = 0.5
d_rd1 = 0.5
[timing]
t_total = 0.101
t_r = 0.001
t_s = 0.02
rate = 1e5
d_star = 0.0
"#;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrimarySection {
    count: usize,
    power: Power,
    p_on: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SecondarySection {
    relays: usize,
    p_max: Power,
    q: Power,
    lambda: Power,
    gamma_th: Power,
    eta: f64,
    bandwidth: f64,
    p_tx: Power,
    p_rx: Power,
    n0: Power,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinksSection {
    alpha: f64,
    d_p1: f64,
    d_p1_s: f64,
    d_p1_r: f64,
    d_p1_d: f64,
    primary_step: f64,
    d_sr1: f64,
    d_rd1: f64,
    relay_step: f64,
    iid: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CsiSection {
    rho: f64,
    f_doppler: f64,
    t_diff: f64,
    carrier: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimingSection {
    t_total: f64,
    t_r: f64,
    t_s: f64,
    rate: f64,
    d_star: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptSection {
    relay: usize,
    clip_target: f64,
    exclude: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    trials: u64,
    seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    var: String,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    primary: PrimarySection,
    secondary: SecondarySection,
    links: LinksSection,
    csi: CsiSection,
    timing: TimingSection,
    opt: OptSection,
    run: RunSection,
    sweep: SweepSection,
}

impl TryFrom<String> for Power {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl<'de> Deserialize<'de> for Power {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A fully resolved scenario, kept together with its raw table so that
/// sweeps can re-resolve it with one key changed.
#[derive(Debug, Clone)]
pub struct Scenario {
    raw: Table,
    pub primary: PrimaryModel,
    pub policy: SecondaryPolicy,
    pub ladder: Ladder,
    pub iid: bool,
    pub csi: CsiModel,
    pub timing: FrameTiming,
    pub gamma_th: f64,
    pub rate: f64,
    pub d_star: f64,
    pub relay: usize,
    pub clip_target: f64,
    pub exclude: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub sweep: Option<(String, Vec<f64>)>,
}

fn parse_table(src: &str, what: &str) -> Result<Table> {
    src.parse::<Table>()
        .map_err(|e| Error::Config(format!("{what}: {e}")))
}

/// Dotted names of every valid key.
pub fn valid_keys() -> Vec<String> {
    let defaults = parse_table(DEFAULTS, "defaults").expect("built-in defaults parse");
    let mut keys = Vec::new();
    for (section, body) in &defaults {
        if let Value::Table(t) = body {
            keys.extend(t.keys().map(|k| format!("{section}.{k}")));
        }
    }
    keys
}

fn invalid_key(key: &str) -> Error {
    Error::Config(format!(
        "unknown key `{key}`; valid keys: {}",
        valid_keys().join(", ")
    ))
}

fn overlay(base: &mut Table, top: &Table) -> Result<()> {
    for (section, body) in top {
        let Value::Table(entries) = body else {
            return Err(Error::Config(format!("`{section}` must be a table")));
        };
        let Some(Value::Table(target)) = base.get_mut(section) else {
            return Err(invalid_key(section));
        };
        for (k, v) in entries {
            if !target.contains_key(k) {
                return Err(invalid_key(&format!("{section}.{k}")));
            }
            target.insert(k.clone(), v.clone());
        }
    }
    Ok(())
}

fn parse_value(text: &str) -> Value {
    let text = text.trim();
    match format!("v = {text}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or(Value::String(text.into())),
        Err(_) => Value::String(text.into()),
    }
}

/// Set a dotted `section.key` to a value given as text (TOML literal, or a
/// bare string such as `17 dBm`).
pub fn set_key(table: &mut Table, key: &str, text: &str) -> Result<()> {
    set_value(table, key, parse_value(text))
}

fn set_value(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let (section, name) = key.split_once('.').ok_or_else(|| invalid_key(key))?;
    let Some(Value::Table(t)) = table.get_mut(section) else {
        return Err(invalid_key(key));
    };
    let slot = t.get_mut(name).ok_or_else(|| invalid_key(key))?;
    let value = match (&*slot, value) {
        (Value::Float(_), Value::Integer(i)) => Value::Float(i as f64),
        (Value::String(_), Value::Integer(i)) => Value::String(i.to_string()),
        (Value::String(_), Value::Float(f)) => Value::String(f.to_string()),
        (Value::Integer(_), Value::Float(f)) if f.fract() == 0.0 && f.abs() < 9e15 => {
            Value::Integer(f as i64)
        }
        (_, v) => v,
    };
    *slot = value;
    Ok(())
}

impl Scenario {
    /// Defaults overlaid with a preset (if any), a config file body (if any)
    /// and `key=value` overrides, in that order.
    pub fn build(preset: Option<&str>, config: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let mut raw = parse_table(DEFAULTS, "defaults")?;
        if let Some(name) = preset {
            let body = PRESETS
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, b)| *b)
                .ok_or_else(|| {
                    let names: Vec<_> = PRESETS.iter().map(|p| p.0).collect();
                    Error::Config(format!("unknown preset `{name}`; expected one of {}", names.join(", ")))
                })?;
            overlay(&mut raw, &parse_table(body, name)?)?;
        }
        if let Some(src) = config {
            overlay(&mut raw, &parse_table(src, "config file")?)?;
        }
        for (k, v) in overrides {
            set_key(&mut raw, k, v)?;
        }
        Self::from_table(raw)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::build(Some(name), None, &[])
    }

    /// Copy with one key replaced.
    pub fn with(&self, key: &str, value: f64) -> Result<Self> {
        let mut raw = self.raw.clone();
        set_value(&mut raw, key, Value::Float(value))?;
        Self::from_table(raw)
    }

    /// Copy with one key replaced by text.
    pub fn with_text(&self, key: &str, text: &str) -> Result<Self> {
        let mut raw = self.raw.clone();
        set_key(&mut raw, key, text)?;
        Self::from_table(raw)
    }

    pub fn raw(&self) -> &Table {
        &self.raw
    }

    fn from_table(raw: Table) -> Result<Self> {
        let f: ScenarioFile = Value::Table(raw.clone())
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let n0 = f.secondary.n0.watts(0.0);
        if !(n0 > 0.0) {
            return Err(Error::Config("noise power must be given in absolute units".into()));
        }
        let w = |p: Power| p.watts(n0);
        let primary = PrimaryModel::new(f.primary.count, w(f.primary.power), f.primary.p_on)?;
        let policy = SecondaryPolicy {
            p_max: w(f.secondary.p_max),
            q: w(f.secondary.q),
            n0,
            bandwidth: f.secondary.bandwidth,
            lambda: w(f.secondary.lambda),
            eta: f.secondary.eta,
            p_tx: w(f.secondary.p_tx),
            p_rx: w(f.secondary.p_rx),
        };
        policy.validate()?;
        let or_p1 = |d: f64| if d < 0.0 { f.links.d_p1 } else { d };
        let ladder = Ladder {
            alpha: f.links.alpha,
            primaries: f.primary.count,
            relays: f.secondary.relays,
            d_p1_s: or_p1(f.links.d_p1_s),
            d_p1_r: or_p1(f.links.d_p1_r),
            d_p1_d: or_p1(f.links.d_p1_d),
            primary_step: f.links.primary_step,
            d_sr1: f.links.d_sr1,
            d_rd1: f.links.d_rd1,
            relay_step: f.links.relay_step,
        };
        LinkSet::from_ladder(&ladder)?;
        let csi = if f.csi.rho >= 0.0 {
            CsiModel::new(f.csi.rho)?
        } else {
            CsiModel::from_doppler(f.csi.f_doppler, f.csi.t_diff)?
        };
        let _ = f.csi.carrier;
        let timing = FrameTiming::new(f.timing.t_total, f.timing.t_r, f.timing.t_s)?;
        if f.opt.relay >= f.secondary.relays {
            return Err(Error::Config(format!(
                "opt.relay = {} but only {} relays",
                f.opt.relay, f.secondary.relays
            )));
        }
        if let Some(j) = f.opt.exclude.iter().find(|&&j| j >= f.secondary.relays) {
            return Err(Error::Config(format!("opt.exclude names relay {j} but only {} relays", f.secondary.relays)));
        }
        if f.opt.exclude.contains(&f.opt.relay) {
            return Err(Error::Config(format!("opt.relay = {} is also in opt.exclude", f.opt.relay)));
        }
        let sweep = if f.sweep.var.is_empty() {
            None
        } else {
            if f.sweep.values.is_empty() {
                return Err(Error::Config(format!("sweep over `{}` has no values", f.sweep.var)));
            }
            if !valid_keys().contains(&f.sweep.var) {
                return Err(invalid_key(&f.sweep.var));
            }
            Some((f.sweep.var.clone(), f.sweep.values.clone()))
        };
        Ok(Self {
            raw,
            primary,
            policy,
            ladder,
            iid: f.links.iid,
            csi,
            timing,
            gamma_th: w(f.secondary.gamma_th),
            rate: f.timing.rate,
            d_star: f.timing.d_star,
            relay: f.opt.relay,
            clip_target: f.opt.clip_target,
            exclude: f.opt.exclude.clone(),
            trials: f.run.trials,
            seed: f.run.seed,
            sweep,
        })
    }

    pub fn links(&self) -> LinkSet {
        LinkSet::from_ladder(&self.ladder).expect("validated at construction")
    }

    pub fn lambda_snr(&self) -> f64 {
        self.policy.lambda_snr()
    }

    pub fn gamma_th_snr(&self) -> f64 {
        self.gamma_th / self.policy.n0
    }

    /// Continuous sample count `T_S W`.
    pub fn samples(&self) -> f64 {
        self.timing.samples(self.policy.bandwidth)
    }

    pub fn energy_inputs<'a>(&'a self, links: &'a LinkSet) -> EnergyInputs<'a> {
        EnergyInputs {
            links,
            primary: &self.primary,
            policy: &self.policy,
            csi: self.csi,
            timing: self.timing,
            rate: self.rate,
            iid: self.iid,
            exclude: &self.exclude,
        }
    }
}
