//! Power-unit conversions. Internally every power is linear watts.

use crate::error::{Error, Result};

/// Receiver noise floor used by all scenarios, in dBm.
pub const N0_DBM: f64 = -131.0;

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    1e-3 * db_to_lin(dbm)
}

pub fn w_to_dbm(w: f64) -> f64 {
    lin_to_db(w * 1e3)
}

/// Noise power in W.
pub fn noise_w() -> f64 {
    dbm_to_w(N0_DBM)
}

/// A power given with an explicit unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Power {
    Dbm(f64),
    /// dB relative to the noise floor.
    DbN0(f64),
    Watt(f64),
    MilliWatt(f64),
}

impl Power {
    pub fn watts(self, n0: f64) -> f64 {
        match self {
            Power::Dbm(v) => dbm_to_w(v),
            Power::DbN0(v) => n0 * db_to_lin(v),
            Power::Watt(v) => v,
            Power::MilliWatt(v) => v * 1e-3,
        }
    }
}

impl std::str::FromStr for Power {
    type Err = Error;

    /// Accepts `"17 dBm"`, `"10 dB"` (relative to N0), `"0.1 W"` or `"100 mW"`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let split = t
            .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
            .ok_or_else(|| Error::Config(format!("power `{s}` has no unit (dBm, dB, W, mW)")))?;
        let (num, unit) = t.split_at(split);
        let v: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("power `{s}` has an invalid number")))?;
        match unit.trim() {
            "dBm" | "dbm" => Ok(Power::Dbm(v)),
            "dB" | "db" => Ok(Power::DbN0(v)),
            "W" | "w" => Ok(Power::Watt(v)),
            "mW" | "mw" => Ok(Power::MilliWatt(v)),
            u => Err(Error::Config(format!("unknown power unit `{u}` in `{s}`"))),
        }
    }
}
