use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{func}: argument {value} outside the domain ({reason})")]
    Domain {
        func: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{func}: result overflows at argument {value}")]
    Range { func: &'static str, value: f64 },

    #[error("mean values {a} and {b} are not distinct (relative gap below 1e-9)")]
    NotDistinct { a: f64, b: f64 },

    #[error("{what}: {count} terms exceeds the enumeration limit of {limit}")]
    TooMany {
        what: &'static str,
        count: usize,
        limit: usize,
    },

    #[error("no sign change of the clipping residual in the scanned bracket [{lo:e}, {hi:e}] W")]
    NoRoot { lo: f64, hi: f64 },

    #[error("data target {target:e} bits is infeasible; at most {max_bits:e} bits can be delivered")]
    Infeasible { target: f64, max_bits: f64 },

    #[error("harvested energy is zero, the consumption gain is unbounded")]
    ZeroHarvest,

    #[error("invalid model: {0}")]
    Model(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
