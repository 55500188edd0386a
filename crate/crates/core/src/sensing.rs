//! Sensing and reporting phase: interference-limited relay powers, fixed AF
//! gains, per-path CDFs of the observed SNR and the cooperative detection
//! probability, plus the clipping level of the saturation-avoiding gain.
//!
//! Thresholds passed to the CDF-style functions are SNRs, i.e. powers already
//! divided by the noise power.

use crate::error::{Error, Result};
use crate::fading::{max_exp_expectation, ExpMixture, LinkSet, PrimaryModel};

/// Secondary-network power policy and radio constants. All powers in W.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryPolicy {
    pub p_max: f64,
    /// Interference threshold at the primary receivers.
    pub q: f64,
    pub n0: f64,
    /// Bandwidth in Hz.
    pub bandwidth: f64,
    /// Detection threshold.
    pub lambda: f64,
    pub eta: f64,
    pub p_tx: f64,
    pub p_rx: f64,
}

impl SecondaryPolicy {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("p_max", self.p_max),
            ("q", self.q),
            ("n0", self.n0),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::Model(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("lambda", self.lambda), ("p_tx", self.p_tx), ("p_rx", self.p_rx)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Model(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Model(format!("efficiency {} outside (0, 1]", self.eta)));
        }
        Ok(())
    }

    /// Detection threshold as an SNR.
    pub fn lambda_snr(&self) -> f64 {
        self.lambda / self.n0
    }
}

/// `(1/p_max + c/q)^-1`: the power whose exponential SNR law is the product
/// of the two constrained-power survival functions.
pub fn harmonic_power(p_max: f64, q: f64, interference: f64) -> f64 {
    1.0 / (1.0 / p_max + interference / q)
}

fn check_relay(i: usize, links: &LinkSet) -> Result<()> {
    if i >= links.relays() {
        return Err(Error::Domain {
            func: "relay index",
            value: i as f64,
            reason: "no such relay",
        });
    }
    Ok(())
}

/// Reporting power of relay `i`.
pub fn report_power(
    i: usize,
    links: &LinkSet,
    _primary: &PrimaryModel,
    policy: &SecondaryPolicy,
) -> Result<f64> {
    check_relay(i, links)?;
    let eq = max_exp_expectation(&links.gains_pr(i))?;
    Ok(harmonic_power(policy.p_max, policy.q, eq))
}

/// Law of the SNR received by relay `i` from the primary network.
pub fn report_first_hop(
    i: usize,
    links: &LinkSet,
    primary: &PrimaryModel,
    n0: f64,
) -> Result<ExpMixture> {
    check_relay(i, links)?;
    let means: Vec<f64> = links
        .gains_pr(i)
        .into_iter()
        .map(|g| primary.power * g / n0)
        .collect();
    ExpMixture::activity_mixture(&means, primary.p_on)
}

/// Law of the SNR received directly by the destination.
pub fn direct_sensing_snr(links: &LinkSet, primary: &PrimaryModel, n0: f64) -> Result<ExpMixture> {
    let means: Vec<f64> = links
        .gains_pd()
        .into_iter()
        .map(|g| primary.power * g / n0)
        .collect();
    ExpMixture::activity_mixture(&means, primary.p_on)
}

/// Fixed-gain constant `(E[1/(gamma_1 + 1)])^-1` of relay `i` during reporting.
pub fn fixed_gain_report(
    i: usize,
    links: &LinkSet,
    primary: &PrimaryModel,
    policy: &SecondaryPolicy,
) -> Result<f64> {
    Ok(1.0 / report_first_hop(i, links, primary, policy.n0)?.inv_shift_mean())
}

/// One relay path of the reporting phase, fully resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportPath {
    pub first_hop: ExpMixture,
    pub gain_u: f64,
    pub power: f64,
    /// Mean SNR of the relay-to-destination hop.
    pub hop2_mean: f64,
}

impl ReportPath {
    pub fn new(
        i: usize,
        links: &LinkSet,
        primary: &PrimaryModel,
        policy: &SecondaryPolicy,
    ) -> Result<Self> {
        let first_hop = report_first_hop(i, links, primary, policy.n0)?;
        let gain_u = 1.0 / first_hop.inv_shift_mean();
        let power = report_power(i, links, primary, policy)?;
        Ok(Self {
            first_hop,
            gain_u,
            power,
            hop2_mean: power * links.gain_rd(i) / policy.n0,
        })
    }

    pub fn e2e_cdf(&self, x: f64) -> f64 {
        self.first_hop
            .fixed_gain_e2e_cdf(x, self.gain_u, self.hop2_mean)
    }
}

/// CDF of the end-to-end reporting SNR through relay `i`.
pub fn report_e2e_cdf(
    x: f64,
    i: usize,
    links: &LinkSet,
    primary: &PrimaryModel,
    policy: &SecondaryPolicy,
) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain {
            func: "report_e2e_cdf",
            value: x,
            reason: "SNR must be nonnegative",
        });
    }
    Ok(ReportPath::new(i, links, primary, policy)?.e2e_cdf(x))
}

/// Everything the fusion center observes in one sensing sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingModel {
    pub relays: Vec<ReportPath>,
    pub direct: ExpMixture,
}

impl SensingModel {
    pub fn new(links: &LinkSet, primary: &PrimaryModel, policy: &SecondaryPolicy) -> Result<Self> {
        links.validate()?;
        policy.validate()?;
        let relays = (0..links.relays())
            .map(|i| ReportPath::new(i, links, primary, policy))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            relays,
            direct: direct_sensing_snr(links, primary, policy.n0)?,
        })
    }

    /// Per-sample miss probability: no path exceeds `lambda_snr`.
    pub fn delta(&self, lambda_snr: f64) -> f64 {
        let relay: f64 = self.relays.iter().map(|r| r.e2e_cdf(lambda_snr)).product();
        (relay * self.direct.cdf(lambda_snr)).clamp(0.0, 1.0)
    }

    /// `1 - delta^u`; `u` may be fractional (continuous time-bandwidth product).
    pub fn detection_probability(&self, lambda_snr: f64, u: f64) -> f64 {
        1.0 - self.delta(lambda_snr).powf(u)
    }
}

/// Cooperative detection probability over `u` independent samples.
pub fn detection_probability(
    lambda_snr: f64,
    u: f64,
    links: &LinkSet,
    primary: &PrimaryModel,
    policy: &SecondaryPolicy,
) -> Result<f64> {
    if !(u >= 1.0) {
        return Err(Error::Domain {
            func: "detection_probability",
            value: u,
            reason: "at least one sample is required",
        });
    }
    if !(lambda_snr >= 0.0) {
        return Err(Error::Domain {
            func: "detection_probability",
            value: lambda_snr,
            reason: "threshold must be nonnegative",
        });
    }
    Ok(SensingModel::new(links, primary, policy)?.detection_probability(lambda_snr, u))
}

/// Clipping level of the saturation-avoiding gain and the derived SNR
/// threshold above which the amplifier output is clipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationGain {
    /// Clipping parameter in W.
    pub k: f64,
    pub threshold: f64,
    pub gain_u: f64,
    pub residual: f64,
}

/// Average squared modified gain (normalized by `N0`) for clipping threshold
/// `t`: `F(t)/u + E[1/(X+1); X > t]`.
pub fn modified_gain_mean(first_hop: &ExpMixture, gain_u: f64, t: f64) -> f64 {
    if t < 0.0 {
        return first_hop.inv_shift_mean();
    }
    first_hop.cdf(t) / gain_u + first_hop.inv_shift_tail(t)
}

const K_SCAN_LO: f64 = 1e-6;
const K_SCAN_HI: f64 = 1e6;
const K_SCAN_POINTS: usize = 1201;
const ZERO_RESIDUAL: f64 = 1e-14;

/// Solve for the clipping level `k` at which the averaged modified gain equals
/// `target_ratio / gain_u`.
///
/// `target_ratio = 1` is the literal condition; the averaged gain never
/// exceeds `1/u` for a finite threshold, so only `target_ratio < 1` produces a
/// nondegenerate root. The scan runs downward from `K_SCAN_HI * n0` and keeps
/// the root on the increasing branch (`threshold > u - 1`).
pub fn solve_clipping_level(
    first_hop: &ExpMixture,
    gain_u: f64,
    n0: f64,
    target_ratio: f64,
) -> Result<SaturationGain> {
    if !(target_ratio > 0.0 && target_ratio <= 1.0) {
        return Err(Error::Domain {
            func: "solve_clipping_level",
            value: target_ratio,
            reason: "target ratio must lie in (0, 1]",
        });
    }
    let target = target_ratio / gain_u;
    let threshold = |k: f64| k * gain_u / n0 - 1.0;
    let residual = |k: f64| modified_gain_mean(first_hop, gain_u, threshold(k)) - target;
    let (lo, hi) = (K_SCAN_LO * n0, K_SCAN_HI * n0);
    let ratio = (hi / lo).ln() / (K_SCAN_POINTS - 1) as f64;
    let grid = |j: usize| lo * (ratio * j as f64).exp();

    let mut upper = None;
    let mut bracket = None;
    for j in (0..K_SCAN_POINTS).rev() {
        let k = grid(j);
        let r = residual(k);
        if r > ZERO_RESIDUAL {
            upper = Some(k);
        } else if r < -ZERO_RESIDUAL {
            if let Some(u) = upper {
                bracket = Some((k, u));
                break;
            }
        }
    }
    let (mut a, mut b) = bracket.ok_or(Error::NoRoot { lo, hi })?;
    for _ in 0..200 {
        let mid = (a * b).sqrt();
        if mid <= a || mid >= b {
            break;
        }
        if residual(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let k = (a * b).sqrt();
    let res = residual(k);
    if res.abs() > 1e-9 {
        return Err(Error::NoRoot { lo, hi });
    }
    Ok(SaturationGain {
        k,
        threshold: threshold(k),
        gain_u,
        residual: res,
    })
}

/// Clipping level of relay `i` for the reporting phase.
pub fn solve_saturation_gain(
    i: usize,
    links: &LinkSet,
    primary: &PrimaryModel,
    policy: &SecondaryPolicy,
    target_ratio: f64,
) -> Result<SaturationGain> {
    let first_hop = report_first_hop(i, links, primary, policy.n0)?;
    let gain_u = 1.0 / first_hop.inv_shift_mean();
    solve_clipping_level(&first_hop, gain_u, policy.n0, target_ratio)
}
