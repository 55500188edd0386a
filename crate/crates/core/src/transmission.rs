//! Transmission phase: relay selection on outdated relay-to-destination CSI,
//! the end-to-end SNR law of the selected fixed-gain AF link and the outage
//! probability.
//!
//! The destination picks `s = argmax_j m_j |h^_j|^2` where `h^_j` is an aged
//! estimate of the true channel `h_j` with correlation `rho`. Given relay `i`
//! is picked, the true second-hop SNR has density `sum_T Xi_T exp(-Z_T x)` over
//! subsets `T` of the other relays:
//!
//! ```text
//! a_T = (-1)^|T| / m_i,   b_T = 1/m_i + sum_{j in T} 1/m_j
//! D_T = (1 - rho^2) m_i b_T + rho^2,   Xi_T = a_T / D_T,   Z_T = b_T / D_T
//! ```
//!
//! `D_T >= min(1, m_i b_T) > 0`, so perfect CSI needs no special case.

use crate::error::{Error, Result};
use crate::fading::{binomial, dual_hop_survival_factor, max_exp_expectation, LinkSet, PrimaryModel};
use crate::sensing::{harmonic_power, SecondaryPolicy};
use crate::specfun;

const MAX_RELAYS: usize = 20;

/// Time correlation between the channel estimate used for selection and the
/// channel used for transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiModel {
    pub rho: f64,
}

impl CsiModel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Model(format!("correlation {rho} outside [0, 1]")));
        }
        Ok(Self { rho })
    }

    /// Magnitude of the Jakes correlation; only `rho^2` enters the model.
    pub fn from_doppler(f_doppler: f64, t_diff: f64) -> Result<Self> {
        Self::new(rho_from_doppler(f_doppler, t_diff)?.abs())
    }
}

/// `J0(2 pi f_D T_diff)`. May be negative.
pub fn rho_from_doppler(f_doppler: f64, t_diff: f64) -> Result<f64> {
    if !(f_doppler >= 0.0 && t_diff >= 0.0) {
        return Err(Error::Domain {
            func: "rho_from_doppler",
            value: f_doppler * t_diff,
            reason: "Doppler frequency and delay must be nonnegative",
        });
    }
    specfun::bessel_j0(2.0 * std::f64::consts::PI * f_doppler * t_diff)
}

/// Transmit powers of the source and of every relay, in W.
#[derive(Debug, Clone, PartialEq)]
pub struct TransPowers {
    pub p_sr: f64,
    pub p_rd: Vec<f64>,
}

/// Interference-limited powers when the frame is used for data, i.e. with the
/// interference constraint weighted by the miss probability `1 - p_d`.
pub fn trans_powers(
    links: &LinkSet,
    _primary: &PrimaryModel,
    policy: &SecondaryPolicy,
    p_d: f64,
) -> Result<TransPowers> {
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::Domain {
            func: "trans_powers",
            value: p_d,
            reason: "detection probability outside [0, 1]",
        });
    }
    let miss = 1.0 - p_d;
    let p_sr = harmonic_power(policy.p_max, policy.q, miss * max_exp_expectation(&links.gains_ps())?);
    let p_rd = (0..links.relays())
        .map(|i| {
            let eq = max_exp_expectation(&links.gains_pr(i))?;
            Ok(harmonic_power(policy.p_max, policy.q, miss * eq))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransPowers { p_sr, p_rd })
}

/// One exponential term `xi * exp(-z x)` of the selected relay's true
/// second-hop SNR density (joint with the selection event).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionTerm {
    pub xi: f64,
    pub z: f64,
}

/// Transmission-phase statistics of one relay.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayLaw {
    /// Probability that this relay is selected.
    pub selection: f64,
    pub terms: Vec<SelectionTerm>,
    /// Mean SNR of the source-to-relay hop.
    pub hop1_mean: f64,
    /// Fixed-gain constant for the transmission phase.
    pub gain_u: f64,
    /// Mean SNR of the relay-to-destination hop.
    pub hop2_mean: f64,
}

impl RelayLaw {
    /// CDF of the end-to-end SNR given that this relay was selected.
    pub fn e2e_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let s: f64 = self
            .terms
            .iter()
            .map(|t| t.xi / t.z * dual_hop_survival_factor(x, self.hop1_mean, self.gain_u, 1.0 / t.z))
            .sum();
        (1.0 - s / self.selection).clamp(0.0, 1.0)
    }

    /// Density of the true second-hop SNR given selection.
    pub fn hop2_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|t| t.xi * (-t.z * x).exp()).sum::<f64>() / self.selection
    }
}

/// `(c e^c E1(c))^-1` with `c = 1/mean`: fixed gain for an exponential first hop.
pub fn exponential_fixed_gain(mean: f64) -> f64 {
    let c = 1.0 / mean;
    1.0 / (c * specfun::e1e(c))
}

/// Transmission-phase model for all relays.
#[derive(Debug, Clone, PartialEq)]
pub struct TransModel {
    pub relays: Vec<RelayLaw>,
    pub powers: TransPowers,
    pub iid: bool,
}

fn selection_terms(means: &[f64], i: usize, rho: f64) -> Vec<SelectionTerm> {
    let others: Vec<usize> = (0..means.len()).filter(|&j| j != i).collect();
    let mi = means[i];
    let r2 = rho * rho;
    (0u32..(1u32 << others.len()))
        .map(|mask| {
            let rate: f64 = others
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &j)| 1.0 / means[j])
                .sum();
            let a = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 } / mi;
            let b = 1.0 / mi + rate;
            let d = (1.0 - r2) * mi * b + r2;
            SelectionTerm { xi: a / d, z: b / d }
        })
        .collect()
}

fn selection_terms_iid(m: f64, relays: usize, rho: f64) -> Vec<SelectionTerm> {
    let r2 = rho * rho;
    (0..relays)
        .map(|l| {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let a = binomial(relays - 1, l) * sign / m;
            let b = (l + 1) as f64 / m;
            let d = (1.0 - r2) * m * b + r2;
            SelectionTerm { xi: a / d, z: b / d }
        })
        .collect()
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

impl TransModel {
    /// Build the model at detection probability `p_d` (which sets the powers).
    ///
    /// `iid` selects the identical-relay expressions and is rejected unless
    /// all relays have the same link statistics.
    pub fn new(
        links: &LinkSet,
        primary: &PrimaryModel,
        policy: &SecondaryPolicy,
        csi: CsiModel,
        p_d: f64,
        iid: bool,
    ) -> Result<Self> {
        links.validate()?;
        policy.validate()?;
        let m = links.relays();
        if m > MAX_RELAYS {
            return Err(Error::TooMany {
                what: "relay selection",
                count: m,
                limit: MAX_RELAYS,
            });
        }
        let powers = trans_powers(links, primary, policy, p_d)?;
        let hop1: Vec<f64> = (0..m)
            .map(|i| powers.p_sr * links.gain_sr(i) / policy.n0)
            .collect();
        let hop2: Vec<f64> = (0..m)
            .map(|i| powers.p_rd[i] * links.gain_rd(i) / policy.n0)
            .collect();
        if iid && !(hop1.iter().all(|&v| approx_eq(v, hop1[0])) && hop2.iter().all(|&v| approx_eq(v, hop2[0]))) {
            return Err(Error::Config(
                "identical-relay expressions requested for non-identical relay links".into(),
            ));
        }
        let relays = (0..m)
            .map(|i| {
                let terms = if iid {
                    selection_terms_iid(hop2[i], m, csi.rho)
                } else {
                    selection_terms(&hop2, i, csi.rho)
                };
                let selection = if iid {
                    1.0 / m as f64
                } else {
                    terms.iter().map(|t| t.xi / t.z).sum()
                };
                RelayLaw {
                    selection,
                    terms,
                    hop1_mean: hop1[i],
                    gain_u: exponential_fixed_gain(hop1[i]),
                    hop2_mean: hop2[i],
                }
            })
            .collect();
        Ok(Self { relays, powers, iid })
    }

    pub fn outage(&self, gamma_th: f64) -> f64 {
        self.relays
            .iter()
            .map(|r| r.selection * r.e2e_cdf(gamma_th))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Selection probability of relay `i` in the inclusion–exclusion shape
    /// `1 - sum_{T != 0} (-1)^{|T|+1} / (1 + m_i sum_T 1/m_j)`.
    pub fn selection_by_exclusion(&self, i: usize) -> f64 {
        let means: Vec<f64> = self.relays.iter().map(|r| r.hop2_mean).collect();
        let others: Vec<usize> = (0..means.len()).filter(|&j| j != i).collect();
        let mut acc = 0.0;
        for mask in 1u32..(1u32 << others.len()) {
            let rate: f64 = others
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &j)| 1.0 / means[j])
                .sum();
            let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign / (1.0 + means[i] * rate);
        }
        1.0 - acc
    }
}

fn check_relay(i: usize, model: &TransModel) -> Result<()> {
    if i >= model.relays.len() {
        return Err(Error::Domain {
            func: "relay index",
            value: i as f64,
            reason: "no such relay",
        });
    }
    Ok(())
}

/// End-to-end SNR CDF of relay `i` given it was selected.
pub fn trans_e2e_cdf(x: f64, i: usize, model: &TransModel) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain {
            func: "trans_e2e_cdf",
            value: x,
            reason: "SNR must be nonnegative",
        });
    }
    check_relay(i, model)?;
    Ok(model.relays[i].e2e_cdf(x))
}

pub fn relay_selection_prob(i: usize, model: &TransModel) -> Result<f64> {
    check_relay(i, model)?;
    Ok(model.relays[i].selection)
}

/// Outage probability at SNR threshold `gamma_th`.
#[allow(clippy::too_many_arguments)]
pub fn outage_probability(
    gamma_th: f64,
    links: &LinkSet,
    primary: &PrimaryModel,
    policy: &SecondaryPolicy,
    csi: CsiModel,
    p_d: f64,
    iid: bool,
) -> Result<f64> {
    if !(gamma_th >= 0.0) {
        return Err(Error::Domain {
            func: "outage_probability",
            value: gamma_th,
            reason: "threshold must be nonnegative",
        });
    }
    Ok(TransModel::new(links, primary, policy, csi, p_d, iid)?.outage(gamma_th))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::Ladder;
    use crate::quad;

    fn setup(m: usize, step: f64) -> (LinkSet, PrimaryModel, SecondaryPolicy) {
        let n0 = 1.0;
        let links = LinkSet::from_ladder(&Ladder {
            alpha: 4.0,
            primaries: 2,
            relays: m,
            d_p1_s: 0.3,
            d_p1_r: 0.3,
            d_p1_d: 0.4,
            primary_step: 0.01,
            d_sr1: 0.1,
            d_rd1: 0.1,
            relay_step: step,
        })
        .unwrap();
        let policy = SecondaryPolicy {
            p_max: 1e-2,
            q: 10f64.powf(0.6),
            n0,
            bandwidth: 1e6,
            lambda: 2.0,
            eta: 0.35,
            p_tx: 0.0,
            p_rx: 0.0,
        };
        (links, PrimaryModel::new(2, 1000.0, 0.5).unwrap(), policy)
    }

    #[test]
    fn doppler() {
        assert_eq!(rho_from_doppler(100.0, 0.0).unwrap(), 1.0);
        let z = 2.404_825_557_695_773 / (2.0 * std::f64::consts::PI);
        assert!(rho_from_doppler(1.0, z).unwrap().abs() < 1e-12);
        assert!(rho_from_doppler(-1.0, 1.0).is_err());
    }

    #[test]
    fn selection_sums_to_one_and_matches_exclusion_form() {
        let (links, pm, pol) = setup(3, 0.02);
        let model = TransModel::new(&links, &pm, &pol, CsiModel::new(0.7).unwrap(), 0.4, false).unwrap();
        let total: f64 = model.relays.iter().map(|r| r.selection).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for i in 0..3 {
            assert!((model.relays[i].selection - model.selection_by_exclusion(i)).abs() < 1e-12);
        }
        // closer relays are picked more often
        assert!(model.relays[0].selection > model.relays[2].selection);
    }

    #[test]
    fn hop2_density_integrates_to_one() {
        let (links, pm, pol) = setup(3, 0.02);
        for rho in [0.0, 0.5, 0.99, 1.0] {
            let model = TransModel::new(&links, &pm, &pol, CsiModel::new(rho).unwrap(), 0.2, false).unwrap();
            for r in &model.relays {
                let mass = quad::integrate_semi_infinite(|x| r.hop2_pdf(x), 0.0, 1e-12);
                assert!((mass - 1.0).abs() < 1e-8, "rho={rho} mass={mass}");
            }
        }
    }

    #[test]
    fn single_relay_is_rho_invariant() {
        let (links, pm, pol) = setup(1, 0.0);
        let a = TransModel::new(&links, &pm, &pol, CsiModel::new(0.1).unwrap(), 0.3, false).unwrap();
        let b = TransModel::new(&links, &pm, &pol, CsiModel::new(0.9).unwrap(), 0.3, false).unwrap();
        for x in [0.1, 1.0, 10.0, 100.0] {
            assert!((a.outage(x) - b.outage(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_csi_is_continuous() {
        let (links, pm, pol) = setup(3, 0.005);
        let a = TransModel::new(&links, &pm, &pol, CsiModel::new(1.0).unwrap(), 0.3, false).unwrap();
        let b = TransModel::new(&links, &pm, &pol, CsiModel::new(1.0 - 1e-6).unwrap(), 0.3, false).unwrap();
        for x in [0.1, 1.0, 10.0, 100.0, 1e4] {
            assert!((a.outage(x) - b.outage(x)).abs() < 1e-4);
        }
    }

    #[test]
    fn iid_matches_general_form() {
        let (links, pm, pol) = setup(4, 0.0);
        for rho in [0.1, 0.9] {
            let csi = CsiModel::new(rho).unwrap();
            let g = TransModel::new(&links, &pm, &pol, csi, 0.3, false).unwrap();
            let i = TransModel::new(&links, &pm, &pol, csi, 0.3, true).unwrap();
            for x in [0.5, 5.0, 50.0] {
                assert!((g.outage(x) - i.outage(x)).abs() < 1e-12);
            }
        }
        let (links, pm, pol) = setup(2, 0.01);
        assert!(TransModel::new(&links, &pm, &pol, CsiModel::new(0.5).unwrap(), 0.3, true).is_err());
    }

    #[test]
    fn e2e_cdf_matches_integral_definition() {
        let (links, pm, pol) = setup(3, 0.01);
        let model = TransModel::new(&links, &pm, &pol, CsiModel::new(0.6).unwrap(), 0.3, false).unwrap();
        let r = &model.relays[1];
        for x in [1.0, 30.0, 300.0] {
            let direct = quad::integrate_semi_infinite(
                |y| (1.0 - (-(x + r.gain_u * x / y) / r.hop1_mean).exp()) * r.hop2_pdf(y),
                0.0,
                1e-12,
            );
            assert!((r.e2e_cdf(x) - direct).abs() < 1e-8);
        }
        assert_eq!(trans_e2e_cdf(0.0, 1, &model).unwrap(), 0.0);
    }
}
