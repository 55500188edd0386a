//! Energy collected by the relays during the harvesting slot.

use crate::error::{Error, Result};
use crate::fading::{ExpMixture, LinkSet, PrimaryModel};
use crate::sensing::SecondaryPolicy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestReport {
    /// Average harvested power given a detection, in W.
    pub e_tilde: f64,
    /// Unconditional average, `p_d * e_tilde`.
    pub e_bar: f64,
}

/// Mean of `eta * p_p * sum_j theta_j gbar_j |g_j|^2` for the given mean gains.
///
/// The received power is itself weighted by the mean gain, so each primary
/// contributes `gbar_j^2` on average.
pub fn conditional_harvest(gains: &[f64], primary: &PrimaryModel, eta: f64) -> Result<f64> {
    let sq: Vec<f64> = gains.iter().map(|g| g * g).collect();
    let mix = ExpMixture::activity_mixture(&sq, primary.p_on)?;
    Ok(eta * primary.power * mix.mean())
}

fn check_pd(p_d: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::Domain {
            func: "avg_harvested_power",
            value: p_d,
            reason: "detection probability outside [0, 1]",
        });
    }
    Ok(())
}

/// Harvested power of relay `i`.
pub fn avg_harvested_power(
    i: usize,
    links: &LinkSet,
    primary: &PrimaryModel,
    policy: &SecondaryPolicy,
    p_d: f64,
) -> Result<HarvestReport> {
    check_pd(p_d)?;
    if i >= links.relays() {
        return Err(Error::Domain {
            func: "avg_harvested_power",
            value: i as f64,
            reason: "no such relay",
        });
    }
    let e_tilde = conditional_harvest(&links.gains_pr(i), primary, policy.eta)?;
    Ok(HarvestReport {
        e_tilde,
        e_bar: p_d * e_tilde,
    })
}

/// Harvested power of the secondary source.
pub fn avg_harvested_power_source(
    links: &LinkSet,
    primary: &PrimaryModel,
    policy: &SecondaryPolicy,
    p_d: f64,
) -> Result<HarvestReport> {
    check_pd(p_d)?;
    let e_tilde = conditional_harvest(&links.gains_ps(), primary, policy.eta)?;
    Ok(HarvestReport {
        e_tilde,
        e_bar: p_d * e_tilde,
    })
}
