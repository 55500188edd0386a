//! Rayleigh-fading probability machinery: link geometry, Bernoulli primary
//! activity, activity-weighted hypoexponential sums and the maximum of
//! independent exponentials.

use crate::error::{Error, Result};

/// Relative gap below which two exponential means are treated as equal.
pub const DISTINCT_RTOL: f64 = 1e-9;

/// Largest index set enumerated by the subset expansions.
pub const MAX_SUBSET_SIZE: usize = 20;

/// Primary network: `count` transmitters of common power, each active
/// independently with probability `p_on`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimaryModel {
    pub count: usize,
    /// Transmit power in W.
    pub power: f64,
    pub p_on: f64,
}

impl PrimaryModel {
    pub fn new(count: usize, power: f64, p_on: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Model("at least one primary node is required".into()));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Model(format!("primary power must be positive, got {power}")));
        }
        if !(0.0..=1.0).contains(&p_on) {
            return Err(Error::Model(format!("activity probability {p_on} outside [0, 1]")));
        }
        Ok(Self { count, power, p_on })
    }
}

/// Probability that exactly `r` of the primary nodes are active.
pub fn active_count_pmf(r: usize, primary: &PrimaryModel) -> Result<f64> {
    let l = primary.count;
    if r > l {
        return Err(Error::Domain {
            func: "active_count_pmf",
            value: r as f64,
            reason: "more active nodes than primaries",
        });
    }
    Ok(binomial(l, r) * primary.p_on.powi(r as i32) * (1.0 - primary.p_on).powi((l - r) as i32))
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Node-to-node distances (normalized to 1 km) and the path-loss exponent.
///
/// Indexing: relays `i in 0..M`, primaries `l in 0..L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSet {
    pub alpha: f64,
    pub d_sr: Vec<f64>,
    pub d_rd: Vec<f64>,
    pub d_ps: Vec<f64>,
    /// `d_pr[l][i]`: primary `l` to relay `i`.
    pub d_pr: Vec<Vec<f64>>,
    pub d_pd: Vec<f64>,
}

/// Parameters of the distance ladders used by the numerical experiments:
/// each extra primary sits `primary_step` further away, each extra relay
/// `relay_step` further from both secondary end nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub alpha: f64,
    pub primaries: usize,
    pub relays: usize,
    pub d_p1_s: f64,
    pub d_p1_r: f64,
    pub d_p1_d: f64,
    pub primary_step: f64,
    pub d_sr1: f64,
    pub d_rd1: f64,
    pub relay_step: f64,
}

impl LinkSet {
    pub fn from_ladder(ladder: &Ladder) -> Result<Self> {
        let lp = |d1: f64| -> Vec<f64> {
            (0..ladder.primaries)
                .map(|l| d1 + ladder.primary_step * l as f64)
                .collect()
        };
        let lr = |d1: f64| -> Vec<f64> {
            (0..ladder.relays)
                .map(|i| d1 + ladder.relay_step * i as f64)
                .collect()
        };
        let d_pr_row = lp(ladder.d_p1_r);
        let links = Self {
            alpha: ladder.alpha,
            d_sr: lr(ladder.d_sr1),
            d_rd: lr(ladder.d_rd1),
            d_ps: lp(ladder.d_p1_s),
            d_pr: d_pr_row.iter().map(|&d| vec![d; ladder.relays]).collect(),
            d_pd: lp(ladder.d_p1_d),
        };
        links.validate()?;
        Ok(links)
    }

    pub fn relays(&self) -> usize {
        self.d_sr.len()
    }

    pub fn primaries(&self) -> usize {
        self.d_pd.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.relays();
        let l = self.primaries();
        if m == 0 || l == 0 {
            return Err(Error::Model("link set needs at least one relay and one primary".into()));
        }
        if self.d_rd.len() != m || self.d_ps.len() != l || self.d_pr.len() != l {
            return Err(Error::Model("inconsistent link-set dimensions".into()));
        }
        if self.d_pr.iter().any(|row| row.len() != m) {
            return Err(Error::Model("primary-to-relay distances must be L x M".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Model(format!("path-loss exponent {} must be positive", self.alpha)));
        }
        let all = self
            .d_sr
            .iter()
            .chain(&self.d_rd)
            .chain(&self.d_ps)
            .chain(&self.d_pd)
            .chain(self.d_pr.iter().flatten());
        for &d in all {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Model(format!("distance {d} must be positive")));
            }
        }
        Ok(())
    }

    /// Copy with the listed relays removed; the rest keep their order.
    pub fn without_relays(&self, excluded: &[usize]) -> Result<Self> {
        let keep: Vec<usize> = (0..self.relays()).filter(|i| !excluded.contains(i)).collect();
        if keep.is_empty() {
            return Err(Error::Model("every relay is excluded".into()));
        }
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        Ok(Self {
            alpha: self.alpha,
            d_sr: pick(&self.d_sr),
            d_rd: pick(&self.d_rd),
            d_ps: self.d_ps.clone(),
            d_pr: self.d_pr.iter().map(|row| pick(row)).collect(),
            d_pd: self.d_pd.clone(),
        })
    }

    /// Whether the exponent lies in the usual free-space to dense-urban range.
    pub fn alpha_is_typical(&self) -> bool {
        (2.0..=6.0).contains(&self.alpha)
    }

    /// Mean channel gain `d^-alpha`.
    pub fn gbar(&self, d: f64) -> f64 {
        d.powf(-self.alpha)
    }

    pub fn gain_sr(&self, i: usize) -> f64 {
        self.gbar(self.d_sr[i])
    }

    pub fn gain_rd(&self, i: usize) -> f64 {
        self.gbar(self.d_rd[i])
    }

    /// Gains from every primary to relay `i` (also used for relay-to-primary
    /// interference, the links being reciprocal).
    pub fn gains_pr(&self, i: usize) -> Vec<f64> {
        self.d_pr.iter().map(|row| self.gbar(row[i])).collect()
    }

    pub fn gains_pd(&self) -> Vec<f64> {
        self.d_pd.iter().map(|&d| self.gbar(d)).collect()
    }

    pub fn gains_ps(&self) -> Vec<f64> {
        self.d_ps.iter().map(|&d| self.gbar(d)).collect()
    }
}

/// One signed exponential component `weight * exp(-x / mean)` of a survival
/// function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub weight: f64,
    pub mean: f64,
}

/// Law of a nonnegative SNR given by a point mass at zero plus a signed sum of
/// exponential survival terms:
///
/// ```text
/// Pr[X > x] = sum_k w_k exp(-x / m_k),   x >= 0,   Pr[X = 0] = atom
/// ```
///
/// Hypoexponential sums, their activity-weighted mixtures and plain
/// exponentials all take this form, which keeps every integral against it in
/// closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpMixture {
    atom: f64,
    terms: Vec<ExpTerm>,
}

fn check_distinct(means: &[f64]) -> Result<()> {
    for (a_idx, &a) in means.iter().enumerate() {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Model(format!("exponential mean {a} must be positive")));
        }
        for &b in &means[a_idx + 1..] {
            if (a - b).abs() <= DISTINCT_RTOL * a.abs().max(b.abs()) {
                return Err(Error::NotDistinct { a, b });
            }
        }
    }
    Ok(())
}

fn check_subset_size(what: &'static str, n: usize) -> Result<()> {
    if n > MAX_SUBSET_SIZE {
        Err(Error::TooMany {
            what,
            count: n,
            limit: MAX_SUBSET_SIZE,
        })
    } else {
        Ok(())
    }
}

/// Partial-fraction coefficient of member `k` of the set `idx`:
/// `prod_{j != k} m_k / (m_k - m_j)`.
fn partial_fraction(means: &[f64], idx: &[usize], k: usize) -> f64 {
    idx.iter()
        .filter(|&&j| j != k)
        .map(|&j| means[k] / (means[k] - means[j]))
        .product()
}

impl ExpMixture {
    pub fn exponential(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::Model(format!("exponential mean {mean} must be positive")));
        }
        Ok(Self {
            atom: 0.0,
            terms: vec![ExpTerm { weight: 1.0, mean }],
        })
    }

    /// Sum of independent exponentials with pairwise distinct means.
    pub fn hypoexponential(means: &[f64]) -> Result<Self> {
        Self::activity_mixture(means, 1.0)
    }

    /// Sum `sum_j theta_j X_j` with `X_j ~ Exp(mean_j)` and independent
    /// `theta_j ~ Bernoulli(p_on)`.
    ///
    /// Conditioned on the active set `S` the sum is hypoexponential over `S`;
    /// the active sets are enumerated and weighted by `p_on^|S| (1-p_on)^(L-|S|)`,
    /// so grouping by `|S| = r` reproduces the binomial weights `f_r`. The
    /// empty set leaves an atom of mass `(1 - p_on)^L` at zero.
    pub fn activity_mixture(means: &[f64], p_on: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::Model("empty list of exponential means".into()));
        }
        if !(0.0..=1.0).contains(&p_on) {
            return Err(Error::Model(format!("activity probability {p_on} outside [0, 1]")));
        }
        check_subset_size("activity mixture", means.len())?;
        check_distinct(means)?;
        let l = means.len();
        let mut weights = vec![0.0; l];
        let mut idx = Vec::with_capacity(l);
        for mask in 1u32..(1u32 << l) {
            idx.clear();
            idx.extend((0..l).filter(|&j| mask & (1 << j) != 0));
            let r = idx.len();
            let w = p_on.powi(r as i32) * (1.0 - p_on).powi((l - r) as i32);
            if w == 0.0 {
                continue;
            }
            for &k in &idx {
                weights[k] += w * partial_fraction(means, &idx, k);
            }
        }
        let terms = weights
            .into_iter()
            .zip(means)
            .map(|(weight, &mean)| ExpTerm { weight, mean })
            .filter(|t| t.weight != 0.0)
            .collect();
        Ok(Self {
            atom: (1.0 - p_on).powi(l as i32),
            terms,
        })
    }

    /// Probability mass at zero.
    pub fn atom(&self) -> f64 {
        self.atom
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        self.terms
            .iter()
            .map(|t| t.weight * (-x / t.mean).exp())
            .sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return self.atom;
        }
        (1.0 - self.survival(x)).clamp(0.0, 1.0)
    }

    /// Density of the continuous part (the atom is excluded).
    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| t.weight / t.mean * (-x / t.mean).exp())
            .sum::<f64>()
            .max(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.terms.iter().map(|t| t.weight * t.mean).sum()
    }

    /// `E[1 / (X + 1)]`, the atom contributing with value one.
    pub fn inv_shift_mean(&self) -> f64 {
        self.atom + self.inv_shift_tail(0.0)
    }

    /// `E[1 / (X + 1); X > t]` for `t >= 0`; for `t < 0` the atom is included.
    pub fn inv_shift_tail(&self, t: f64) -> f64 {
        let atom = if t < 0.0 { self.atom } else { 0.0 };
        let t = t.max(0.0);
        // (1/m) e^{1/m} E1((t+1)/m) = c e^{-c t} [e^{c(t+1)} E1(c(t+1))], c = 1/m
        let cont: f64 = self
            .terms
            .iter()
            .map(|term| {
                let c = 1.0 / term.mean;
                term.weight * c * (-c * t).exp() * crate::specfun::e1e(c * (t + 1.0))
            })
            .sum();
        atom + cont
    }

    /// CDF of the fixed-gain dual-hop SNR `X Y / (Y + u)` with this law for
    /// the first hop and an independent exponential second hop of mean
    /// `hop2_mean`:
    ///
    /// ```text
    /// F(x) = 1 - sum_k w_k exp(-x/m_k) z_k K1(z_k),  z_k = 2 sqrt(u x / (m_k hop2_mean))
    /// ```
    pub fn fixed_gain_e2e_cdf(&self, x: f64, gain_u: f64, hop2_mean: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return self.atom;
        }
        let s: f64 = self
            .terms
            .iter()
            .map(|t| t.weight * dual_hop_survival_factor(x, t.mean, gain_u, hop2_mean))
            .sum();
        (1.0 - s).clamp(0.0, 1.0)
    }
}

/// `exp(-x/m1) z K1(z)` with `z = 2 sqrt(u x / (m1 m2))`; the survival of a
/// fixed-gain dual hop with exponential hops of means `m1` and `m2`.
pub(crate) fn dual_hop_survival_factor(x: f64, m1: f64, gain_u: f64, m2: f64) -> f64 {
    let z = 2.0 * (gain_u * x / (m1 * m2)).sqrt();
    if z == 0.0 {
        return (-x / m1).exp();
    }
    (-x / m1 - z).exp() * z * crate::specfun::k1e(z)
}

/// Density of the activity-weighted sum with means `scale * gains`.
pub fn hypoexp_pdf(x: f64, gains: &[f64], scale: f64, p_on: f64) -> Result<f64> {
    let means: Vec<f64> = gains.iter().map(|g| scale * g).collect();
    Ok(ExpMixture::activity_mixture(&means, p_on)?.pdf(x))
}

/// CDF of the activity-weighted sum with means `scale * gains` (includes the
/// atom at zero).
pub fn hypoexp_cdf(x: f64, gains: &[f64], scale: f64, p_on: f64) -> Result<f64> {
    let means: Vec<f64> = gains.iter().map(|g| scale * g).collect();
    Ok(ExpMixture::activity_mixture(&means, p_on)?.cdf(x))
}

fn check_max_means(means: &[f64]) -> Result<()> {
    if means.is_empty() {
        return Err(Error::Domain {
            func: "max_exp",
            value: 0.0,
            reason: "empty list of means",
        });
    }
    check_subset_size("max of exponentials", means.len())?;
    if let Some(&m) = means.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(Error::Model(format!("exponential mean {m} must be positive")));
    }
    Ok(())
}

/// Visit every nonempty subset with its sign `(-1)^{|S|+1}` and rate
/// `sum_{t in S} 1 / m_t`.
fn for_each_subset_rate(means: &[f64], mut f: impl FnMut(f64, f64)) {
    let n = means.len();
    for mask in 1u32..(1u32 << n) {
        let rate: f64 = (0..n)
            .filter(|&j| mask & (1 << j) != 0)
            .map(|j| 1.0 / means[j])
            .sum();
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        f(sign, rate);
    }
}

/// `E[max_j X_j]` for independent `X_j ~ Exp(mean_j)` by inclusion–exclusion.
pub fn max_exp_expectation(means: &[f64]) -> Result<f64> {
    check_max_means(means)?;
    let mut acc = 0.0;
    for_each_subset_rate(means, |sign, rate| acc += sign / rate);
    Ok(acc)
}

pub fn max_exp_pdf(x: f64, means: &[f64]) -> Result<f64> {
    check_max_means(means)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for_each_subset_rate(means, |sign, rate| acc += sign * rate * (-rate * x).exp());
    Ok(acc.max(0.0))
}

pub fn max_exp_cdf(x: f64, means: &[f64]) -> Result<f64> {
    check_max_means(means)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    Ok(means.iter().map(|m| 1.0 - (-x / m).exp()).product())
}
