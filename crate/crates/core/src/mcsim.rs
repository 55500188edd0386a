//! Monte Carlo oracle for the closed forms.
//!
//! Trials are split into fixed blocks; block `b` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, accumulates its own
//! moments, and blocks are merged in index order. The estimate therefore does
//! not depend on how many worker threads ran the blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::energy::{EnergyInputs, FrameTiming};
use crate::error::{Error, Result};
use crate::fading::{max_exp_expectation, LinkSet, PrimaryModel};
use crate::sensing::{harmonic_power, SecondaryPolicy};
use crate::transmission::{exponential_fixed_gain, trans_powers, CsiModel};

pub const BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl MCEstimate {
    /// Standardized distance of `analytic` from this estimate. A Bernoulli
    /// estimate with zero spread uses the analytic variance instead, so an
    /// all-zero sample can still be compared with a tiny probability.
    pub fn z_score(&self, analytic: f64, bernoulli: bool) -> f64 {
        let mut se = self.stderr;
        if bernoulli {
            let a = analytic.clamp(0.0, 1.0);
            se = se.max((a * (1.0 - a) / self.trials as f64).sqrt());
        }
        // Resolution floor for constant samples accumulated in floating point.
        se = se.max(64.0 * f64::EPSILON * self.mean.abs());
        let diff = analytic - self.mean;
        if diff == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY
        } else {
            diff / se
        }
    }

    /// Whether `analytic` lies within `k` standard errors.
    pub fn agrees(&self, analytic: f64, k: f64, bernoulli: bool) -> bool {
        self.z_score(analytic, bernoulli).abs() <= k
    }
}

/// Running mean and co-moment matrix of a vector-valued trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: Vec<f64>,
    /// Row-major `dim x dim` sums of centered products.
    pub comoment: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            comoment: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn push(&mut self, x: &[f64], scratch: &mut [f64]) {
        let d = self.dim();
        self.n += 1;
        let n = self.n as f64;
        for k in 0..d {
            scratch[k] = x[k] - self.mean[k];
            self.mean[k] += scratch[k] / n;
        }
        for a in 0..d {
            let after = x[a] - self.mean[a];
            for b in 0..d {
                self.comoment[a * d + b] += after * scratch[b];
            }
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let d = self.dim();
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta: Vec<f64> = (0..d).map(|k| other.mean[k] - self.mean[k]).collect();
        for a in 0..d {
            for b in 0..d {
                self.comoment[a * d + b] += other.comoment[a * d + b] + delta[a] * delta[b] * na * nb / n;
            }
        }
        for k in 0..d {
            self.mean[k] += delta[k] * nb / n;
        }
        self.n += other.n;
    }

    pub fn variance(&self, k: usize) -> f64 {
        self.covariance(k, k)
    }

    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.comoment[a * self.dim() + b] / (self.n - 1) as f64
    }

    pub fn estimate(&self, k: usize, seed: u64) -> MCEstimate {
        MCEstimate {
            mean: self.mean[k],
            stderr: (self.variance(k) / self.n as f64).sqrt(),
            trials: self.n,
            seed,
        }
    }

    /// Ratio `mean[a] / mean[b]` with a delta-method standard error.
    pub fn ratio(&self, a: usize, b: usize, seed: u64) -> MCEstimate {
        let (ma, mb) = (self.mean[a], self.mean[b]);
        let r = ma / mb;
        let var = (self.variance(a) - 2.0 * r * self.covariance(a, b) + r * r * self.variance(b))
            / (mb * mb * self.n as f64);
        MCEstimate {
            mean: r,
            stderr: var.max(0.0).sqrt(),
            trials: self.n,
            seed,
        }
    }
}

/// Run `trials` independent trials, each writing a `dim`-vector.
pub fn run_trials<F>(trials: u64, seed: u64, dim: usize, trial: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let blocks = trials.div_ceil(BLOCK);
    let parts: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK.min(trials - b * BLOCK);
            let mut m = Moments::new(dim);
            let mut out = vec![0.0; dim];
            let mut scratch = vec![0.0; dim];
            for _ in 0..count {
                out.iter_mut().for_each(|v| *v = 0.0);
                trial(&mut rng, &mut out);
                m.push(&out, &mut scratch);
            }
            m
        })
        .collect();
    let mut total = Moments::new(dim);
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Seed for the `k`-th of several estimates sharing one base seed.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain {
            func: "monte carlo",
            value: 0.0,
            reason: "at least one trial is required",
        });
    }
    Ok(())
}

pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

/// Circularly symmetric complex Gaussian with `E|g|^2 = var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> (f64, f64) {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (s * re, s * im)
}

/// Unit-variance channel `h` and its aged estimate
/// `h^ = rho h + sqrt(1 - rho^2) w`; returns `(|h|^2, |h^|^2)`.
pub fn outdated_pair<R: Rng + ?Sized>(rng: &mut R, rho: f64) -> (f64, f64) {
    let h = complex_gaussian(rng, 1.0);
    let w = complex_gaussian(rng, 1.0);
    let c = (1.0 - rho * rho).max(0.0).sqrt();
    let e = (rho * h.0 + c * w.0, rho * h.1 + c * w.1);
    (h.0 * h.0 + h.1 * h.1, e.0 * e.0 + e.1 * e.1)
}

/// `sum_j theta_j m_j X_j` with `theta_j ~ Bernoulli(p_on)`, `X_j ~ Exp(1)`.
pub fn activity_sum<R: Rng + ?Sized>(rng: &mut R, means: &[f64], p_on: f64) -> f64 {
    let mut s = 0.0;
    for &m in means {
        if rng.random_bool(p_on) {
            s += m * exp1(rng);
        }
    }
    s
}

pub fn max_of_exponentials<R: Rng + ?Sized>(rng: &mut R, means: &[f64]) -> f64 {
    means.iter().map(|&m| m * exp1(rng)).fold(0.0, f64::max)
}

/// Fixed-gain dual-hop SNR.
pub fn dual_hop(g1: f64, g2: f64, gain_u: f64) -> f64 {
    if g1 == 0.0 {
        return 0.0;
    }
    g1 * g2 / (g2 + gain_u)
}

/// One reporting path as seen by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRelay {
    pub hop1_means: Vec<f64>,
    pub gain_u: f64,
    pub hop2_mean: f64,
}

/// Sensing-phase parameters for the simulator, derived from the geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingSetup {
    pub relays: Vec<SimRelay>,
    pub direct_means: Vec<f64>,
    pub p_on: f64,
}

impl SensingSetup {
    pub fn new(links: &LinkSet, primary: &PrimaryModel, policy: &SecondaryPolicy) -> Result<Self> {
        links.validate()?;
        let snr = |d: f64| primary.power * links.gbar(d) / policy.n0;
        let relays = (0..links.relays())
            .map(|i| {
                let eq = max_exp_expectation(&links.gains_pr(i))?;
                let power = harmonic_power(policy.p_max, policy.q, eq);
                Ok(SimRelay {
                    hop1_means: links.d_pr.iter().map(|row| snr(row[i])).collect(),
                    gain_u: crate::sensing::fixed_gain_report(i, links, primary, policy)?,
                    hop2_mean: power * links.gbar(links.d_rd[i]) / policy.n0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            relays,
            direct_means: links.d_pd.iter().map(|&d| snr(d)).collect(),
            p_on: primary.p_on,
        })
    }

    /// One sensing sample: does any path exceed `lambda`?
    pub fn sample_detects<R: Rng + ?Sized>(&self, rng: &mut R, lambda: f64) -> bool {
        if activity_sum(rng, &self.direct_means, self.p_on) > lambda {
            return true;
        }
        for r in &self.relays {
            let g1 = activity_sum(rng, &r.hop1_means, self.p_on);
            // the relayed SNR never exceeds the first hop
            if g1 <= lambda {
                continue;
            }
            let g2 = r.hop2_mean * exp1(rng);
            if dual_hop(g1, g2, r.gain_u) > lambda {
                return true;
            }
        }
        false
    }

    /// Detection over `u` independent samples.
    pub fn frame_detects<R: Rng + ?Sized>(&self, rng: &mut R, lambda: f64, u: u64) -> bool {
        (0..u).any(|_| self.sample_detects(rng, lambda))
    }
}

/// Empirical detection probability over `u` samples per frame.
pub fn mc_detection(
    setup: &SensingSetup,
    lambda_snr: f64,
    u: u64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_trials(trials)?;
    let m = run_trials(trials, seed, 1, |rng, out| {
        out[0] = setup.frame_detects(rng, lambda_snr, u) as u8 as f64;
    });
    Ok(m.estimate(0, seed))
}

/// Empirical `Pr[gamma_e2e <= x]` of reporting path `i`.
pub fn mc_report_e2e_cdf(
    setup: &SensingSetup,
    i: usize,
    x: f64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_trials(trials)?;
    let r = setup.relays.get(i).ok_or(Error::Domain {
        func: "mc_report_e2e_cdf",
        value: i as f64,
        reason: "no such relay",
    })?;
    let m = run_trials(trials, seed, 1, |rng, out| {
        let g1 = activity_sum(rng, &r.hop1_means, setup.p_on);
        let g2 = r.hop2_mean * exp1(rng);
        out[0] = (dual_hop(g1, g2, r.gain_u) <= x) as u8 as f64;
    });
    Ok(m.estimate(0, seed))
}

/// Transmission-phase parameters for the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct TransSetup {
    pub hop1_means: Vec<f64>,
    pub gain_u: Vec<f64>,
    pub hop2_means: Vec<f64>,
    pub rho: f64,
}

impl TransSetup {
    pub fn new(
        links: &LinkSet,
        primary: &PrimaryModel,
        policy: &SecondaryPolicy,
        csi: CsiModel,
        p_d: f64,
    ) -> Result<Self> {
        let powers = trans_powers(links, primary, policy, p_d)?;
        let hop1_means: Vec<f64> = links
            .d_sr
            .iter()
            .map(|&d| powers.p_sr * links.gbar(d) / policy.n0)
            .collect();
        Ok(Self {
            gain_u: hop1_means.iter().map(|&m| exponential_fixed_gain(m)).collect(),
            hop2_means: links
                .d_rd
                .iter()
                .zip(&powers.p_rd)
                .map(|(&d, &p)| p * links.gbar(d) / policy.n0)
                .collect(),
            hop1_means,
            rho: csi.rho,
        })
    }

    /// Index of the relay picked on aged CSI and the true second-hop SNR.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY, 0.0);
        for (j, &m) in self.hop2_means.iter().enumerate() {
            let (h, est) = outdated_pair(rng, self.rho);
            if m * est > best.1 {
                best = (j, m * est, m * h);
            }
        }
        (best.0, best.2)
    }

    /// Selected relay and its end-to-end SNR.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let (s, g2) = self.select(rng);
        let g1 = self.hop1_means[s] * exp1(rng);
        (s, dual_hop(g1, g2, self.gain_u[s]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageEstimate {
    pub outage: MCEstimate,
    pub selection: Vec<MCEstimate>,
}

/// Empirical outage probability and selection frequencies.
pub fn mc_outage(setup: &TransSetup, gamma_th: f64, trials: u64, seed: u64) -> Result<OutageEstimate> {
    check_trials(trials)?;
    let m_relays = setup.hop2_means.len();
    let m = run_trials(trials, seed, 1 + m_relays, |rng, out| {
        let (s, g) = setup.sample(rng);
        out[0] = (g <= gamma_th) as u8 as f64;
        out[1 + s] = 1.0;
    });
    Ok(OutageEstimate {
        outage: m.estimate(0, seed),
        selection: (0..m_relays).map(|k| m.estimate(1 + k, seed)).collect(),
    })
}

/// Empirical mean of `eta p_d p_p sum_j theta_j gbar_j |g_j|^2` with
/// `|g_j|^2` of mean `gbar_j`.
pub fn mc_harvest(
    gains: &[f64],
    primary: &PrimaryModel,
    eta: f64,
    p_d: f64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_trials(trials)?;
    let m = run_trials(trials, seed, 1, |rng, out| {
        out[0] = eta * p_d * primary.power * harvest_draw(rng, gains, primary.p_on);
    });
    Ok(m.estimate(0, seed))
}

fn harvest_draw<R: Rng + ?Sized>(rng: &mut R, gains: &[f64], p_on: f64) -> f64 {
    let mut s = 0.0;
    for &g in gains {
        if rng.random_bool(p_on) {
            let (re, im) = complex_gaussian(rng, g);
            s += g * (re * re + im * im);
        }
    }
    s
}

/// Empirical average of the clipped squared gain, normalized by `N0`:
/// `1/u` below the SNR threshold and `1/(gamma + 1)` above it.
pub fn mc_clipped_gain(
    hop1_means: &[f64],
    p_on: f64,
    gain_u: f64,
    threshold: f64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_trials(trials)?;
    let m = run_trials(trials, seed, 1, |rng, out| {
        let g = activity_sum(rng, hop1_means, p_on);
        out[0] = if g <= threshold { 1.0 / gain_u } else { 1.0 / (g + 1.0) };
    });
    Ok(m.estimate(0, seed))
}

/// Frame-level simulator of one relay's energy budget.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSetup {
    pub relay: usize,
    /// Index of `relay` among the relays competing for selection.
    pub selected_as: usize,
    pub sensing: SensingSetup,
    pub trans: TransSetup,
    pub lambda_snr: f64,
    pub harvest_gains: Vec<f64>,
    pub p_p: f64,
    pub eta: f64,
    pub e_s: f64,
    pub e_r: f64,
    pub e_t: f64,
    pub bandwidth: f64,
    pub t_r: f64,
    pub t: f64,
}

impl FrameSetup {
    /// Built with the same powers as the analytic model at `inp.timing`.
    pub fn new(relay: usize, inp: &EnergyInputs) -> Result<Self> {
        let sensing = SensingSetup::new(inp.links, inp.primary, inp.policy)?;
        let model = crate::energy::EnergyModel::new(relay, inp)?;
        let p_d = model.detection_probability(inp.timing.t_s);
        let (competing, selected_as) = inp.selection_set(relay)?;
        Ok(Self {
            relay,
            selected_as,
            sensing,
            trans: TransSetup::new(&competing, inp.primary, inp.policy, inp.csi, p_d)?,
            lambda_snr: inp.policy.lambda_snr(),
            harvest_gains: inp.links.gains_pr(relay),
            p_p: inp.primary.power,
            eta: inp.policy.eta,
            e_s: model.e_s,
            e_r: model.e_r,
            e_t: model.e_t,
            bandwidth: model.bandwidth,
            t_r: model.t_r,
            t: model.t,
        })
    }

    /// Consumed and harvested energy of one simulated frame.
    fn frame<R: Rng + ?Sized>(&self, rng: &mut R, t_s: f64, u: u64) -> (f64, f64) {
        let w = self.bandwidth;
        let t_d = self.t - t_s;
        let mut consumed = self.e_s * t_s * t_s * w + self.e_r * self.t_r * t_s * w;
        let mut harvested = 0.0;
        if self.sensing.frame_detects(rng, self.lambda_snr, u) {
            let p = harvest_draw(rng, &self.harvest_gains, self.sensing.p_on);
            harvested = self.eta * self.p_p * p * t_d;
        } else if self.trans.select(rng).0 == self.selected_as {
            consumed += self.e_t * t_d;
        }
        (consumed, harvested)
    }

    /// ECG-style split: consumed energy with sensing counted as `e_s T_S`.
    fn ecg_frame<R: Rng + ?Sized>(&self, rng: &mut R, t_s: f64, u: u64) -> (f64, f64) {
        let w = self.bandwidth;
        let t_d = self.t - t_s;
        let mut consumed = self.e_s * t_s + self.e_r * self.t_r * t_s * w;
        let mut harvested = 0.0;
        if self.sensing.frame_detects(rng, self.lambda_snr, u) {
            let p = harvest_draw(rng, &self.harvest_gains, self.sensing.p_on);
            harvested = self.eta * self.p_p * p * t_d;
        } else if self.trans.select(rng).0 == self.selected_as {
            consumed += self.e_t * t_d;
        }
        (consumed, harvested)
    }
}

fn frame_samples(setup: &FrameSetup, t_s: f64) -> Result<u64> {
    if !(t_s > 0.0 && t_s < setup.t) {
        return Err(Error::Domain {
            func: "mc_frame_energy",
            value: t_s,
            reason: "sensing time outside (0, T)",
        });
    }
    Ok(FrameTiming {
        t_total: setup.t + setup.t_r,
        t_r: setup.t_r,
        t_s,
    }
    .samples_rounded(setup.bandwidth))
}

/// Empirical mean frame energy; `harvesting = false` discards the harvest.
pub fn mc_frame_energy(
    setup: &FrameSetup,
    t_s: f64,
    harvesting: bool,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_trials(trials)?;
    let u = frame_samples(setup, t_s)?;
    let m = run_trials(trials, seed, 1, |rng, out| {
        let (c, h) = setup.frame(rng, t_s, u);
        out[0] = if harvesting { c - h } else { c };
    });
    Ok(m.estimate(0, seed))
}

/// Ratio of mean consumed to mean harvested energy per frame.
pub fn mc_ecg(setup: &FrameSetup, t_s: f64, trials: u64, seed: u64) -> Result<MCEstimate> {
    check_trials(trials)?;
    let u = frame_samples(setup, t_s)?;
    let m = run_trials(trials, seed, 2, |rng, out| {
        let (c, h) = setup.ecg_frame(rng, t_s, u);
        out[0] = c;
        out[1] = h;
    });
    Ok(m.ratio(0, 1, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_single_pass() {
        let data: Vec<[f64; 2]> = (0..100)
            .map(|k| [(k as f64).sin(), (k as f64 * 0.3).cos()])
            .collect();
        let mut s = vec![0.0; 2];
        let mut all = Moments::new(2);
        data.iter().for_each(|x| all.push(x, &mut s));
        let mut a = Moments::new(2);
        let mut b = Moments::new(2);
        data[..37].iter().for_each(|x| a.push(x, &mut s));
        data[37..].iter().for_each(|x| b.push(x, &mut s));
        a.merge(&b);
        for k in 0..4 {
            assert!((a.comoment[k] - all.comoment[k]).abs() < 1e-12);
        }
        assert!((a.mean[0] - all.mean[0]).abs() < 1e-14);
    }

    #[test]
    fn determinism_across_pools() {
        let run = || {
            run_trials(20_000, 7, 1, |rng, out| out[0] = exp1(rng))
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
        assert_eq!(one, four);
    }

    #[test]
    fn outdated_pair_correlation() {
        let rho: f64 = 0.8;
        let m = run_trials(400_000, 3, 2, |rng, out| {
            let (h, e) = outdated_pair(rng, rho);
            out[0] = h;
            out[1] = e;
        });
        // for correlated exponentials, corr(|h|^2, |h^|^2) = rho^2
        let corr = m.covariance(0, 1) / (m.variance(0) * m.variance(1)).sqrt();
        assert!((corr - rho * rho).abs() < 0.01, "{corr}");
        assert!((m.mean[0] - 1.0).abs() < 0.01);
        assert!((m.mean[1] - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_trials_rejected() {
        let pm = PrimaryModel::new(1, 1.0, 0.5).unwrap();
        assert!(mc_harvest(&[1.0], &pm, 0.5, 1.0, 0, 1).is_err());
    }
}
