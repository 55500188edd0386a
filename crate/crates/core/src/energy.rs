//! Per-frame energy budget of a relay and the sensing-time optimizer.
//!
//! With `U = T_S W` samples and per-sample miss probability `delta`, the
//! average energy of relay `i` over one frame is
//!
//! ```text
//! E(T_S) = e_s T_S^2 W + e_r T_R T_S W
//!        + (delta^U Pr_i e_t - E_h (1 - delta^U)) (T - T_S)
//! ```
//!
//! and the expected delivered data is `delta^U Pr_i R (T - T_S)`. Both the
//! objective and the transformed data constraint are convex in `T_S`.

use crate::error::{Error, Result};
use crate::fading::{LinkSet, PrimaryModel};
use crate::harvest::avg_harvested_power;
use crate::sensing::{report_power, SecondaryPolicy, SensingModel};
use crate::transmission::{CsiModel, TransModel};

/// Frame durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTiming {
    pub t_total: f64,
    pub t_r: f64,
    pub t_s: f64,
}

impl FrameTiming {
    pub fn new(t_total: f64, t_r: f64, t_s: f64) -> Result<Self> {
        let t = Self { t_total, t_r, t_s };
        if !(t_r > 0.0 && t_total > t_r) {
            return Err(Error::Model(format!(
                "reporting time {t_r} must be positive and shorter than the frame {t_total}"
            )));
        }
        if !(t_s > 0.0 && t_s < t.remaining()) {
            return Err(Error::Model(format!(
                "sensing time {t_s} outside (0, {})",
                t.remaining()
            )));
        }
        Ok(t)
    }

    /// `T = T_total - T_R`.
    pub fn remaining(&self) -> f64 {
        self.t_total - self.t_r
    }

    /// Data/harvest slot `T_D = T - T_S`.
    pub fn t_d(&self) -> f64 {
        self.remaining() - self.t_s
    }

    /// Continuous time-bandwidth product.
    pub fn samples(&self, bandwidth: f64) -> f64 {
        self.t_s * bandwidth
    }

    /// Sample count used by the simulator.
    pub fn samples_rounded(&self, bandwidth: f64) -> u64 {
        (self.t_s * bandwidth).round().max(1.0) as u64
    }
}

/// Constants of the energy budget of one relay, frozen at a nominal timing.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    /// Sensing power `P_Rx`.
    pub e_s: f64,
    /// Reporting power plus `P_Tx`.
    pub e_r: f64,
    /// Transmit power plus `P_Tx`.
    pub e_t: f64,
    pub selection: f64,
    /// Harvested power given detection.
    pub e_h: f64,
    /// Per-sample miss probability.
    pub delta: f64,
    pub bandwidth: f64,
    pub t_r: f64,
    /// `T = T_total - T_R`.
    pub t: f64,
    /// Transmission rate in bit/s.
    pub rate: f64,
}

/// Everything needed to build an [`EnergyModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyInputs<'a> {
    pub links: &'a LinkSet,
    pub primary: &'a PrimaryModel,
    pub policy: &'a SecondaryPolicy,
    pub csi: CsiModel,
    pub timing: FrameTiming,
    pub rate: f64,
    pub iid: bool,
    /// Relays barred from selection; they still sense and report.
    pub exclude: &'a [usize],
}

impl EnergyInputs<'_> {
    /// Links competing for selection and the position of `relay` among them.
    pub fn selection_set(&self, relay: usize) -> Result<(LinkSet, usize)> {
        if relay >= self.links.relays() {
            return Err(Error::Domain {
                func: "EnergyModel::new",
                value: relay as f64,
                reason: "no such relay",
            });
        }
        if self.exclude.contains(&relay) {
            return Err(Error::Model(format!("relay {relay} is excluded from selection")));
        }
        let links = self.links.without_relays(self.exclude)?;
        let index = relay - self.exclude.iter().filter(|&&j| j < relay).count();
        Ok((links, index))
    }
}

/// Optimizer outcome classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activity {
    /// Stationary point strictly inside the feasible interval.
    Interior,
    /// Pinned at the minimum of one sample.
    LowerBound,
    /// Pinned at the largest sensing time meeting the data target.
    ConstraintActive,
    /// Pinned at the end of the frame (no data target).
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub t_s: f64,
    pub e_min: f64,
    pub activity: Activity,
    /// `f'/g'` at the optimum when the constraint binds, zero otherwise.
    pub mu: f64,
    /// Multiplier of `f + mu g`: `max(0, -f'/g')` when the constraint binds.
    pub mu_kkt: f64,
    pub constraint: f64,
    pub gradient: f64,
    pub necessary: bool,
    /// Feasible interval searched.
    pub lower: f64,
    pub upper: f64,
}

const TS_TOL: f64 = 1e-10;

/// Slack on the log form of the necessary condition, which holds with
/// equality at an interior optimum.
pub const NECESSARY_LOG_TOL: f64 = 1e-9;

impl EnergyModel {
    pub fn new(relay: usize, inp: &EnergyInputs) -> Result<Self> {
        let policy = inp.policy;
        let sensing = SensingModel::new(inp.links, inp.primary, policy)?;
        let delta = sensing.delta(policy.lambda_snr());
        let u = inp.timing.samples(policy.bandwidth);
        let p_d = 1.0 - delta.powf(u);
        let (competing, index) = inp.selection_set(relay)?;
        let trans = TransModel::new(&competing, inp.primary, policy, inp.csi, p_d, inp.iid)?;
        let law = &trans.relays[index];
        let harvest = avg_harvested_power(relay, inp.links, inp.primary, policy, p_d)?;
        if !(inp.rate >= 0.0) {
            return Err(Error::Model(format!("rate {} must be nonnegative", inp.rate)));
        }
        Ok(Self {
            e_s: policy.p_rx,
            e_r: report_power(relay, inp.links, inp.primary, policy)? + policy.p_tx,
            e_t: trans.powers.p_rd[index] + policy.p_tx,
            selection: law.selection,
            e_h: harvest.e_tilde,
            delta,
            bandwidth: policy.bandwidth,
            t_r: inp.timing.t_r,
            t: inp.timing.remaining(),
            rate: inp.rate,
        })
    }

    fn check_ts(&self, func: &'static str, t_s: f64) -> Result<()> {
        if !(t_s > 0.0 && t_s < self.t) {
            return Err(Error::Domain {
                func,
                value: t_s,
                reason: "sensing time outside (0, T)",
            });
        }
        Ok(())
    }

    /// `delta^(T_S W)`.
    pub fn miss(&self, t_s: f64) -> f64 {
        let u = t_s * self.bandwidth;
        if self.delta == 0.0 {
            return if u > 0.0 { 0.0 } else { 1.0 };
        }
        (u * self.delta.ln()).exp()
    }

    pub fn detection_probability(&self, t_s: f64) -> f64 {
        1.0 - self.miss(t_s)
    }

    pub fn total_energy(&self, t_s: f64) -> Result<f64> {
        self.check_ts("total_energy", t_s)?;
        Ok(self.objective(t_s))
    }

    fn fixed_part(&self, t_s: f64) -> f64 {
        let w = self.bandwidth;
        self.e_s * t_s * t_s * w + self.e_r * self.t_r * t_s * w
    }

    fn objective(&self, t_s: f64) -> f64 {
        let m = self.miss(t_s);
        self.fixed_part(t_s) + (m * self.selection * self.e_t - self.e_h * (1.0 - m)) * (self.t - t_s)
    }

    pub fn total_energy_nonharvesting(&self, t_s: f64) -> Result<f64> {
        self.check_ts("total_energy_nonharvesting", t_s)?;
        let m = self.miss(t_s);
        Ok(self.fixed_part(t_s) + m * self.selection * self.e_t * (self.t - t_s))
    }

    /// Expected bits delivered by this relay in one frame at rate `rate`.
    pub fn expected_data(&self, t_s: f64, rate: f64) -> f64 {
        if t_s >= self.t {
            return 0.0;
        }
        self.miss(t_s) * self.selection * rate * (self.t - t_s)
    }

    /// SNR needed to carry `rate` over the bandwidth.
    pub fn required_snr(&self) -> f64 {
        (self.rate / self.bandwidth).exp2() - 1.0
    }

    /// Exponent `delta^-U D* / ((T - T_S) W Pr)`, `+inf` on overflow.
    fn constraint_exponent(&self, t_s: f64, d_star: f64) -> f64 {
        if d_star == 0.0 {
            return 0.0;
        }
        if self.delta == 0.0 || self.selection == 0.0 {
            return f64::INFINITY;
        }
        let ln_h = -t_s * self.bandwidth * self.delta.ln() + d_star.ln()
            - ((self.t - t_s) * self.bandwidth * self.selection).ln();
        ln_h.exp()
    }

    /// `2^h - 1 - gamma`; feasible iff `<= 0`.
    pub fn transformed_constraint(&self, t_s: f64, d_star: f64) -> Result<f64> {
        self.check_ts("transformed_constraint", t_s)?;
        let h = self.constraint_exponent(t_s, d_star);
        Ok(h.exp2() - 1.0 - self.required_snr())
    }

    /// Derivative of the objective in `T_S`.
    pub fn objective_derivative(&self, t_s: f64) -> f64 {
        let w = self.bandwidth;
        let base = self.e_h + 2.0 * self.e_s * t_s * w + self.e_r * self.t_r * w;
        let m = self.miss(t_s);
        if m == 0.0 {
            return base;
        }
        base - m * (self.e_h + self.selection * self.e_t) * (1.0 - (self.t - t_s) * w * self.delta.ln())
    }

    /// Derivative of the transformed constraint in `T_S`.
    pub fn constraint_derivative(&self, t_s: f64, d_star: f64) -> f64 {
        let h = self.constraint_exponent(t_s, d_star);
        if h == 0.0 {
            return 0.0;
        }
        let tail = self.t - t_s;
        h.exp2() * std::f64::consts::LN_2 * h * (1.0 - tail * self.bandwidth * self.delta.ln()) / tail
    }

    /// Necessary optimality condition
    /// `E_h + e_t Pr <= delta^-U (E_h + 2 e_s U + e_r T_R W) / (1 - (T - T_S) W ln delta)`,
    /// evaluated in logarithms.
    pub fn necessary_condition(&self, t_s: f64) -> bool {
        if self.delta == 0.0 {
            return true;
        }
        let w = self.bandwidth;
        let ln_d = self.delta.ln();
        let lhs = self.e_h + self.e_t * self.selection;
        let num = self.e_h + 2.0 * self.e_s * t_s * w + self.e_r * self.t_r * w;
        let den = 1.0 - (self.t - t_s) * w * ln_d;
        if lhs <= 0.0 {
            return true;
        }
        if num <= 0.0 {
            return false;
        }
        lhs.ln() <= -t_s * w * ln_d + num.ln() - den.ln() + NECESSARY_LOG_TOL
    }

    /// Consumed-to-harvested energy ratio.
    pub fn ecg(&self, t_s: f64) -> Result<f64> {
        self.check_ts("ecg", t_s)?;
        let w = self.bandwidth;
        let t_d = self.t - t_s;
        let p_d = self.detection_probability(t_s);
        let harvested = p_d * self.e_h * t_d;
        if harvested <= 0.0 {
            return Err(Error::ZeroHarvest);
        }
        let consumed = self.e_s * t_s
            + self.e_r * self.t_r * t_s * w
            + (1.0 - p_d) * self.selection * self.e_t * t_d;
        Ok(consumed / harvested)
    }

    /// Minimize the frame energy subject to delivering at least `d_star` bits.
    ///
    /// The expected data decreases in `T_S`, so the feasible set is
    /// `[1/W, b]`; `b` is found by bisection and the convex objective is then
    /// minimized over it by golden-section search.
    pub fn optimize(&self, d_star: f64) -> Result<Optimum> {
        if !(d_star >= 0.0) {
            return Err(Error::Domain {
                func: "optimize",
                value: d_star,
                reason: "data target must be nonnegative",
            });
        }
        let lower = 1.0 / self.bandwidth;
        if lower >= self.t {
            return Err(Error::Model("frame shorter than one sensing sample".into()));
        }
        let max_bits = self.expected_data(lower, self.rate);
        if max_bits < d_star {
            return Err(Error::Infeasible {
                target: d_star,
                max_bits,
            });
        }
        let top = self.t * (1.0 - 1e-12);
        let binding = d_star > 0.0 && self.expected_data(top, self.rate) < d_star;
        let upper = if binding {
            let (mut a, mut b) = (lower, top);
            while b - a > 1e-15 * b {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if self.expected_data(mid, self.rate) >= d_star {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            a
        } else {
            top
        };

        // Convex objective: the sign of f' at the ends decides the activity,
        // otherwise bisect f' for the stationary point.
        let (t_s, activity) = if self.objective_derivative(lower) >= 0.0 {
            (lower, Activity::LowerBound)
        } else if self.objective_derivative(upper) <= 0.0 {
            let a = if binding {
                Activity::ConstraintActive
            } else {
                Activity::UpperBound
            };
            (upper, a)
        } else {
            (self.stationary_point(lower, upper), Activity::Interior)
        };
        let gradient = self.objective_derivative(t_s);
        let (mu, mu_kkt) = if activity == Activity::ConstraintActive {
            let g = self.constraint_derivative(t_s, d_star);
            (gradient / g, (-gradient / g).max(0.0))
        } else {
            (0.0, 0.0)
        };
        Ok(Optimum {
            t_s,
            e_min: self.objective(t_s),
            activity,
            mu,
            mu_kkt,
            constraint: self.transformed_constraint(t_s, d_star)?,
            gradient,
            necessary: self.necessary_condition(t_s),
            lower,
            upper,
        })
    }
}

impl EnergyModel {
    fn stationary_point(&self, lo: f64, hi: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        while b - a > TS_TOL * 1e-6 * b {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.objective_derivative(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        if self.objective_derivative(a).abs() <= self.objective_derivative(b).abs() {
            a
        } else {
            b
        }
    }
}

/// Minimizer of a unimodal `f` on `[a, b]` to bracket width `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let candidates = [(a, f(a)), (mid, f(mid)), (b, f(b))];
    candidates
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|p| p.0)
        .unwrap_or(mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(delta: f64) -> EnergyModel {
        EnergyModel {
            e_s: 1e-3,
            e_r: 2e-3,
            e_t: 0.05,
            selection: 0.5,
            e_h: 0.02,
            delta,
            bandwidth: 1e6,
            t_r: 1e-3,
            t: 0.1,
            rate: 1e5,
        }
    }

    #[test]
    fn golden_section_quadratic() {
        let x = golden_section(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn never_detecting_keeps_full_transmit_term() {
        let m = model(1.0);
        let t_s = 1e-3;
        let e = m.total_energy(t_s).unwrap();
        let expected = m.e_s * t_s * t_s * 1e6 + m.e_r * 1e-3 * t_s * 1e6 + 0.5 * 0.05 * (0.1 - t_s);
        assert!((e - expected).abs() < 1e-15);
    }

    #[test]
    fn harvest_gap_identity() {
        let m = model(0.9999);
        for t_s in [1e-6, 1e-4, 1e-2] {
            let a = m.total_energy(t_s).unwrap();
            let b = m.total_energy_nonharvesting(t_s).unwrap();
            let p_d = m.detection_probability(t_s);
            assert!((b - p_d * m.e_h * (0.1 - t_s) - a).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = model(0.99995);
        let d_star = 1e3;
        for t_s in [1e-5, 1e-3, 3e-2] {
            let h = 1e-7;
            let fd = (m.objective(t_s + h) - m.objective(t_s - h)) / (2.0 * h);
            let an = m.objective_derivative(t_s);
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{fd} {an}");
            let g = |t| m.transformed_constraint(t, d_star).unwrap();
            let gd = (g(t_s + h) - g(t_s - h)) / (2.0 * h);
            let ga = m.constraint_derivative(t_s, d_star);
            assert!((gd - ga).abs() < 1e-5 * ga.abs().max(1e-3), "{gd} {ga}");
        }
    }

    #[test]
    fn zero_target_is_always_feasible() {
        let m = model(0.9);
        let g = m.transformed_constraint(0.05, 0.0).unwrap();
        assert!((g + m.required_snr()).abs() < 1e-15);
    }

    #[test]
    fn constraint_zero_where_data_meets_target() {
        let m = model(0.99999);
        let t_s = 0.02;
        let d_star = m.expected_data(t_s, m.rate);
        assert!(m.transformed_constraint(t_s, d_star).unwrap().abs() < 1e-9);
    }

    #[test]
    fn infeasible_target_reports_capacity() {
        let m = model(0.99);
        match m.optimize(1e9) {
            Err(Error::Infeasible { max_bits, .. }) => {
                assert!((max_bits - m.expected_data(1e-6, m.rate)).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn perfect_detector_satisfies_necessary_condition() {
        assert!(model(0.0).necessary_condition(1e-3));
    }

    #[test]
    fn unreliable_detector_with_costly_transmission_fails_it() {
        let mut m = model(1.0 - 1e-9);
        m.e_t = 1e3;
        m.e_s = 0.0;
        m.e_r = 0.0;
        assert!(!m.necessary_condition(1e-6));
    }

    #[test]
    fn ecg_rejects_zero_harvest() {
        assert_eq!(model(1.0).ecg(0.01), Err(Error::ZeroHarvest));
    }
}
