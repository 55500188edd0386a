//! Real-argument special functions used by the closed forms.
//!
//! Every function has a checked public entry point returning [`Result`] and an
//! unchecked crate-internal twin used inside the model loops once inputs are
//! known to be valid. Switchover points:
//!
//! | function | small argument            | large argument                  |
//! |----------|---------------------------|---------------------------------|
//! | `J0`     | power series (`|x| < 5`)  | Miller recurrence to 25, then Hankel expansion |
//! | `I0`     | power series (`x <= 30`)  | asymptotic expansion            |
//! | `K1`     | logarithmic series (`x <= 2`) | Steed continued fraction    |
//! | `E1`     | power series (`x <= 1`)   | Lentz continued fraction        |
//! | `Ei`     | power series (`x < 40`)   | asymptotic expansion            |

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const EPS: f64 = 1e-17;

fn finite(func: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            value: x,
            reason: "argument must be finite",
        })
    }
}

fn positive(func: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            value: x,
            reason: "argument must be positive and finite",
        })
    }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    finite("bessel_j0", x)?;
    Ok(j0(x))
}

pub(crate) fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 5.0 {
        j0_series(ax)
    } else if ax <= 25.0 {
        j0_miller(ax)
    } else {
        j0_hankel(ax)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    sum
}

// Backward recurrence normalized with J0 + 2 * sum_k J_2k = 1.
fn j0_miller(x: f64) -> f64 {
    let start = 2 * ((x as usize + 40) / 2);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
        // `cur` now holds J_{k-1}
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if k == 1 {
            j0 = cur;
        }
    }
    j0 / (norm + j0)
}

fn j0_hankel(x: f64) -> f64 {
    // P ~ sum (-1)^k b_{2k}, Q ~ -sum (-1)^k b_{2k+1}, b_k = b_{k-1} (2k-1)^2 / (8 k x)
    let mut b = 1.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        b *= odd * odd / (8.0 * kf * x);
        if b > last || b < EPS {
            break;
        }
        last = b;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * b;
        } else {
            q -= sign * b;
        }
    }
    let (s, c) = x.sin_cos();
    let cos_chi = (c + s) / 2f64.sqrt();
    let sin_chi = (s - c) / 2f64.sqrt();
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Modified Bessel function of the first kind, order zero.
///
/// Even in `x`; fails with a range error once the result would overflow.
pub fn bessel_i0(x: f64) -> Result<f64> {
    finite("bessel_i0", x)?;
    let ax = x.abs();
    if ax > 30.0 && ax - 0.5 * (2.0 * PI * ax).ln() > 709.7 {
        return Err(Error::Range {
            func: "bessel_i0",
            value: x,
        });
    }
    Ok(i0e(ax) * ax.exp())
}

/// Exponentially scaled `e^{-|x|} I0(x)`; defined for every finite `x`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    finite("bessel_i0_scaled", x)?;
    Ok(i0e(x.abs()))
}

pub(crate) fn i0e(x: f64) -> f64 {
    if x <= 30.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..400 {
            let kf = k as f64;
            term *= q / (kf * kf);
            sum += term;
            if term < EPS * sum {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        let mut b = 1.0;
        let mut sum = 1.0;
        let mut last = f64::INFINITY;
        for k in 1..200 {
            let kf = k as f64;
            let odd = 2.0 * kf - 1.0;
            b *= odd * odd / (8.0 * kf * x);
            if b > last || b < EPS {
                break;
            }
            last = b;
            sum += b;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Modified Bessel function of the second kind, order one.
pub fn bessel_k1(x: f64) -> Result<f64> {
    positive("bessel_k1", x)?;
    Ok(k1e(x) * (-x).exp())
}

/// Exponentially scaled `e^{x} K1(x)`.
pub fn bessel_k1_scaled(x: f64) -> Result<f64> {
    positive("bessel_k1_scaled", x)?;
    Ok(k1e(x))
}

pub(crate) fn k1e(x: f64) -> f64 {
    if x <= 2.0 {
        k1_series(x) * x.exp()
    } else {
        k1e_steed(x)
    }
}

fn k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let half = 0.5 * x;
    // I1 and the digamma-weighted series share the term (x^2/4)^k / (k! (k+1)!)
    let mut term = 1.0;
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k+2)
    let mut i1 = 1.0;
    let mut dig = psi_k1 + psi_k2;
    for k in 1..100 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);
        i1 += term;
        let d = (psi_k1 + psi_k2) * term;
        dig += d;
        if term < EPS * i1 && d.abs() < EPS * dig.abs().max(1e-300) {
            break;
        }
    }
    i1 *= half;
    1.0 / x + half.ln() * i1 - 0.5 * half * dig
}

// Steed's continued fraction (Temme's CF2) for K_0 and K_1, x >= 2.
fn k1e_steed(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0e = (PI / (2.0 * x)).sqrt() / s;
    k0e * (x + 0.5 - h) / x
}

/// Upper incomplete gamma function `Γ(0, x) = E1(x)`.
pub fn gamma_upper_0(x: f64) -> Result<f64> {
    positive("gamma_upper_0", x)?;
    Ok(e1(x))
}

/// Exponentially scaled `e^{x} Γ(0, x)`.
pub fn gamma_upper_0_scaled(x: f64) -> Result<f64> {
    positive("gamma_upper_0_scaled", x)?;
    Ok(e1e(x))
}

pub(crate) fn e1(x: f64) -> f64 {
    if x <= 1.0 {
        e1_series(x)
    } else {
        e1e_cf(x) * (-x).exp()
    }
}

pub(crate) fn e1e(x: f64) -> f64 {
    if x <= 1.0 {
        e1_series(x) * x.exp()
    } else {
        e1e_cf(x)
    }
}

fn e1_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..100 {
        let kf = k as f64;
        term *= -x / kf;
        let d = term / kf;
        sum += d;
        if d.abs() < EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

// Modified Lentz evaluation of the continued fraction for e^x E1(x).
fn e1e_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let fi = i as f64;
        let a = -fi * fi;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Principal-value exponential integral `Ei(x)`.
pub fn ei(x: f64) -> Result<f64> {
    finite("ei", x)?;
    if x == 0.0 {
        return Err(Error::Domain {
            func: "ei",
            value: x,
            reason: "logarithmic singularity at zero",
        });
    }
    if x < 0.0 {
        return Ok(-e1(-x));
    }
    if x > 709.0 {
        return Err(Error::Range {
            func: "ei",
            value: x,
        });
    }
    if x < 40.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..500 {
            let kf = k as f64;
            term *= x / kf;
            let d = term / kf;
            sum += d;
            if d < EPS * sum {
                break;
            }
        }
        Ok(EULER_GAMMA + x.ln() + sum)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let next = term * k as f64 / x;
            if next > term || next < EPS {
                break;
            }
            term = next;
            sum += term;
        }
        Ok(x.exp() / x * sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun tables
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((i0e(1.0) * 1f64.exp() - 1.266_065_877_752_008_4).abs() < 1e-14);
        assert!((bessel_k1(1.0).unwrap() - 0.601_907_230_197_234_6).abs() < 1e-14);
        assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((ei(1.0).unwrap() - 1.895_117_816_355_936_8).abs() < 1e-14);
    }

    #[test]
    fn k1_branches_meet_at_two() {
        let below = k1_series(2.0) * 2f64.exp();
        let above = k1e_steed(2.0);
        assert!((below - above).abs() / above < 1e-14);
    }

    #[test]
    fn j0_branches_meet() {
        assert!((j0_series(5.0) - j0_miller(5.0)).abs() < 1e-13);
        assert!((j0_miller(25.0) - j0_hankel(25.0)).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_k1(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
        assert!(gamma_upper_0(0.0).is_err());
        assert!(ei(0.0).is_err());
        assert!(matches!(bessel_i0(800.0), Err(Error::Range { .. })));
        assert!(bessel_i0(700.0).unwrap().is_finite());
    }
}
