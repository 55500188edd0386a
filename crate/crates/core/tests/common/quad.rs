//! Adaptive Gauss–Kronrod (7/15) quadrature, used only as a test oracle.

#![allow(dead_code)]

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Most subintervals kept before the estimate is returned as is.
const MAX_INTERVALS: usize = 20_000;

/// Integral of `f` over `[a, b]` to absolute tolerance `tol` (global error,
/// bisecting the worst subinterval first).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol || parts.len() >= MAX_INTERVALS {
            break;
        }
        let k = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            parts.push((lo, hi, gk15(&f, lo, hi).0, 0.0));
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// Integral over `[a, inf)` via `x = a + t / (1 - t)`.
pub fn integrate_semi_infinite(f: impl Fn(f64) -> f64, a: f64, tol: f64) -> f64 {
    integrate(
        |t| {
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Trapezoid rule for smooth periodic integrands over one full period,
/// exponentially convergent.
pub fn periodic_trapezoid(f: impl Fn(f64) -> f64, a: f64, period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    (0..n).map(|j| f(a + h * j as f64)).sum::<f64>() * h
}
