#[path = "common/quad.rs"]
mod quad;

use greenrelay::fading::{
    active_count_pmf, hypoexp_cdf, hypoexp_pdf, max_exp_cdf, max_exp_expectation, max_exp_pdf,
    ExpMixture, PrimaryModel,
};
use greenrelay::mcsim::{activity_sum, max_of_exponentials, run_trials};
use proptest::prelude::*;

const TRIALS: u64 = 1_000_000;

#[test]
fn binomial_anchors() {
    let p = PrimaryModel::new(3, 1.0, 0.5).unwrap();
    assert!((active_count_pmf(0, &p).unwrap() - 0.125).abs() < 1e-15);
    let p = PrimaryModel::new(4, 1.0, 0.3).unwrap();
    assert!((active_count_pmf(2, &p).unwrap() - 0.2646).abs() < 1e-12);
    assert!(active_count_pmf(5, &p).is_err());
}

#[test]
fn single_always_on_primary_is_exponential() {
    let mean = 2.5;
    for x in [0.0, 0.1, 1.0, 7.0] {
        let pdf = hypoexp_pdf(x, &[mean], 1.0, 1.0).unwrap();
        assert!((pdf - (-x / mean).exp() / mean).abs() < 1e-15);
    }
}

#[test]
fn mixture_mass_splits_into_atom_and_density() {
    let gains = [1.0, 0.4, 0.15];
    for p_on in [0.3, 0.5, 0.9] {
        let v = quad::integrate_semi_infinite(|x| hypoexp_pdf(x, &gains, 2.0, p_on).unwrap(), 0.0, 1e-12);
        let atom = hypoexp_cdf(0.0, &gains, 2.0, p_on).unwrap();
        assert!((atom - (1.0 - p_on).powi(3)).abs() < 1e-15);
        assert!((v + atom - 1.0).abs() < 1e-9, "p_on={p_on} mass={v}");
    }
}

#[test]
fn hypoexponential_median_matches_simulation() {
    let means = [1.0, 3.0];
    let law = ExpMixture::hypoexponential(&means).unwrap();
    let (mut a, mut b) = (0.0, 50.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if law.cdf(m) < 0.5 {
            a = m;
        } else {
            b = m;
        }
    }
    let median = 0.5 * (a + b);
    let est = run_trials(TRIALS, 11, 1, |rng, out| {
        out[0] = f64::from(activity_sum(rng, &means, 1.0) <= median);
    })
    .estimate(0, 11);
    assert!(est.agrees(0.5, 3.0, true), "{est:?}");
}

#[test]
fn max_expectation_anchors() {
    assert_eq!(max_exp_expectation(&[1.7]).unwrap(), 1.7);
    assert!((max_exp_expectation(&[1.0, 2.0]).unwrap() - 7.0 / 3.0).abs() < 1e-15);
}

#[test]
fn max_expectation_matches_simulation() {
    let means = [0.5, 1.0, 2.0, 4.0, 8.0];
    let est = run_trials(TRIALS, 12, 1, |rng, out| out[0] = max_of_exponentials(rng, &means)).estimate(0, 12);
    let exact = max_exp_expectation(&means).unwrap();
    assert!(est.agrees(exact, 3.0, false), "{est:?} vs {exact}");
}

#[test]
fn max_density_integrates_to_one_and_to_the_mean() {
    let means = [0.7, 2.0, 5.0];
    let mass = quad::integrate_semi_infinite(|x| max_exp_pdf(x, &means).unwrap(), 0.0, 1e-13);
    assert!((mass - 1.0).abs() < 1e-8);
    let first = quad::integrate_semi_infinite(|x| x * max_exp_pdf(x, &means).unwrap(), 0.0, 1e-13);
    let exact = max_exp_expectation(&means).unwrap();
    assert!(((first - exact) / exact).abs() < 1e-8);
}

#[test]
fn max_single_is_exponential() {
    for x in [0.0, 0.3, 3.0] {
        assert!((max_exp_pdf(x, &[1.5]).unwrap() - (-x / 1.5).exp() / 1.5).abs() < 1e-15);
    }
}

#[test]
fn rejects_bad_inputs() {
    assert!(max_exp_cdf(1.0, &[]).is_err());
    assert!(max_exp_pdf(1.0, &[1.0, -2.0]).is_err());
    assert!(ExpMixture::hypoexponential(&[1.0, 1.0]).is_err());
    assert!(ExpMixture::activity_mixture(&[1.0; 21], 0.5).is_err());
    assert!(PrimaryModel::new(2, 1.0, 1.5).is_err());
}

fn distinct_means(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..20.0, n).prop_filter("distinct", |v| {
        v.iter()
            .enumerate()
            .all(|(i, a)| v[i + 1..].iter().all(|b| ((a - b) / a).abs() > 1e-3))
    })
}

proptest! {
    #[test]
    fn pmf_normalized(l in 1usize..=20, p_on in 0.0f64..=1.0) {
        let p = PrimaryModel::new(l, 1.0, p_on).unwrap();
        let total: f64 = (0..=l).map(|r| active_count_pmf(r, &p).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_symmetric_under_permutation(means in distinct_means(1..=6), x in 0.0f64..40.0, seed in any::<u64>()) {
        let mut shuffled = means.clone();
        let n = shuffled.len();
        for k in (1..n).rev() {
            shuffled.swap(k, (seed.rotate_left(k as u32) % (k as u64 + 1)) as usize);
        }
        let (a, b) = (max_exp_pdf(x, &means).unwrap(), max_exp_pdf(x, &shuffled).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        let (a, b) = (max_exp_expectation(&means).unwrap(), max_exp_expectation(&shuffled).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn max_expectation_bounds(means in distinct_means(1..=6)) {
        let e = max_exp_expectation(&means).unwrap();
        let largest = means.iter().cloned().fold(0.0, f64::max);
        let total: f64 = means.iter().sum();
        prop_assert!(e >= largest * (1.0 - 1e-12) && e <= total * (1.0 + 1e-12));
    }

    #[test]
    fn mixture_cdf_is_a_cdf(means in distinct_means(1..=5), p_on in 0.0f64..=1.0, x in 0.0f64..100.0, dx in 0.0f64..10.0) {
        let law = ExpMixture::activity_mixture(&means, p_on).unwrap();
        let (a, b) = (law.cdf(x), law.cdf(x + dx));
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b >= a - 1e-12);
        prop_assert!(law.cdf(0.0) >= law.atom() - 1e-15);
        prop_assert!((law.atom() - (1.0 - p_on).powi(means.len() as i32)).abs() < 1e-12);
    }

    #[test]
    fn mixture_mean_is_weighted(means in distinct_means(1..=5), p_on in 0.0f64..=1.0) {
        let law = ExpMixture::activity_mixture(&means, p_on).unwrap();
        let expect = p_on * means.iter().sum::<f64>();
        prop_assert!((law.mean() - expect).abs() <= 1e-8 * expect.max(1e-12));
    }
}
