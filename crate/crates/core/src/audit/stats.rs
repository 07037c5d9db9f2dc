//! Exact reference quantities and p-values.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF, Normal};

use crate::bounds::{binomial, factorial};

/// Derangement numbers `D_0..=D_n` from `D_n = (n-1)(D_{n-1} + D_{n-2})`.
pub fn derangements(n: u64) -> Vec<BigUint> {
    let mut d = vec![BigUint::one(), BigUint::zero()];
    for i in 2..=n {
        let next = (&d[i as usize - 1] + &d[i as usize - 2]) * BigUint::from(i - 1);
        d.push(next);
    }
    d.truncate(n as usize + 1);
    d
}

/// `D_n / n!`.
pub fn derangement_probability(n: u64) -> BigRational {
    let d = derangements(n).pop().expect("nonempty");
    BigRational::new(d.into(), factorial(n).into_inner().into())
}

/// Probability that a uniform permutation of `n` has exactly `j` fixed
/// points, for `j = 0..=n`: `C(n, j) D_{n-j} / n!`.
pub fn fixed_point_distribution(n: u64) -> Vec<BigRational> {
    let d = derangements(n);
    let total: BigUint = factorial(n).into_inner();
    (0..=n)
        .map(|j| {
            let count = binomial(n, j).expect("j <= n").into_inner() * &d[(n - j) as usize];
            BigRational::new(count.into(), total.clone().into())
        })
        .collect()
}

/// Spearman's rank correlation of two permutations given as rank vectors.
pub fn spearman_rho(a: &[u64], b: &[u64]) -> f64 {
    let n = a.len() as f64;
    1.0 - 6.0 * squared_rank_difference(a, b) as f64 / (n * (n * n - 1.0))
}

pub fn squared_rank_difference(a: &[u64], b: &[u64]) -> u64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y).pow(2)).sum()
}

/// Two-sided p-value of a standard normal score.
pub fn normal_two_sided(z: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("valid");
    (2.0 * normal.sf(z.abs())).min(1.0)
}

/// Upper-tail chi-square p-value; 1 when there are no degrees of freedom.
pub fn chi_square_sf(stat: f64, df: u64) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).expect("df > 0").sf(stat)
}

/// Two-sided binomial test of `successes` out of `trials` against `p`,
/// doubling the smaller tail.
pub fn binomial_two_sided(successes: u64, trials: u64, p: f64) -> f64 {
    let dist = Binomial::new(p, trials).expect("valid binomial");
    let lower = dist.cdf(successes);
    let upper = if successes == 0 { 1.0 } else { dist.sf(successes - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}

/// Pearson statistic over cells, merging each cell whose expected count is
/// below `min_expected` into its lower neighbour (the first cell into the
/// second). Returns `(statistic, cells used)`.
pub fn pooled_chi_square(observed: &[u64], expected: &[f64], min_expected: f64) -> (f64, usize) {
    let mut obs: Vec<f64> = observed.iter().map(|&o| o as f64).collect();
    let mut exp = expected.to_vec();
    for i in (1..exp.len()).rev() {
        if exp[i] < min_expected {
            let (o, e) = (obs.remove(i), exp.remove(i));
            obs[i - 1] += o;
            exp[i - 1] += e;
        }
    }
    if exp.len() > 1 && exp[0] < min_expected {
        let (o, e) = (obs.remove(0), exp.remove(0));
        obs[0] += o;
        exp[0] += e;
    }
    let stat = obs
        .iter()
        .zip(&exp)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    (stat, exp.len())
}

/// Position of a sorted `k`-subset of `{1..n}` in colexicographic order.
pub fn colex_rank(subset: &[u64]) -> u64 {
    subset
        .iter()
        .enumerate()
        .map(|(i, &c)| small_binomial(c - 1, i as u64 + 1))
        .sum()
}

pub(crate) fn small_binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::to_f64;
    use crate::sampling::{enumerate::enumerate, fisher_yates};
    use crate::integers::IntegerMethod;

    fn brute_derangements(n: u64) -> u64 {
        let d = enumerate(IntegerMethod::MaskReject, 8, |s| fisher_yates(s, n)).unwrap();
        d.outcomes
            .keys()
            .filter(|p| p.iter().enumerate().all(|(i, &v)| v != i as u64 + 1))
            .count() as u64
    }

    #[test]
    fn derangement_recurrence_against_brute_force() {
        let d = derangements(7);
        for n in 1..=6u64 {
            assert_eq!(d[n as usize], BigUint::from(brute_derangements(n)), "n={n}");
        }
        assert_eq!(d[7], BigUint::from(1854u32));
    }

    #[test]
    fn derangement_references() {
        assert_eq!(derangement_probability(2), BigRational::new(1.into(), 2.into()));
        assert_eq!(
            derangement_probability(7),
            BigRational::new(1854.into(), 5040.into())
        );
        assert!((to_f64(&derangement_probability(7)) - 0.367857).abs() < 1e-6);
    }

    #[test]
    fn rencontres_sum_to_one() {
        for n in 1..=12 {
            let total = fixed_point_distribution(n)
                .into_iter()
                .fold(BigRational::zero(), |a, p| a + p);
            assert_eq!(total, BigRational::one());
            assert!(fixed_point_distribution(n)[n as usize - 1].is_zero());
        }
    }

    #[test]
    fn spearman_extremes() {
        let a = [1, 2, 3, 4, 5];
        assert_eq!(spearman_rho(&a, &a), 1.0);
        assert_eq!(spearman_rho(&a, &[5, 4, 3, 2, 1]), -1.0);
    }

    #[test]
    fn spearman_mean_is_zero_over_all_pairs() {
        let perms = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
        let total: u64 = perms
            .iter()
            .flat_map(|a| perms.iter().map(move |b| squared_rank_difference(a, b)))
            .sum();
        // Mean rho is 0 exactly when mean sum d^2 equals n(n^2-1)/6 = 4.
        assert_eq!(total, 36 * 4);
    }

    #[test]
    fn colex_rank_is_a_bijection() {
        let mut seen = vec![false; 10];
        for a in 1..=5u64 {
            for b in a + 1..=5 {
                let r = colex_rank(&[a, b]) as usize;
                assert!(!seen[r]);
                seen[r] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn binomial_test_tails() {
        assert!((binomial_two_sided(5, 10, 0.5) - 1.0).abs() < 1e-12);
        let p = binomial_two_sided(0, 10, 0.5);
        assert!((p - 2.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn pooling_merges_small_tail() {
        let (stat, cells) = pooled_chi_square(&[50, 40, 8, 2], &[50.0, 40.0, 7.0, 3.0], 10.0);
        assert_eq!(cells, 3);
        assert!((stat - 0.0).abs() < 1e-12);
        // Impossible cells in the middle (n-1 fixed points) are absorbed.
        let (stat, cells) = pooled_chi_square(&[30, 0, 20], &[30.0, 0.0, 20.0], 10.0);
        assert_eq!(cells, 2);
        assert!(stat.is_finite());
    }
}
