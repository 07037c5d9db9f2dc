use std::collections::HashSet;

use super::{reservoir_r, vitter_z, Algorithm, Randomness, Sample, SampleSpec, SamplingError};

fn check_k(n: u64, k: u64) -> Result<(), SamplingError> {
    if k > n {
        return Err(SamplingError::KExceedsN { n, k });
    }
    Ok(())
}

/// Permute-indices-and-keep-k: one fraction per item, stable sort by
/// `(fraction, index)`, keep the first `k`. Consumes exactly `n` fractions.
pub fn pikk<R: Randomness + ?Sized>(rng: &mut R, n: u64, k: u64) -> Result<Sample, SamplingError> {
    check_k(n, k)?;
    let mut keyed = Vec::with_capacity(n as usize);
    for index in 1..=n {
        keyed.push((rng.fraction()?, index));
    }
    keyed.sort_unstable();
    Ok(Sample {
        indices: keyed.into_iter().take(k as usize).map(|(_, i)| i).collect(),
        accounting: rng.accounting(),
    })
}

/// Durstenfeld's shuffle: for `i` from `len-1` down to 1, swap position `i`
/// with a uniform `j` in `{0..i}`.
pub fn fisher_yates_in_place<T, R: Randomness + ?Sized>(rng: &mut R, items: &mut [T]) -> Result<(), SamplingError> {
    for i in (1..items.len()).rev() {
        let j = rng.uniform_int(i as u64 + 1)? - 1;
        items.swap(i, j as usize);
    }
    Ok(())
}

/// A permutation of `{1..n}` using exactly `n - 1` integer draws.
pub fn fisher_yates<R: Randomness + ?Sized>(rng: &mut R, n: u64) -> Result<Vec<u64>, SamplingError> {
    if n == 0 {
        return Err(SamplingError::InvalidSpec("cannot permute an empty population".into()));
    }
    let mut perm: Vec<u64> = (1..=n).collect();
    fisher_yates_in_place(rng, &mut perm)?;
    Ok(perm)
}

/// `k` draws from `{1..n}`. Without replacement, duplicates are redrawn,
/// and indices are returned in the order they were first drawn.
pub fn sample_random_indices<R: Randomness + ?Sized>(
    rng: &mut R,
    n: u64,
    k: u64,
    with_replacement: bool,
) -> Result<Sample, SamplingError> {
    let mut indices = Vec::with_capacity(k as usize);
    if with_replacement {
        for _ in 0..k {
            indices.push(rng.uniform_int(n)?);
        }
    } else {
        check_k(n, k)?;
        let mut seen = HashSet::with_capacity(k as usize);
        for _ in 0..k {
            let i = rng.uniform_int_rejecting(n, &|v| seen.contains(&v))?;
            seen.insert(i);
            indices.push(i);
        }
    }
    Ok(Sample {
        indices,
        accounting: rng.accounting(),
    })
}

/// Cormen et al.'s `RandomSample(k, n)`, unrolled: for `j` from `n-k+1` to
/// `n`, draw `i` uniform on `{1..j}` and add `j` if `i` is already present,
/// else `i`. Uses exactly `k` integer draws and no recursion.
pub fn cormen_sample<R: Randomness + ?Sized>(rng: &mut R, n: u64, k: u64) -> Result<Sample, SamplingError> {
    check_k(n, k)?;
    let mut chosen = HashSet::with_capacity(k as usize);
    let mut indices = Vec::with_capacity(k as usize);
    for j in (n - k + 1)..=n {
        let i = rng.uniform_int(j)?;
        let pick = if chosen.contains(&i) { j } else { i };
        chosen.insert(pick);
        indices.push(pick);
    }
    Ok(Sample {
        indices,
        accounting: rng.accounting(),
    })
}

/// Dispatches on `spec.algorithm`. Reservoir algorithms read the stream
/// `1..=n`; their indices are listed in reservoir-slot order.
pub fn draw_sample<R: Randomness + ?Sized>(rng: &mut R, spec: &SampleSpec) -> Result<Sample, SamplingError> {
    spec.validate()?;
    let SampleSpec { n, k, .. } = *spec;
    match spec.algorithm {
        Algorithm::Pikk => pikk(rng, n, k),
        Algorithm::FisherYatesPrefix => {
            let mut perm = fisher_yates(rng, n)?;
            perm.truncate(k as usize);
            Ok(Sample {
                indices: perm,
                accounting: rng.accounting(),
            })
        }
        Algorithm::RandomIndices => sample_random_indices(rng, n, k, spec.with_replacement),
        Algorithm::CormenRecursive => cormen_sample(rng, n, k),
        Algorithm::ReservoirR => {
            let out = reservoir_r(rng, 1..=n, k as usize)?;
            Ok(Sample {
                indices: out.items,
                accounting: out.accounting,
            })
        }
        Algorithm::VitterZ => {
            let out = vitter_z(rng, 1..=n, k as usize)?;
            Ok(Sample {
                indices: out.items,
                accounting: out.accounting,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{GeneratorSpec, Scripted, WordSource};
    use crate::integers::mask_bits;
    use crate::sampling::Drawer;
    use proptest::prelude::*;

    /// Scripted words encoding uniform draws `values[i]` on `{1..ranges[i]}`,
    /// one word per draw, each word `mu` bits wide... all ranges share the
    /// word width `width`, and the value sits in the top `mu` bits.
    fn script_ints(width: u32, draws: &[(u64, u64)]) -> Scripted {
        let words = draws
            .iter()
            .map(|&(m, v)| {
                let mu = mask_bits(m);
                (v - 1) << (width - mu)
            })
            .collect();
        Scripted::new(width, words).unwrap()
    }

    #[test]
    fn pikk_traced_sort() {
        // fractions 0.3, 0.1, 0.2 -> order B, C, A
        let mut s = Scripted::new(4, vec![3, 1, 2]).unwrap();
        let sample = pikk(&mut Drawer::new(&mut s), 3, 2).unwrap();
        assert_eq!(sample.indices, vec![2, 3]);
        assert_eq!(sample.accounting.words, 3);
    }

    #[test]
    fn pikk_consumes_n_words_even_for_k0() {
        let mut s = Scripted::new(8, vec![9, 8, 7, 6]).unwrap();
        let sample = pikk(&mut Drawer::new(&mut s), 4, 0).unwrap();
        assert!(sample.indices.is_empty());
        assert_eq!(s.words_emitted(), 4);
    }

    #[test]
    fn pikk_ties_break_by_index() {
        let mut s = Scripted::new(2, vec![1, 1, 0]).unwrap();
        let sample = pikk(&mut Drawer::new(&mut s), 3, 3).unwrap();
        assert_eq!(sample.indices, vec![3, 1, 2]);
    }

    #[test]
    fn fisher_yates_identity_when_j_equals_i() {
        // n = 3: draw j = 2 on {0..2}, then j = 1 on {0..1}
        let mut s = script_ints(4, &[(3, 3), (2, 2)]);
        assert_eq!(fisher_yates(&mut Drawer::new(&mut s), 3).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn fisher_yates_all_zero_swaps() {
        let mut s = script_ints(4, &[(3, 1), (2, 1)]);
        assert_eq!(fisher_yates(&mut Drawer::new(&mut s), 3).unwrap(), vec![2, 3, 1]);
    }

    #[test]
    fn fisher_yates_n4_every_control_path_once() {
        let mut counts = std::collections::HashMap::new();
        for a in 1..=4u64 {
            for b in 1..=3u64 {
                for c in 1..=2u64 {
                    // A word whose two attempts are both rejected (3 on
                    // {0..2}) must not change the outcome.
                    let mut words = vec![(a - 1) << 2];
                    words.push(0b1111);
                    words.push((b - 1) << 2);
                    words.push((c - 1) << 3);
                    let mut s = Scripted::new(4, words).unwrap();
                    let perm = fisher_yates(&mut Drawer::new(&mut s), 4).unwrap();
                    assert_eq!(s.remaining(), 0);
                    *counts.entry(perm).or_insert(0) += 1;
                }
            }
        }
        assert_eq!(counts.len(), 24);
        assert!(counts.values().all(|&c| c == 1));
    }

    #[test]
    fn random_indices_exhausts_range() {
        let mut g = GeneratorSpec::hash("indices").build().unwrap();
        let sample = sample_random_indices(&mut Drawer::new(&mut g), 5, 5, false).unwrap();
        assert_eq!(sample.sorted(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn random_indices_with_replacement_traced() {
        // n = 2 takes one bit per draw: 1, 0, 1 -> 2, 1, 2
        let mut s = Scripted::from_bits(&[1, 0, 1]).unwrap();
        let sample = sample_random_indices(&mut Drawer::new(&mut s), 2, 3, true).unwrap();
        assert_eq!(sample.indices, vec![2, 1, 2]);
        assert_eq!(sample.accounting.int_draws, 3);
    }

    #[test]
    fn random_indices_redraws_duplicates() {
        // n = 4: 3, 3 (duplicate), 1
        let mut s = script_ints(2, &[(4, 3), (4, 3), (4, 1)]);
        let sample = sample_random_indices(&mut Drawer::new(&mut s), 4, 2, false).unwrap();
        assert_eq!(sample.indices, vec![3, 1]);
        assert_eq!(sample.accounting.int_draws, 3);
    }

    #[test]
    fn cormen_base_case_uses_no_randomness() {
        let mut s = Scripted::new(8, vec![]).unwrap();
        let sample = cormen_sample(&mut Drawer::new(&mut s), 10, 0).unwrap();
        assert!(sample.indices.is_empty());
        assert_eq!(sample.accounting, Default::default());
    }

    #[test]
    fn cormen_traced_recursion() {
        // RandomSample(2, 3): i = 2 on {1..2}, then i = 2 on {1..3} collides -> 3
        let mut s = script_ints(4, &[(2, 2), (3, 2)]);
        let sample = cormen_sample(&mut Drawer::new(&mut s), 3, 2).unwrap();
        assert_eq!(sample.sorted(), vec![2, 3]);
    }

    #[test]
    fn cormen_large_k_does_not_recurse() {
        let mut g = GeneratorSpec::hash("deep").build().unwrap();
        let sample = cormen_sample(&mut Drawer::new(&mut g), 100_000, 50_000).unwrap();
        let distinct: HashSet<_> = sample.indices.iter().collect();
        assert_eq!(distinct.len(), 50_000);
    }

    #[test]
    fn ten_way_index_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let mut g = GeneratorSpec::hash("chi-square n=10").build().unwrap();
        let mut d = Drawer::new(&mut g);
        let draws = 100_000;
        let mut counts = [0u64; 10];
        for _ in 0..draws {
            let s = sample_random_indices(&mut d, 10, 1, false).unwrap();
            counts[(s.indices[0] - 1) as usize] += 1;
        }
        let expected = draws as f64 / 10.0;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let p = 1.0 - ChiSquared::new(9.0).unwrap().cdf(stat);
        assert!(p > 0.001, "chi-square {stat}, p {p}");
    }

    #[test]
    fn fisher_yates_uses_n_minus_1_draws() {
        let mut g = GeneratorSpec::hash("fy").build().unwrap();
        let mut d = Drawer::new(&mut g);
        fisher_yates(&mut d, 50).unwrap();
        assert_eq!(d.accounting().int_draws, 49);
    }

    fn algo() -> impl Strategy<Value = Algorithm> {
        proptest::sample::select(Algorithm::ALL.to_vec())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn samples_are_distinct_and_in_range(n in 1u64..=1000, k_raw: u64, seed: u32, a in algo()) {
            let k = if a.is_streaming() { 1 + k_raw % n } else { k_raw % (n + 1) };
            let spec = SampleSpec::new(n, k, false, a).unwrap();
            let mut g = GeneratorSpec::Mt19937 { seed }.build().unwrap();
            let sample = draw_sample(&mut Drawer::new(&mut g), &spec).unwrap();
            prop_assert_eq!(sample.indices.len() as u64, k);
            let distinct: HashSet<_> = sample.indices.iter().collect();
            prop_assert_eq!(distinct.len() as u64, k);
            prop_assert!(sample.indices.iter().all(|&i| (1..=n).contains(&i)));
            if a == Algorithm::Pikk {
                prop_assert_eq!(sample.accounting.words, n);
            }
        }

        #[test]
        fn pikk_is_equivariant(n in 1usize..12, seed: u64, k_raw: usize) {
            // Distinct fraction words, then the same words permuted.
            let k = k_raw % (n + 1);
            let mut words: Vec<u64> = (0..n as u64).map(|i| i * 7 + 3).collect();
            let mut g = GeneratorSpec::Mt19937 { seed: seed as u32 }.build().unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            fisher_yates_in_place(&mut Drawer::new(&mut g), &mut perm).unwrap();
            words.sort_unstable();
            let permuted: Vec<u64> = perm.iter().map(|&p| words[p]).collect();
            let mut s = Scripted::new(16, permuted).unwrap();
            let sample = pikk(&mut Drawer::new(&mut s), n as u64, k as u64).unwrap();
            // Item i (1-based) got key rank perm[i-1]; the sample lists the
            // items holding ranks 0..k in order.
            let mut expected = vec![0u64; n];
            for (item, &rank) in perm.iter().enumerate() {
                expected[rank] = item as u64 + 1;
            }
            expected.truncate(k);
            prop_assert_eq!(sample.indices, expected);
        }
    }
}
