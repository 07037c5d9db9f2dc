//! Exact output distributions by replaying an algorithm over every path.
//!
//! [`PathSource`] answers each randomness request with one branch of a
//! choice point and records the probability of that branch. Redraw loops
//! are collapsed in closed form: a draw conditioned on not being rejected
//! is a single choice over the accepted values with renormalized weights.
//! Uniform reals are tracked as the interval of values consistent with the
//! comparisons made so far, so each comparison splits the interval.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{ratio, Accounting, Randomness, SamplingError};
use crate::integers::{exact_distribution, IntegerMethod};

/// Enumeration gives up past this many paths.
pub const MAX_PATHS: u64 = 20_000_000;

/// Exact distribution of an algorithm's outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDistribution<O: Ord> {
    pub outcomes: BTreeMap<O, BigRational>,
    pub paths: u64,
}

impl<O: Ord> PathDistribution<O> {
    pub fn total(&self) -> BigRational {
        self.outcomes.values().fold(BigRational::zero(), |acc, p| acc + p)
    }

    /// Exactly `count` outcomes, each with probability `1/count`.
    pub fn is_uniform_over(&self, count: u64) -> bool {
        let target = ratio(1, count);
        self.outcomes.len() as u64 == count && self.outcomes.values().all(|p| *p == target)
    }

    /// Largest `|p - 1/count|` over the outcomes, counting missing outcomes
    /// only through the probabilities present.
    pub fn max_deviation(&self, count: u64) -> BigRational {
        let target = ratio(1, count);
        let mut worst = if (self.outcomes.len() as u64) < count {
            target.clone()
        } else {
            BigRational::zero()
        };
        for p in self.outcomes.values() {
            let d = if *p > target { p - &target } else { &target - p };
            if d > worst {
                worst = d;
            }
        }
        worst
    }
}

/// [`Randomness`] that enumerates instead of sampling.
pub struct PathSource {
    method: IntegerMethod,
    width: u32,
    prefix: Vec<usize>,
    trail: Vec<(usize, usize)>,
    weight: BigRational,
    real_lo: BigRational,
    real_hi: BigRational,
    int_cache: HashMap<u64, Vec<(u64, BigRational)>>,
    accounting: Accounting,
}

impl PathSource {
    /// Integer draws use `method`; fraction words are `width` bits.
    pub fn new(method: IntegerMethod, width: u32) -> Self {
        assert!((1..=16).contains(&width), "fraction width must be in 1..=16");
        PathSource {
            method,
            width,
            prefix: Vec::new(),
            trail: Vec::new(),
            weight: BigRational::one(),
            real_lo: BigRational::zero(),
            real_hi: BigRational::one(),
            int_cache: HashMap::new(),
            accounting: Accounting::default(),
        }
    }

    fn reset(&mut self) {
        self.trail.clear();
        self.weight = BigRational::one();
        self.real_lo = BigRational::zero();
        self.real_hi = BigRational::one();
        self.accounting = Accounting::default();
    }

    fn choose(&mut self, count: usize) -> usize {
        let pos = self.trail.len();
        let c = self.prefix.get(pos).copied().unwrap_or(0);
        self.trail.push((c, count));
        c
    }

    /// Moves to the next unexplored path; false when all are done.
    fn advance(&mut self) -> bool {
        while let Some((c, count)) = self.trail.pop() {
            if c + 1 < count {
                self.prefix = self.trail.iter().map(|&(c, _)| c).collect();
                self.prefix.push(c + 1);
                return true;
            }
        }
        false
    }

    fn int_options(&mut self, m: u64) -> Result<Vec<(u64, BigRational)>, SamplingError> {
        if let Some(opts) = self.int_cache.get(&m) {
            return Ok(opts.clone());
        }
        let opts = match self.method {
            IntegerMethod::MaskReject => (1..=m).map(|v| (v, ratio(1, m))).collect(),
            method => {
                let dist = exact_distribution(method, self.width, m)
                    .map_err(|_| SamplingError::NotEnumerable("integer draw at this width"))?;
                dist.values()
                    .filter(|(_, p)| *p.numer() > 0)
                    .map(|(v, p)| (v.max(1), ratio(*p.numer(), *p.denom())))
                    .fold(Vec::<(u64, BigRational)>::new(), |mut acc, (v, p)| {
                        // Round's raw zero is clamped onto 1.
                        match acc.iter_mut().find(|(u, _)| *u == v) {
                            Some((_, q)) => *q += p,
                            None => acc.push((v, p)),
                        }
                        acc
                    })
            }
        };
        self.int_cache.insert(m, opts.clone());
        Ok(opts)
    }

    fn pick(&mut self, options: Vec<(u64, BigRational)>) -> u64 {
        let c = self.choose(options.len());
        let (v, p) = &options[c];
        self.weight *= p;
        *v
    }
}

impl Randomness for PathSource {
    fn uniform_int(&mut self, m: u64) -> Result<u64, SamplingError> {
        assert!(m >= 1, "range must be at least 1");
        self.accounting.int_draws += 1;
        let opts = self.int_options(m)?;
        Ok(self.pick(opts))
    }

    fn uniform_int_rejecting(
        &mut self,
        m: u64,
        reject: &dyn Fn(u64) -> bool,
    ) -> Result<u64, SamplingError> {
        self.accounting.int_draws += 1;
        let opts: Vec<_> = self.int_options(m)?.into_iter().filter(|(v, _)| !reject(*v)).collect();
        let mass = opts.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p);
        if mass.is_zero() {
            return Err(SamplingError::AllRejected);
        }
        let opts = opts.into_iter().map(|(v, p)| (v, p / &mass)).collect();
        Ok(self.pick(opts))
    }

    fn fraction(&mut self) -> Result<u64, SamplingError> {
        self.accounting.fraction_draws += 1;
        let count = 1usize << self.width;
        let c = self.choose(count);
        self.weight *= ratio(1, count as u64);
        Ok(c as u64)
    }

    fn fraction_width(&self) -> u32 {
        self.width
    }

    fn new_real(&mut self) {
        self.accounting.real_draws += 1;
        self.real_lo = BigRational::zero();
        self.real_hi = BigRational::one();
    }

    fn real_below(&mut self, p: &BigRational) -> Result<bool, SamplingError> {
        self.accounting.real_comparisons += 1;
        if *p <= self.real_lo {
            return Ok(false);
        }
        if *p >= self.real_hi {
            return Ok(true);
        }
        let span = &self.real_hi - &self.real_lo;
        if self.choose(2) == 0 {
            self.weight *= (p - &self.real_lo) / span;
            self.real_hi = p.clone();
            Ok(true)
        } else {
            self.weight *= (&self.real_hi - p) / span;
            self.real_lo = p.clone();
            Ok(false)
        }
    }

    fn open_unit(&mut self) -> Result<f64, SamplingError> {
        Err(SamplingError::NotEnumerable("floating-point uniform"))
    }

    fn accounting(&self) -> Accounting {
        self.accounting
    }
}

/// Runs `run` once per path and sums path probabilities by outcome.
pub fn enumerate<O, F>(method: IntegerMethod, width: u32, mut run: F) -> Result<PathDistribution<O>, SamplingError>
where
    O: Ord,
    F: FnMut(&mut PathSource) -> Result<O, SamplingError>,
{
    let mut source = PathSource::new(method, width);
    let mut outcomes = BTreeMap::new();
    let mut paths = 0u64;
    loop {
        source.reset();
        let outcome = run(&mut source)?;
        paths += 1;
        if paths > MAX_PATHS {
            return Err(SamplingError::NotEnumerable("path count above limit"));
        }
        let w = std::mem::replace(&mut source.weight, BigRational::one());
        *outcomes.entry(outcome).or_insert_with(BigRational::zero) += w;
        if !source.advance() {
            break;
        }
    }
    Ok(PathDistribution { outcomes, paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::binomial;
    use crate::sampling::{
        cormen_sample, fisher_yates, pikk, reservoir_r, sample_random_indices, vitter_z,
    };

    fn subsets(n: u64, k: u64) -> u64 {
        binomial(n, k).unwrap().to_string().parse().unwrap()
    }

    #[test]
    fn probabilities_sum_to_one() {
        let d = enumerate(IntegerMethod::Floor, 4, |s| s.uniform_int(5)).unwrap();
        assert_eq!(d.total(), BigRational::one());
        assert!(!d.is_uniform_over(5));
    }

    #[test]
    fn fisher_yates_n4_is_exactly_uniform() {
        let d = enumerate(IntegerMethod::MaskReject, 8, |s| fisher_yates(s, 4)).unwrap();
        assert!(d.is_uniform_over(24));
        assert_eq!(d.paths, 24);
    }

    #[test]
    fn cormen_n5_k2_is_exactly_uniform() {
        let d = enumerate(IntegerMethod::MaskReject, 8, |s| Ok(cormen_sample(s, 5, 2)?.sorted())).unwrap();
        assert!(d.is_uniform_over(subsets(5, 2)));
    }

    #[test]
    fn random_indices_collapse_redraws() {
        let d = enumerate(IntegerMethod::MaskReject, 8, |s| {
            Ok(sample_random_indices(s, 6, 3, false)?.sorted())
        })
        .unwrap();
        assert!(d.is_uniform_over(20));
        assert_eq!(d.paths, 6 * 5 * 4);
    }

    #[test]
    fn reservoirs_are_exactly_uniform() {
        let r = enumerate(IntegerMethod::MaskReject, 8, |s| {
            let mut v = reservoir_r(s, 1..=6u64, 3)?.items;
            v.sort_unstable();
            Ok(v)
        })
        .unwrap();
        assert!(r.is_uniform_over(20));
        let z = enumerate(IntegerMethod::MaskReject, 8, |s| {
            let mut v = vitter_z(s, 1..=6u64, 3)?.items;
            v.sort_unstable();
            Ok(v)
        })
        .unwrap();
        assert!(z.is_uniform_over(20));
    }

    #[test]
    fn pikk_tie_bias_is_exact() {
        // Ties go to the lower index: P({1}) = 1/2 + 2^-(w+1).
        for w in 1..=6u32 {
            let d = enumerate(IntegerMethod::MaskReject, w, |s| pikk(s, 2, 1).map(|x| x.indices)).unwrap();
            assert_eq!(d.outcomes[&vec![1]], ratio(1, 2) + ratio(1, 1 << (w + 1)));
        }
    }

    #[test]
    fn floor_draws_bias_fisher_yates() {
        let d = enumerate(IntegerMethod::Floor, 2, |s| fisher_yates(s, 3)).unwrap();
        assert_eq!(d.total(), BigRational::one());
        assert!(!d.is_uniform_over(6));
    }

    #[test]
    fn open_unit_is_not_enumerable() {
        let mut s = PathSource::new(IntegerMethod::MaskReject, 4);
        assert!(matches!(s.open_unit(), Err(SamplingError::NotEnumerable(_))));
    }
}
