//! Simple random samples and permutations.
//!
//! Every algorithm is written against [`Randomness`], which exposes the
//! primitives the algorithms need: uniform integers, raw fraction words,
//! lazily refined uniform reals, and open-interval floats. [`Drawer`]
//! implements it over a [`WordSource`]; [`enumerate::PathSource`] implements
//! it by branching over every outcome so output distributions can be
//! computed exactly.
//!
//! Integer draws default to mask-and-reject. Floor and round are only used
//! when requested with [`Drawer::with_method`].

mod algorithms;
pub mod enumerate;
mod reservoir;

pub use algorithms::{
    cormen_sample, draw_sample, fisher_yates, fisher_yates_in_place, pikk, sample_random_indices,
};
pub use reservoir::{reservoir_r, vitter_z, StreamSample, VITTER_THRESHOLD_FACTOR};

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{GeneratorError, WordSource};
use crate::integers::{randint_mask_counted, IntegerMethod};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("sample size {k} exceeds population {n} without replacement")]
    KExceedsN { n: u64, k: u64 },
    #[error("invalid sample specification: {0}")]
    InvalidSpec(String),
    #[error("{0} cannot be enumerated exactly")]
    NotEnumerable(&'static str),
    #[error("every candidate value was rejected")]
    AllRejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Permute indices by sorting random keys, keep the first k.
    Pikk,
    /// Fisher-Yates shuffle, keep the first k.
    FisherYatesPrefix,
    RandomIndices,
    CormenRecursive,
    ReservoirR,
    VitterZ,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Pikk,
        Algorithm::FisherYatesPrefix,
        Algorithm::RandomIndices,
        Algorithm::CormenRecursive,
        Algorithm::ReservoirR,
        Algorithm::VitterZ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pikk => "pikk",
            Algorithm::FisherYatesPrefix => "fisher-yates",
            Algorithm::RandomIndices => "random-indices",
            Algorithm::CormenRecursive => "cormen",
            Algorithm::ReservoirR => "reservoir-r",
            Algorithm::VitterZ => "vitter-z",
        }
    }

    pub fn supports_replacement(self) -> bool {
        self == Algorithm::RandomIndices
    }

    pub fn is_streaming(self) -> bool {
        matches!(self, Algorithm::ReservoirR | Algorithm::VitterZ)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = SamplingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized = s.replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == normalized)
            .or(match normalized.as_str() {
                "fisher-yates-prefix" => Some(Algorithm::FisherYatesPrefix),
                "cormen-recursive" => Some(Algorithm::CormenRecursive),
                _ => None,
            })
            .ok_or_else(|| SamplingError::InvalidSpec(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n: u64,
    pub k: u64,
    pub with_replacement: bool,
    pub algorithm: Algorithm,
}

impl SampleSpec {
    pub fn new(n: u64, k: u64, with_replacement: bool, algorithm: Algorithm) -> Result<Self, SamplingError> {
        let spec = SampleSpec {
            n,
            k,
            with_replacement,
            algorithm,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.n == 0 {
            return Err(SamplingError::InvalidSpec("population must be nonempty".into()));
        }
        if self.with_replacement && !self.algorithm.supports_replacement() {
            return Err(SamplingError::InvalidSpec(format!(
                "{} samples without replacement only",
                self.algorithm
            )));
        }
        if !self.with_replacement && self.k > self.n {
            return Err(SamplingError::KExceedsN {
                n: self.n,
                k: self.k,
            });
        }
        if self.algorithm.is_streaming() && self.k == 0 {
            return Err(SamplingError::InvalidSpec(
                "reservoir size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Randomness consumed by a draw.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accounting {
    /// Words taken from the generator.
    pub words: u64,
    /// Bits actually used, including rejected attempts.
    pub bits: u64,
    pub int_draws: u64,
    pub fraction_draws: u64,
    /// Fresh uniform reals started.
    pub real_draws: u64,
    pub real_comparisons: u64,
    pub unit_draws: u64,
}

/// Indices drawn from `{1..n}`, with the randomness used to draw them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sample {
    /// In the order the algorithm produced them.
    pub indices: Vec<u64>,
    pub accounting: Accounting,
}

impl Sample {
    pub fn sorted(&self) -> Vec<u64> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v
    }
}

/// Randomness primitives used by the sampling algorithms.
pub trait Randomness {
    /// Integer on `{1..m}`.
    fn uniform_int(&mut self, m: u64) -> Result<u64, SamplingError>;

    /// Integer on `{1..m}` conditioned on `reject` being false, by redrawing.
    fn uniform_int_rejecting(
        &mut self,
        m: u64,
        reject: &dyn Fn(u64) -> bool,
    ) -> Result<u64, SamplingError> {
        loop {
            let v = self.uniform_int(m)?;
            if !reject(v) {
                return Ok(v);
            }
        }
    }

    /// A raw word, read as the fraction `word / 2^fraction_width()`.
    fn fraction(&mut self) -> Result<u64, SamplingError>;

    fn fraction_width(&self) -> u32;

    /// Starts a fresh uniform real `V` on `[0, 1)`.
    fn new_real(&mut self);

    /// Whether the current real `V` is below `p`. Repeated comparisons refer
    /// to the same `V`.
    fn real_below(&mut self, p: &BigRational) -> Result<bool, SamplingError>;

    /// Float on the open interval `(0, 1)`.
    fn open_unit(&mut self) -> Result<f64, SamplingError>;

    fn accounting(&self) -> Accounting;
}

impl<R: Randomness + ?Sized> Randomness for &mut R {
    fn uniform_int(&mut self, m: u64) -> Result<u64, SamplingError> {
        (**self).uniform_int(m)
    }

    fn uniform_int_rejecting(
        &mut self,
        m: u64,
        reject: &dyn Fn(u64) -> bool,
    ) -> Result<u64, SamplingError> {
        (**self).uniform_int_rejecting(m, reject)
    }

    fn fraction(&mut self) -> Result<u64, SamplingError> {
        (**self).fraction()
    }

    fn fraction_width(&self) -> u32 {
        (**self).fraction_width()
    }

    fn new_real(&mut self) {
        (**self).new_real()
    }

    fn real_below(&mut self, p: &BigRational) -> Result<bool, SamplingError> {
        (**self).real_below(p)
    }

    fn open_unit(&mut self) -> Result<f64, SamplingError> {
        (**self).open_unit()
    }

    fn accounting(&self) -> Accounting {
        (**self).accounting()
    }
}

/// [`Randomness`] over a generator.
pub struct Drawer<'g, G: WordSource + ?Sized> {
    generator: &'g mut G,
    method: IntegerMethod,
    start_words: u64,
    accounting: Accounting,
    /// Bits of the current real generated so far, most significant first.
    real_bits: Vec<bool>,
    real_word: u64,
    real_available: u32,
}

impl<'g, G: WordSource + ?Sized> Drawer<'g, G> {
    /// Mask-and-reject integers.
    pub fn new(generator: &'g mut G) -> Self {
        Self::with_method(generator, IntegerMethod::MaskReject)
    }

    pub fn with_method(generator: &'g mut G, method: IntegerMethod) -> Self {
        let start_words = generator.words_emitted();
        Drawer {
            generator,
            method,
            start_words,
            accounting: Accounting::default(),
            real_bits: Vec::new(),
            real_word: 0,
            real_available: 0,
        }
    }

    pub fn method(&self) -> IntegerMethod {
        self.method
    }

    fn next_real_bit(&mut self) -> Result<bool, SamplingError> {
        if self.real_available == 0 {
            self.real_word = self.generator.next_word()?;
            self.real_available = self.generator.width();
        }
        self.real_available -= 1;
        self.accounting.bits += 1;
        Ok((self.real_word >> self.real_available) & 1 == 1)
    }
}

impl<G: WordSource + ?Sized> Randomness for Drawer<'_, G> {
    fn uniform_int(&mut self, m: u64) -> Result<u64, SamplingError> {
        assert!(m >= 1, "range must be at least 1");
        self.accounting.int_draws += 1;
        let value = match self.method {
            IntegerMethod::MaskReject => {
                let (value, bits) = randint_mask_counted(self.generator, m)?;
                self.accounting.bits += bits;
                value
            }
            method => {
                self.accounting.bits += self.generator.width() as u64;
                method.draw(self.generator, m)?
            }
        };
        Ok(value)
    }

    fn fraction(&mut self) -> Result<u64, SamplingError> {
        self.accounting.fraction_draws += 1;
        self.accounting.bits += self.generator.width() as u64;
        Ok(self.generator.next_word()?)
    }

    fn fraction_width(&self) -> u32 {
        self.generator.width()
    }

    fn new_real(&mut self) {
        self.accounting.real_draws += 1;
        self.real_bits.clear();
        self.real_available = 0;
    }

    fn real_below(&mut self, p: &BigRational) -> Result<bool, SamplingError> {
        self.accounting.real_comparisons += 1;
        if !p.is_positive() {
            return Ok(false);
        }
        if *p >= BigRational::one() {
            return Ok(true);
        }
        // Walk the binary expansion of p against the bits of V.
        let den: BigUint = p.denom().to_biguint().expect("positive");
        let mut rem: BigUint = p.numer().to_biguint().expect("positive");
        let mut i = 0;
        loop {
            if rem.is_zero() {
                // p's expansion has ended; V >= p.
                return Ok(false);
            }
            rem <<= 1;
            let p_bit = rem >= den;
            if p_bit {
                rem -= &den;
            }
            if i == self.real_bits.len() {
                let bit = self.next_real_bit()?;
                self.real_bits.push(bit);
            }
            let v_bit = self.real_bits[i];
            if v_bit != p_bit {
                return Ok(p_bit);
            }
            i += 1;
        }
    }

    fn open_unit(&mut self) -> Result<f64, SamplingError> {
        self.accounting.unit_draws += 1;
        // 53 random bits, redrawn on zero.
        loop {
            let mut value = 0u64;
            let mut have = 0u32;
            while have < 53 {
                let word = self.generator.next_word()?;
                let width = self.generator.width();
                let take = width.min(53 - have);
                value = (value << take) | (word >> (width - take));
                have += take;
                self.accounting.bits += take as u64;
            }
            if value != 0 {
                return Ok(value as f64 / (1u64 << 53) as f64);
            }
        }
    }

    fn accounting(&self) -> Accounting {
        Accounting {
            words: self.generator.words_emitted() - self.start_words,
            ..self.accounting
        }
    }
}

pub(crate) fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{GeneratorSpec, Scripted};

    #[test]
    fn algorithm_names_parse() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("fisher_yates_prefix".parse::<Algorithm>().unwrap(), Algorithm::FisherYatesPrefix);
        assert!("floyd".parse::<Algorithm>().is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SampleSpec::new(5, 6, false, Algorithm::RandomIndices).is_err());
        assert!(SampleSpec::new(5, 6, true, Algorithm::RandomIndices).is_ok());
        assert!(SampleSpec::new(5, 2, true, Algorithm::Pikk).is_err());
        assert!(SampleSpec::new(0, 0, false, Algorithm::Pikk).is_err());
        assert!(SampleSpec::new(5, 0, false, Algorithm::ReservoirR).is_err());
    }

    #[test]
    fn real_comparisons_share_one_value() {
        // V = 0.1011... in binary = 0.6875+
        let mut s = Scripted::from_bits(&[1, 0, 1, 1, 0, 0, 0, 0]).unwrap();
        let mut d = Drawer::new(&mut s);
        d.new_real();
        assert!(!d.real_below(&ratio(1, 2)).unwrap());
        assert!(d.real_below(&ratio(3, 4)).unwrap());
        assert!(!d.real_below(&ratio(11, 16)).unwrap());
        assert!(d.real_below(&ratio(7, 10)).unwrap());
        assert!(d.real_below(&ratio(1, 1)).unwrap());
        assert!(!d.real_below(&ratio(0, 1)).unwrap());
    }

    #[test]
    fn real_comparison_probability_matches_threshold() {
        let mut g = GeneratorSpec::hash("real-compare").build().unwrap();
        let mut d = Drawer::new(&mut g);
        let p = ratio(2, 7);
        let trials = 20_000;
        let mut below = 0;
        for _ in 0..trials {
            d.new_real();
            if d.real_below(&p).unwrap() {
                below += 1;
            }
        }
        let freq = below as f64 / trials as f64;
        assert!((freq - 2.0 / 7.0).abs() < 0.015, "{freq}");
        // About two bits per comparison.
        assert!(d.accounting().bits < 3 * trials);
    }

    #[test]
    fn open_unit_stays_open() {
        let mut s = Scripted::new(32, vec![0, 0, 0x8000_0000, 0]).unwrap();
        let mut d = Drawer::new(&mut s);
        let u = d.open_unit().unwrap();
        assert_eq!(u, 0.5);
        let mut g = GeneratorSpec::Mt19937 { seed: 1 }.build().unwrap();
        let mut d = Drawer::new(&mut g);
        for _ in 0..1000 {
            let u = d.open_unit().unwrap();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn accounting_tracks_words_and_bits() {
        let mut s = Scripted::new(4, vec![0b1110, 0b1000]).unwrap();
        let mut d = Drawer::new(&mut s);
        // m = 5: 111 is rejected, then 0|10 = 2 is accepted.
        let v = d.uniform_int(5).unwrap();
        let acct = d.accounting();
        assert_eq!(acct.int_draws, 1);
        assert_eq!(acct.bits, 6);
        assert_eq!(acct.words, 2);
        assert_eq!(v, 3);
    }
}
