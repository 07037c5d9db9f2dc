//! Exact combinatorics and the pigeonhole, Stirling, entropy and L1 bounds.
//!
//! Counts are arbitrary-precision integers and ratios are exact rationals;
//! floating point only appears when a value is rendered.

mod decimal;
mod inequalities;
mod table1;

pub use decimal::{format_fixed, format_scientific, format_significant, to_f64};
pub use inequalities::{
    binary_entropy, combination_bound_holds, entropy_bounds, stirling_bounds,
    stirling_brackets_factorial, stirling_combination_bound, EntropyBounds, StirlingBounds,
};
pub use table1::{table1_report, Table1, Table1Block};

use std::fmt;
use std::ops::Deref;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("k = {k} exceeds n = {n}")]
    KExceedsN { n: u64, k: u64 },
    #[error("parameter out of domain: {0}")]
    Domain(String),
}

/// Exact nonnegative integer count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(BigUint);

impl BigCount {
    pub fn new(value: BigUint) -> Self {
        BigCount(value)
    }

    pub fn pow2(bits: u64) -> Self {
        BigCount(BigUint::one() << bits)
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.0.clone()))
    }

    /// Decimal digits with thousands separators.
    pub fn grouped(&self) -> String {
        let digits = self.0.to_str_radix(10);
        let mut out = String::with_capacity(digits.len() * 4 / 3);
        for (i, c) in digits.chars().enumerate() {
            if i > 0 && (digits.len() - i) % 3 == 0 {
                out.push(',');
            }
            out.push(c);
        }
        out
    }

    pub fn digits(&self) -> usize {
        self.0.to_str_radix(10).len()
    }

    pub fn scientific(&self, sig: u32) -> String {
        format_scientific(&self.to_rational(), sig)
    }
}

impl Deref for BigCount {
    type Target = BigUint;

    fn deref(&self) -> &BigUint {
        &self.0
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Serialize for BigCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_str_radix(10))
    }
}

pub fn factorial(n: u64) -> BigCount {
    // Multiply balanced halves so the big operands stay similar in size.
    fn product(lo: u64, hi: u64) -> BigUint {
        if hi < lo {
            return BigUint::one();
        }
        if hi - lo < 16 {
            return (lo..=hi).fold(BigUint::one(), |acc, x| acc * x);
        }
        let mid = lo + (hi - lo) / 2;
        product(lo, mid) * product(mid + 1, hi)
    }
    BigCount(product(2, n))
}

pub fn binomial(n: u64, k: u64) -> Result<BigCount, BoundsError> {
    if k > n {
        return Err(BoundsError::KExceedsN { n, k });
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // acc = C(n, i) here, so the division is exact.
        acc = acc * (n - i) / (i + 1);
    }
    Ok(BigCount(acc))
}

pub fn power(n: u64, k: u64) -> BigCount {
    let k = u32::try_from(k).expect("exponent fits in u32");
    BigCount(BigUint::from(n).pow(k))
}

/// Pigeonhole comparison of a `2^state_bits` state space with a number of
/// equally likely outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttainabilityReport {
    pub state_bits: u64,
    pub state_space: BigCount,
    pub target: BigCount,
    /// `min(1, states / target)`.
    #[serde(serialize_with = "serialize_ratio")]
    pub fraction: BigRational,
    /// `2 * max(0, 1 - states / target)`: the L1 distance between uniform on
    /// the targets and any distribution supported on at most `states` of them.
    #[serde(serialize_with = "serialize_ratio")]
    pub l1_lower_bound: BigRational,
}

impl AttainabilityReport {
    pub fn fraction_display(&self) -> String {
        format_significant(&self.fraction, 6)
    }

    pub fn l1_display(&self) -> String {
        format_significant(&self.l1_lower_bound, 6)
    }
}

fn serialize_ratio<S: Serializer>(value: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_significant(value, 6))
}

pub fn attainable_fraction(state_bits: u64, target: &BigCount) -> Result<AttainabilityReport, BoundsError> {
    if state_bits == 0 {
        return Err(BoundsError::Domain("state_bits must be at least 1".into()));
    }
    attainable_fraction_of(BigCount::pow2(state_bits), target).map(|mut r| {
        r.state_bits = state_bits;
        r
    })
}

/// As [`attainable_fraction`] for a state space that is not a power of two;
/// `state_bits` is then `floor(log2(states))`.
pub fn attainable_fraction_of(states: BigCount, target: &BigCount) -> Result<AttainabilityReport, BoundsError> {
    if target.is_zero() {
        return Err(BoundsError::Domain("target must be at least 1".into()));
    }
    let ratio = BigRational::new(
        BigInt::from(states.0.clone()),
        BigInt::from(target.0.clone()),
    );
    let one = BigRational::one();
    let fraction = if ratio > one { one.clone() } else { ratio };
    let l1_lower_bound = (one - &fraction) * BigRational::from_integer(BigInt::from(2));
    Ok(AttainabilityReport {
        state_bits: states.0.bits().saturating_sub(1),
        state_space: states,
        target: target.clone(),
        fraction,
        l1_lower_bound,
    })
}
