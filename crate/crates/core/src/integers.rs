//! Mapping generator words to integers on `{1..m}`.
//!
//! Three methods are provided:
//!
//! * **floor**: `1 + floor(m * word / 2^w)`, the textbook method. Biased
//!   unless `m` divides `2^w`; values become unreachable once `m > 2^w`.
//! * **round**: the nearest integer to `m * word / 2^w`, halves rounding up.
//!   Its raw range is `{0..m}` with the two endpoints receiving about half
//!   the mass of interior values. [`randint_round`] clamps 0 up to 1 so it
//!   can feed the samplers; [`exact_distribution`] reports the raw range.
//! * **mask-and-reject**: take `mu = bitlen(m - 1)` bits most significant
//!   first, reject values above `m - 1`. Exactly uniform if the bits are.
//!
//! All kernels use integer arithmetic. Bits left over from a word are kept
//! for the next attempt inside one mask-and-reject draw and dropped when the
//! draw returns, so the words consumed by a draw depend only on `m` and the
//! word stream.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{GeneratorError, WordSource};

/// Largest width [`exact_distribution`] will enumerate.
pub const MAX_EXACT_WIDTH: u32 = 24;
/// Largest range [`exact_distribution`] will tabulate.
pub const MAX_EXACT_RANGE: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegerMethod {
    Floor,
    Round,
    MaskReject,
}

impl IntegerMethod {
    pub const ALL: [IntegerMethod; 3] = [
        IntegerMethod::Floor,
        IntegerMethod::Round,
        IntegerMethod::MaskReject,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntegerMethod::Floor => "floor",
            IntegerMethod::Round => "round",
            IntegerMethod::MaskReject => "mask_reject",
        }
    }

    /// Draws a value on `{1..m}` (round is clamped).
    pub fn draw<S: WordSource + ?Sized>(self, source: &mut S, m: u64) -> Result<u64, GeneratorError> {
        match self {
            IntegerMethod::Floor => randint_floor(source, m),
            IntegerMethod::Round => randint_round(source, m),
            IntegerMethod::MaskReject => randint_mask(source, m),
        }
    }
}

impl fmt::Display for IntegerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntegerMethod {
    type Err = IntegerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "floor" => Ok(IntegerMethod::Floor),
            "round" => Ok(IntegerMethod::Round),
            "mask" | "mask_reject" | "mask-reject" => Ok(IntegerMethod::MaskReject),
            other => Err(IntegerError::UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntegerError {
    #[error("range must be at least 1")]
    EmptyRange,
    #[error("width {0} is too large to enumerate (limit {MAX_EXACT_WIDTH})")]
    WidthTooLarge(u32),
    #[error("width must be at least 1")]
    ZeroWidth,
    #[error("range {0} is too large to tabulate (limit {MAX_EXACT_RANGE})")]
    RangeTooLarge(u64),
    #[error("unknown integer method {0:?}")]
    UnknownMethod(String),
    #[error("multiplier too wide for exact arithmetic at this word width")]
    Overflow,
}

/// Number of values in `{1..m}` that floor or round can never produce from
/// `w`-bit words: `m - 2^w` when `m > 2^w`, else 0.
pub fn unreachable_values(width: u32, m: u64) -> u64 {
    if width >= 64 {
        return 0;
    }
    m.saturating_sub(1u64 << width)
}

/// Bits per mask-and-reject attempt: the bit length of `m - 1`.
pub fn mask_bits(m: u64) -> u32 {
    assert!(m >= 1);
    64 - (m - 1).leading_zeros()
}

pub fn floor_kernel(word: u64, width: u32, m: u64) -> u64 {
    1 + ((m as u128 * word as u128) >> width) as u64
}

/// `1 + floor(numer * word / (denom * 2^w))`: the floor method with a
/// rational multiplier `numer / denom` in place of an integer `m`.
pub fn floor_kernel_scaled(word: u64, width: u32, numer: u128, denom: u128) -> Result<u64, IntegerError> {
    let top = numer.checked_mul(word as u128).ok_or(IntegerError::Overflow)?;
    let bottom = denom
        .checked_mul(1u128 << width)
        .ok_or(IntegerError::Overflow)?;
    Ok(1 + (top / bottom) as u64)
}

/// Nearest integer to `m * word / 2^w`, halves up; raw range `{0..m}`.
pub fn round_kernel(word: u64, width: u32, m: u64) -> u64 {
    let half = 1u128 << (width - 1);
    ((m as u128 * word as u128 + half) >> width) as u64
}

pub fn randint_floor<S: WordSource + ?Sized>(source: &mut S, m: u64) -> Result<u64, GeneratorError> {
    assert!(m >= 1, "range must be at least 1");
    let word = source.next_word()?;
    Ok(floor_kernel(word, source.width(), m))
}

/// Floor method with a rational multiplier; see [`floor_kernel_scaled`].
pub fn randint_floor_scaled<S: WordSource + ?Sized>(
    source: &mut S,
    numer: u128,
    denom: u128,
) -> Result<u64, GeneratorError> {
    let word = source.next_word()?;
    floor_kernel_scaled(word, source.width(), numer, denom)
        .map_err(|e| GeneratorError::InvalidParams(e.to_string()))
}

/// Textbook floating-point floor: `1 + floor(m * (word / 2^w))` in `f64`.
/// Only for demonstrating what naive code computes.
pub fn randint_floor_f64<S: WordSource + ?Sized>(source: &mut S, m: u64) -> Result<u64, GeneratorError> {
    let word = source.next_word()?;
    let x = word as f64 / 2f64.powi(source.width() as i32);
    Ok(1 + (m as f64 * x).floor() as u64)
}

/// Round method clamped to `{1..m}`.
pub fn randint_round<S: WordSource + ?Sized>(source: &mut S, m: u64) -> Result<u64, GeneratorError> {
    assert!(m >= 1, "range must be at least 1");
    let word = source.next_word()?;
    Ok(round_kernel(word, source.width(), m).max(1))
}

pub fn randint_mask<S: WordSource + ?Sized>(source: &mut S, m: u64) -> Result<u64, GeneratorError> {
    randint_mask_counted(source, m).map(|(value, _)| value)
}

/// [`randint_mask`] that also reports how many bits the draw consumed,
/// rejected attempts included.
pub fn randint_mask_counted<S: WordSource + ?Sized>(
    source: &mut S,
    m: u64,
) -> Result<(u64, u64), GeneratorError> {
    assert!(m >= 1, "range must be at least 1");
    if m == 1 {
        return Ok((1, 0));
    }
    let bits = mask_bits(m);
    let mut reader = BitReader::new(source);
    loop {
        let candidate = reader.take(bits)?;
        if candidate <= m - 1 {
            return Ok((candidate + 1, reader.consumed()));
        }
    }
}

/// Most-significant-first bit stream over a word source.
pub struct BitReader<'a, S: WordSource + ?Sized> {
    source: &'a mut S,
    buffer: u64,
    available: u32,
    consumed: u64,
}

impl<'a, S: WordSource + ?Sized> BitReader<'a, S> {
    pub fn new(source: &'a mut S) -> Self {
        BitReader {
            source,
            buffer: 0,
            available: 0,
            consumed: 0,
        }
    }

    /// Bits handed out so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn take(&mut self, count: u32) -> Result<u64, GeneratorError> {
        assert!(count <= 64);
        let mut out: u128 = 0;
        let mut needed = count;
        while needed > 0 {
            if self.available == 0 {
                self.buffer = self.source.next_word()?;
                self.available = self.source.width();
            }
            let chunk = needed.min(self.available);
            let shift = self.available - chunk;
            let bits = (self.buffer as u128 >> shift) & ((1u128 << chunk) - 1);
            out = (out << chunk) | bits;
            self.available -= chunk;
            needed -= chunk;
        }
        self.consumed += count as u64;
        Ok(out as u64)
    }
}

/// Exact distribution of a method's output over all `2^w` equally likely words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntDistribution {
    pub method: IntegerMethod,
    pub width: u32,
    pub m: u64,
    /// Smallest value in the support: 0 for round, else 1.
    pub first_value: u64,
    /// `numerators[i]` is the weight of `first_value + i`.
    pub numerators: Vec<u64>,
    pub denominator: u64,
}

impl IntDistribution {
    pub fn values(&self) -> impl Iterator<Item = (u64, Ratio<u64>)> + '_ {
        self.numerators
            .iter()
            .enumerate()
            .map(|(i, &n)| (self.first_value + i as u64, Ratio::new(n, self.denominator)))
    }

    pub fn probability(&self, value: u64) -> Ratio<u64> {
        value
            .checked_sub(self.first_value)
            .and_then(|i| self.numerators.get(i as usize))
            .map_or(Ratio::from_integer(0), |&n| Ratio::new(n, self.denominator))
    }

    /// Largest over smallest probability on `{1..m}`; `None` when some value
    /// in `{1..m}` has probability zero.
    pub fn max_min_ratio(&self) -> Option<Ratio<u64>> {
        let probs: Vec<Ratio<u64>> = (1..=self.m).map(|v| self.probability(v)).collect();
        let max = *probs.iter().max()?;
        let min = *probs.iter().min()?;
        if *min.numer() == 0 {
            return None;
        }
        Some(max / min)
    }

    /// CSV with columns `value,numerator,denominator`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,numerator,denominator\n");
        for (i, n) in self.numerators.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.first_value + i as u64, n, self.denominator));
        }
        out
    }
}

/// Enumerates every `w`-bit word (floor, round) or every `mu`-bit attempt
/// (mask-and-reject, normalized over accepted attempts).
pub fn exact_distribution(method: IntegerMethod, width: u32, m: u64) -> Result<IntDistribution, IntegerError> {
    if m == 0 {
        return Err(IntegerError::EmptyRange);
    }
    if width == 0 {
        return Err(IntegerError::ZeroWidth);
    }
    if width > MAX_EXACT_WIDTH {
        return Err(IntegerError::WidthTooLarge(width));
    }
    if m > MAX_EXACT_RANGE {
        return Err(IntegerError::RangeTooLarge(m));
    }
    let words = 1u64 << width;
    let (first_value, numerators, denominator) = match method {
        IntegerMethod::Floor => {
            let mut counts = vec![0u64; m as usize];
            for word in 0..words {
                counts[(floor_kernel(word, width, m) - 1) as usize] += 1;
            }
            (1, counts, words)
        }
        IntegerMethod::Round => {
            let mut counts = vec![0u64; m as usize + 1];
            for word in 0..words {
                counts[round_kernel(word, width, m) as usize] += 1;
            }
            (0, counts, words)
        }
        IntegerMethod::MaskReject => {
            let bits = mask_bits(m);
            let mut counts = vec![0u64; m as usize];
            if bits == 0 {
                counts[0] = 1;
            } else {
                for pattern in 0..1u64 << bits {
                    let mut one_attempt = crate::generators::Scripted::new(bits, vec![pattern])
                        .expect("pattern fits in mu bits");
                    if let Ok(v) = randint_mask(&mut one_attempt, m) {
                        counts[(v - 1) as usize] += 1;
                    }
                }
            }
            // Rejected attempts restart from identical conditions, so the
            // geometric series over rejections normalizes by the accepted mass.
            let accepted = counts.iter().sum();
            (1, counts, accepted)
        }
    };
    Ok(IntDistribution {
        method,
        width,
        m,
        first_value,
        numerators,
        denominator,
    })
}

/// `sum_{i=0}^{n-1} floor((a*i + b) / c)`, in `O(log)` steps.
pub fn floor_sum(n: u128, c: u128, mut a: u128, mut b: u128) -> u128 {
    assert!(c > 0);
    let mut total = 0u128;
    let (mut n, mut c) = (n, c);
    loop {
        if a >= c {
            total += (n * n.saturating_sub(1) / 2) * (a / c);
            a %= c;
        }
        if b >= c {
            total += n * (b / c);
            b %= c;
        }
        let y_max = a * n + b;
        if y_max < c {
            break;
        }
        n = y_max / c;
        b = y_max % c;
        std::mem::swap(&mut c, &mut a);
    }
    total
}

/// Number of `w`-bit words for which `1 + floor(numer * word / (denom * 2^w))`
/// is even, computed without enumeration.
pub fn floor_scaled_even_count(width: u32, numer: u128, denom: u128) -> u128 {
    let n = 1u128 << width;
    let c = denom << width;
    // floor(t) is odd exactly when floor(t) - 2 floor(t / 2) = 1.
    floor_sum(n, c, numer, 0) - 2 * floor_sum(n, 2 * c, numer, 0)
}

/// Number of `w`-bit words for which the clamped round method on `{1..m}`
/// returns an even value, computed without enumeration.
pub fn round_even_count(width: u32, m: u64) -> u128 {
    let n = 1u128 << width;
    let c = 1u128 << width;
    let half = 1u128 << (width - 1);
    let m = m as u128;
    let odd_raw = floor_sum(n, c, m, half) - 2 * floor_sum(n, 2 * c, m, half);
    // Raw zeros (words with m*x + half < 2^w) are clamped to 1.
    let zeros = (c - half).div_ceil(m).min(n);
    n - odd_raw - zeros
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Scripted;

    fn dist_counts(method: IntegerMethod, width: u32, m: u64) -> Vec<u64> {
        exact_distribution(method, width, m).unwrap().numerators
    }

    #[test]
    fn round_even_count_matches_enumeration() {
        for width in 1..=10u32 {
            for m in 1..=40u64 {
                let brute = (0..1u64 << width)
                    .filter(|&x| round_kernel(x, width, m).max(1) % 2 == 0)
                    .count() as u128;
                assert_eq!(round_even_count(width, m), brute, "w={width} m={m}");
            }
        }
    }

    #[test]
    fn floor_traced_word() {
        let mut s = Scripted::new(3, vec![7]).unwrap();
        assert_eq!(randint_floor(&mut s, 3).unwrap(), 3);
        assert_eq!(s.words_emitted(), 1);
    }

    #[test]
    fn floor_width3_range3() {
        assert_eq!(dist_counts(IntegerMethod::Floor, 3, 3), vec![3, 3, 2]);
    }

    #[test]
    fn floor_width16_range1000() {
        let d = exact_distribution(IntegerMethod::Floor, 16, 1000).unwrap();
        assert!(d.numerators.iter().all(|&c| c == 65 || c == 66));
        assert_eq!(d.max_min_ratio(), Some(Ratio::new(66, 65)));
    }

    #[test]
    fn floor_ratio_two_at_32769() {
        let d = exact_distribution(IntegerMethod::Floor, 16, 32769).unwrap();
        assert_eq!(d.max_min_ratio(), Some(Ratio::from_integer(2)));
    }

    #[test]
    fn round_endpoints_get_half_mass() {
        let mut s = Scripted::new(3, vec![0]).unwrap();
        assert_eq!(randint_round(&mut s, 4).unwrap(), 1);
        assert_eq!(dist_counts(IntegerMethod::Round, 3, 4), vec![1, 2, 2, 2, 1]);
    }

    #[test]
    fn round_is_identity_when_m_is_2w_while_floor_shifts() {
        for word in 0..8 {
            assert_eq!(round_kernel(word, 3, 8), word);
            assert_eq!(floor_kernel(word, 3, 8), word + 1);
        }
    }

    #[test]
    fn mask_m5_accepts_five_of_eight() {
        assert_eq!(mask_bits(5), 3);
        let d = exact_distribution(IntegerMethod::MaskReject, 8, 5).unwrap();
        assert_eq!(d.numerators, vec![1; 5]);
        assert_eq!(d.denominator, 5);
        for pattern in 0..8u64 {
            let mut s = Scripted::new(3, vec![pattern]).unwrap();
            let r = randint_mask(&mut s, 5);
            if pattern <= 4 {
                assert_eq!(r.unwrap(), pattern + 1);
            } else {
                assert!(r.is_err());
            }
        }
    }

    #[test]
    fn mask_m1_consumes_nothing() {
        let mut s = Scripted::new(8, vec![]).unwrap();
        assert_eq!(randint_mask(&mut s, 1).unwrap(), 1);
        assert_eq!(s.words_emitted(), 0);
    }

    #[test]
    fn mask_traced_bit_stream() {
        let mut s = Scripted::from_bits(&[1, 1, 1, 0]).unwrap();
        assert_eq!(randint_mask(&mut s, 3).unwrap(), 3);
        assert_eq!(s.words_emitted(), 4);
        // Same bits packed in one 4-bit word.
        let mut s = Scripted::new(4, vec![0b1110]).unwrap();
        assert_eq!(randint_mask(&mut s, 3).unwrap(), 3);
    }

    #[test]
    fn mask_drops_leftover_bits_between_calls() {
        // m = 2 needs one bit; each call takes a fresh word.
        let mut s = Scripted::new(8, vec![0b1000_0000, 0b0111_1111]).unwrap();
        assert_eq!(randint_mask(&mut s, 2).unwrap(), 2);
        assert_eq!(randint_mask(&mut s, 2).unwrap(), 1);
    }

    #[test]
    fn mask_pools_bits_across_words_within_a_call() {
        // mu = 3 from 2-bit words: 11|1 is rejected (7); the second attempt
        // reads the leftover 0 of word 2 and both bits of word 3: 001.
        let mut s = Scripted::new(2, vec![0b11, 0b10, 0b01]).unwrap();
        assert_eq!(randint_mask(&mut s, 5).unwrap(), 2);
        assert_eq!(s.words_emitted(), 3);
    }

    #[test]
    fn mask_wide_range_spans_words() {
        let mut s = Scripted::new(8, vec![0x01, 0x02]).unwrap();
        // m - 1 = 0x1ff needs 9 bits: 00000001 0 -> 2
        assert_eq!(randint_mask(&mut s, 0x200).unwrap(), 3);
    }

    #[test]
    fn mask_uniform_for_small_ranges() {
        for m in 1..=64u64 {
            let d = exact_distribution(IntegerMethod::MaskReject, 8, m).unwrap();
            assert!(d.numerators.iter().all(|&c| c == 1));
            assert_eq!(d.denominator, m);
        }
    }

    #[test]
    fn mask_cyclic_enumeration_is_exactly_uniform() {
        for m in 2..=64u64 {
            let bits = mask_bits(m);
            let patterns: Vec<u64> = (0..(1u64 << bits)).collect();
            let mut s = Scripted::new(bits, patterns.repeat(3)).unwrap();
            let mut counts = vec![0u64; m as usize];
            while s.remaining() > 0 {
                match randint_mask(&mut s, m) {
                    Ok(v) => counts[(v - 1) as usize] += 1,
                    Err(_) => break,
                }
            }
            assert!(counts.iter().all(|&c| c == counts[0]), "m={m}: {counts:?}");
        }
    }

    #[test]
    fn floor_is_biased_off_powers_of_two() {
        for m in 3..=64u64 {
            if m.is_power_of_two() {
                continue;
            }
            let d = exact_distribution(IntegerMethod::Floor, 16, m).unwrap();
            let ratio = d.max_min_ratio().unwrap();
            assert!(ratio > Ratio::from_integer(1), "m={m}");
        }
    }

    #[test]
    fn floor_and_mask_agree_on_powers_of_two() {
        for width in [4u32, 8, 12] {
            for shift in 0..=width {
                let m = 1u64 << shift;
                let floor = exact_distribution(IntegerMethod::Floor, width, m).unwrap();
                let mask = exact_distribution(IntegerMethod::MaskReject, width, m).unwrap();
                for v in 1..=m {
                    assert_eq!(floor.probability(v), mask.probability(v));
                    assert_eq!(floor.probability(v), Ratio::new(1, m));
                }
            }
        }
    }

    #[test]
    fn distributions_sum_to_one() {
        for method in IntegerMethod::ALL {
            for (w, m) in [(3, 3), (8, 10), (10, 7), (5, 40)] {
                let d = exact_distribution(method, w, m).unwrap();
                let total: Ratio<u64> = d.values().map(|(_, p)| p).sum();
                assert_eq!(total, Ratio::from_integer(1), "{method} w={w} m={m}");
            }
        }
    }

    #[test]
    fn oversized_range_leaves_values_unreachable() {
        assert_eq!(unreachable_values(3, 10), 2);
        assert_eq!(unreachable_values(32, 1 << 31), 0);
        let d = exact_distribution(IntegerMethod::Floor, 3, 10).unwrap();
        assert_eq!(d.numerators.iter().filter(|&&c| c == 0).count(), 2);
        assert_eq!(d.max_min_ratio(), None);
    }

    #[test]
    fn exact_distribution_errors() {
        assert_eq!(
            exact_distribution(IntegerMethod::Floor, 25, 3),
            Err(IntegerError::WidthTooLarge(25))
        );
        assert_eq!(exact_distribution(IntegerMethod::Floor, 8, 0), Err(IntegerError::EmptyRange));
        assert_eq!(exact_distribution(IntegerMethod::Floor, 0, 3), Err(IntegerError::ZeroWidth));
    }

    #[test]
    fn floor_sum_matches_direct_sum() {
        for n in 0..30u128 {
            for c in 1..12u128 {
                for a in 0..15u128 {
                    for b in 0..7u128 {
                        let direct: u128 = (0..n).map(|i| (a * i + b) / c).sum();
                        assert_eq!(floor_sum(n, c, a, b), direct, "n={n} c={c} a={a} b={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn scaled_parity_matches_enumeration() {
        for width in 4..=16u32 {
            let numer = 2u128 << width;
            let mut even = 0u128;
            for word in 0..(1u64 << width) {
                if floor_kernel_scaled(word, width, numer, 5).unwrap() % 2 == 0 {
                    even += 1;
                }
            }
            assert_eq!(floor_scaled_even_count(width, numer, 5), even, "w={width}");
        }
    }

    #[test]
    fn integer_multiplier_near_two_fifths_is_not_biased_in_parity() {
        // With m = floor(2^(w+1) / 5) held as an integer, the floor method
        // splits parity evenly; the 2/5 effect needs the real multiplier.
        for width in [12u32, 16, 20] {
            let m = (2u128 << width) / 5;
            let even = floor_scaled_even_count(width, m, 1);
            assert_eq!(even * 2, 1u128 << width, "w={width}");
        }
    }

    #[test]
    fn parse_method_names() {
        assert_eq!("mask".parse::<IntegerMethod>().unwrap(), IntegerMethod::MaskReject);
        assert_eq!("floor".parse::<IntegerMethod>().unwrap(), IntegerMethod::Floor);
        assert!("nearest".parse::<IntegerMethod>().is_err());
    }
}
