//! Deterministic word emitters.
//!
//! Every generator is a finite-state machine that emits unsigned words of a
//! fixed bit width. Cloning a generator snapshots its state: the clone and the
//! original emit identical sequences from that point on.

mod hash_counter;
mod lcg;
mod mt19937;
mod scripted;
mod seed;
mod wichmann_hill;

pub use hash_counter::{digest_words, hash_prng_output, HashCounter, HashFunction, DIGEST_BITS};
pub use lcg::{full_period, Lcg, LcgParams, RANDU};
pub use mt19937::Mt19937;
pub use scripted::Scripted;
pub use seed::Seed;
pub use wichmann_hill::{WichmannHill, WH_MODULI, WH_MULTIPLIERS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("scripted source exhausted after {emitted} words")]
    Exhausted { emitted: u64 },
    #[error("hash-counter seed must not be empty")]
    EmptySeed,
    #[error("seed {seed} out of range for {variant}: {reason}")]
    SeedOutOfRange {
        variant: &'static str,
        seed: String,
        reason: String,
    },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A source of fixed-width unsigned words.
pub trait WordSource {
    /// Bits per emitted word, in `1..=64`.
    fn width(&self) -> u32;

    /// Emits the next word; the value is always `< 2^width`.
    fn next_word(&mut self) -> Result<u64, GeneratorError>;

    /// Number of words emitted since seeding.
    fn words_emitted(&self) -> u64;
}

impl<T: WordSource + ?Sized> WordSource for &mut T {
    fn width(&self) -> u32 {
        (**self).width()
    }

    fn next_word(&mut self) -> Result<u64, GeneratorError> {
        (**self).next_word()
    }

    fn words_emitted(&self) -> u64 {
        (**self).words_emitted()
    }
}

impl<T: WordSource + ?Sized> WordSource for Box<T> {
    fn width(&self) -> u32 {
        (**self).width()
    }

    fn next_word(&mut self) -> Result<u64, GeneratorError> {
        (**self).next_word()
    }

    fn words_emitted(&self) -> u64 {
        (**self).words_emitted()
    }
}

/// Generator family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Lcg,
    WichmannHill,
    Mt19937,
    HashCounter,
    Scripted,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Lcg => "lcg",
            Variant::WichmannHill => "wichmann_hill",
            Variant::Mt19937 => "mt19937",
            Variant::HashCounter => "hash_counter",
            Variant::Scripted => "scripted",
        }
    }
}

/// Any of the supported generators behind one type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    Lcg(Lcg),
    WichmannHill(WichmannHill),
    Mt19937(Box<Mt19937>),
    HashCounter(HashCounter),
    Scripted(Scripted),
}

impl Generator {
    pub fn variant(&self) -> Variant {
        match self {
            Generator::Lcg(_) => Variant::Lcg,
            Generator::WichmannHill(_) => Variant::WichmannHill,
            Generator::Mt19937(_) => Variant::Mt19937,
            Generator::HashCounter(_) => Variant::HashCounter,
            Generator::Scripted(_) => Variant::Scripted,
        }
    }
}

impl WordSource for Generator {
    fn width(&self) -> u32 {
        match self {
            Generator::Lcg(g) => g.width(),
            Generator::WichmannHill(g) => g.width(),
            Generator::Mt19937(g) => g.width(),
            Generator::HashCounter(g) => g.width(),
            Generator::Scripted(g) => g.width(),
        }
    }

    fn next_word(&mut self) -> Result<u64, GeneratorError> {
        match self {
            Generator::Lcg(g) => g.next_word(),
            Generator::WichmannHill(g) => g.next_word(),
            Generator::Mt19937(g) => g.next_word(),
            Generator::HashCounter(g) => g.next_word(),
            Generator::Scripted(g) => g.next_word(),
        }
    }

    fn words_emitted(&self) -> u64 {
        match self {
            Generator::Lcg(g) => g.words_emitted(),
            Generator::WichmannHill(g) => g.words_emitted(),
            Generator::Mt19937(g) => g.words_emitted(),
            Generator::HashCounter(g) => g.words_emitted(),
            Generator::Scripted(g) => g.words_emitted(),
        }
    }
}

/// Serializable recipe for a seeded generator.
///
/// This is the seed record stored in reports: building it twice yields two
/// generators in identical states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Lcg {
        modulus: u64,
        multiplier: u64,
        increment: u64,
        seed: u64,
    },
    WichmannHill {
        seed: [u32; 3],
    },
    Mt19937 {
        seed: u32,
    },
    HashCounter {
        /// Human-readable seed, see [`Seed::to_human`].
        seed: String,
        #[serde(default)]
        hash: HashFunction,
        #[serde(default = "default_hash_width")]
        width: u32,
    },
    Scripted {
        width: u32,
        words: Vec<u64>,
    },
}

fn default_hash_width() -> u32 {
    32
}

impl GeneratorSpec {
    pub fn hash(seed: &str) -> Self {
        GeneratorSpec::HashCounter {
            seed: Seed::from_text(seed).to_human(),
            hash: HashFunction::default(),
            width: 32,
        }
    }

    pub fn build(&self) -> Result<Generator, GeneratorError> {
        Ok(match self {
            GeneratorSpec::Lcg {
                modulus,
                multiplier,
                increment,
                seed,
            } => {
                let params = LcgParams::new(*modulus, *multiplier, *increment)?;
                Generator::Lcg(Lcg::new(params, *seed)?)
            }
            GeneratorSpec::WichmannHill { seed } => {
                Generator::WichmannHill(WichmannHill::new(*seed)?)
            }
            GeneratorSpec::Mt19937 { seed } => Generator::Mt19937(Box::new(Mt19937::new(*seed))),
            GeneratorSpec::HashCounter { seed, hash, width } => Generator::HashCounter(
                HashCounter::with_options(Seed::from_human(seed).into_bytes(), *hash, *width)?,
            ),
            GeneratorSpec::Scripted { width, words } => {
                Generator::Scripted(Scripted::new(*width, words.clone())?)
            }
        })
    }

    pub fn variant(&self) -> Variant {
        match self {
            GeneratorSpec::Lcg { .. } => Variant::Lcg,
            GeneratorSpec::WichmannHill { .. } => Variant::WichmannHill,
            GeneratorSpec::Mt19937 { .. } => Variant::Mt19937,
            GeneratorSpec::HashCounter { .. } => Variant::HashCounter,
            GeneratorSpec::Scripted { .. } => Variant::Scripted,
        }
    }

    /// Short human-readable description, e.g. `mt19937(seed=5489)`.
    pub fn describe(&self) -> String {
        match self {
            GeneratorSpec::Lcg {
                modulus,
                multiplier,
                increment,
                seed,
            } => format!("lcg(a={multiplier}, c={increment}, m={modulus}, seed={seed})"),
            GeneratorSpec::WichmannHill { seed } => {
                format!("wichmann_hill(seed={},{},{})", seed[0], seed[1], seed[2])
            }
            GeneratorSpec::Mt19937 { seed } => format!("mt19937(seed={seed})"),
            GeneratorSpec::HashCounter { seed, hash, width } => {
                format!("hash_counter({}, w={width}, seed={seed:?})", hash.name())
            }
            GeneratorSpec::Scripted { width, words } => {
                format!("scripted(w={width}, {} words)", words.len())
            }
        }
    }
}

/// Seeds a generator of the given family.
///
/// Numeric seeds are read from the seed's human-readable form (decimal, or
/// `0x` hex). LCG registers must lie in `[0, m)`; the RANDU parameters are
/// used when `params` is `None`. Wichmann-Hill accepts either one value,
/// replicated into all three registers, or `a,b,c`; each register must lie in
/// `[1, modulus)`. MT19937 takes a 32-bit seed. The hash-counter generator
/// stores the seed bytes verbatim with counter 0.
pub fn seed_generator(
    variant: Variant,
    seed: &Seed,
    params: Option<LcgParams>,
) -> Result<Generator, GeneratorError> {
    match variant {
        Variant::Lcg => {
            let params = params.unwrap_or(RANDU);
            let value = seed.as_u64().ok_or_else(|| out_of_range("lcg", seed, "not an integer"))?;
            Ok(Generator::Lcg(Lcg::new(params, value)?))
        }
        Variant::WichmannHill => {
            let text = seed.to_human();
            let parts: Vec<&str> = text.split(',').map(str::trim).collect();
            let parse = |s: &str| -> Result<u32, GeneratorError> {
                s.parse::<u32>()
                    .map_err(|_| out_of_range("wichmann_hill", seed, "not an integer"))
            };
            let triple = match parts.as_slice() {
                [one] => {
                    let v = parse(one)?;
                    [v, v, v]
                }
                [a, b, c] => [parse(a)?, parse(b)?, parse(c)?],
                _ => return Err(out_of_range("wichmann_hill", seed, "expected 1 or 3 values")),
            };
            Ok(Generator::WichmannHill(WichmannHill::new(triple)?))
        }
        Variant::Mt19937 => {
            let value = seed
                .as_u64()
                .ok_or_else(|| out_of_range("mt19937", seed, "not an integer"))?;
            let value = u32::try_from(value)
                .map_err(|_| out_of_range("mt19937", seed, "exceeds 32 bits"))?;
            Ok(Generator::Mt19937(Box::new(Mt19937::new(value))))
        }
        Variant::HashCounter => Ok(Generator::HashCounter(HashCounter::new(
            seed.as_bytes().to_vec(),
        )?)),
        Variant::Scripted => Err(GeneratorError::InvalidParams(
            "scripted sources are built from a word list, not a seed".into(),
        )),
    }
}

fn out_of_range(variant: &'static str, seed: &Seed, reason: &str) -> GeneratorError {
    GeneratorError::SeedOutOfRange {
        variant,
        seed: seed.to_human(),
        reason: reason.to_string(),
    }
}

/// Reads a word as a binary fraction in `[0, 1)`.
pub fn word_to_f64(word: u64, width: u32) -> f64 {
    word as f64 / 2f64.powi(width as i32)
}
