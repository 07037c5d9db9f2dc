use super::{GeneratorError, WordSource};

pub const WH_MODULI: [u64; 3] = [30269, 30307, 30323];
pub const WH_MULTIPLIERS: [u64; 3] = [171, 172, 170];

const DENOMINATOR: u128 = WH_MODULI[0] as u128 * WH_MODULI[1] as u128 * WH_MODULI[2] as u128;

/// Wichmann-Hill: the fractional part of the sum of three normalized
/// multiplicative LCGs.
///
/// The native output is a fraction in `[0, 1)`, held exactly as a numerator
/// over `30269 * 30307 * 30323`. As a [`WordSource`] it emits the 32-bit
/// discretization `floor(fraction * 2^32)`, which is lossy: distinct
/// fractions can share a word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WichmannHill {
    registers: [u64; 3],
    emitted: u64,
}

impl WichmannHill {
    pub fn new(seed: [u32; 3]) -> Result<Self, GeneratorError> {
        let mut registers = [0u64; 3];
        for (i, (&s, &m)) in seed.iter().zip(WH_MODULI.iter()).enumerate() {
            let s = s as u64;
            if s == 0 || s >= m {
                return Err(GeneratorError::SeedOutOfRange {
                    variant: "wichmann_hill",
                    seed: format!("{},{},{}", seed[0], seed[1], seed[2]),
                    reason: format!("register {i} must lie in [1, {m})"),
                });
            }
            registers[i] = s;
        }
        Ok(WichmannHill {
            registers,
            emitted: 0,
        })
    }

    pub fn registers(&self) -> [u64; 3] {
        self.registers
    }

    /// Advances and returns the output as `(numerator, denominator)`.
    pub fn next_exact(&mut self) -> (u128, u128) {
        for i in 0..3 {
            self.registers[i] = self.registers[i] * WH_MULTIPLIERS[i] % WH_MODULI[i];
        }
        self.emitted += 1;
        let [s1, s2, s3] = self.registers.map(|r| r as u128);
        let [m1, m2, m3] = WH_MODULI.map(|m| m as u128);
        let numerator = (s1 * m2 * m3 + s2 * m1 * m3 + s3 * m1 * m2) % DENOMINATOR;
        (numerator, DENOMINATOR)
    }

    pub fn next_fraction(&mut self) -> f64 {
        let (num, den) = self.next_exact();
        num as f64 / den as f64
    }
}

impl WordSource for WichmannHill {
    fn width(&self) -> u32 {
        32
    }

    fn next_word(&mut self) -> Result<u64, GeneratorError> {
        let (num, den) = self.next_exact();
        Ok(((num << 32) / den) as u64)
    }

    fn words_emitted(&self) -> u64 {
        self.emitted
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_output_from_ones() {
        let mut g = WichmannHill::new([1, 1, 1]).unwrap();
        let u = g.next_fraction();
        assert_eq!(g.registers(), [171, 172, 170]);
        let expected = 171.0 / 30269.0 + 172.0 / 30307.0 + 170.0 / 30323.0;
        assert!((u - expected).abs() < 1e-15);
        assert!((u - 0.0169309).abs() < 5e-8);
    }

    #[test]
    fn word_is_discretized_fraction() {
        let mut a = WichmannHill::new([11, 22, 33]).unwrap();
        let mut b = a.clone();
        for _ in 0..1000 {
            let u = a.next_fraction();
            let w = b.next_word().unwrap();
            assert!(w < 1 << 32);
            assert!(((w as f64) / 2f64.powi(32) - u).abs() < 1e-9);
            assert!(u < 1.0);
        }
    }

    #[test]
    fn registers_stay_in_range() {
        let mut g = WichmannHill::new([30268, 30306, 30322]).unwrap();
        for _ in 0..10_000 {
            g.next_word().unwrap();
            for (r, m) in g.registers().iter().zip(WH_MODULI) {
                assert!(*r >= 1 && *r < m);
            }
        }
        assert!(WichmannHill::new([30269, 1, 1]).is_err());
    }
}
