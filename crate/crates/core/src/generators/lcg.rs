use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{GeneratorError, WordSource};

/// Parameters of `x -> (a*x + c) mod m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LcgParams {
    modulus: u64,
    multiplier: u64,
    increment: u64,
}

/// IBM's RANDU: a = 65539, c = 0, m = 2^31.
pub const RANDU: LcgParams = LcgParams {
    modulus: 1 << 31,
    multiplier: 65539,
    increment: 0,
};

impl LcgParams {
    pub fn new(modulus: u64, multiplier: u64, increment: u64) -> Result<Self, GeneratorError> {
        if modulus < 2 {
            return Err(GeneratorError::InvalidParams(format!(
                "modulus must be at least 2, got {modulus}"
            )));
        }
        if multiplier == 0 || multiplier >= modulus {
            return Err(GeneratorError::InvalidParams(format!(
                "multiplier must lie in (0, {modulus}), got {multiplier}"
            )));
        }
        if increment >= modulus {
            return Err(GeneratorError::InvalidParams(format!(
                "increment must lie in [0, {modulus}), got {increment}"
            )));
        }
        Ok(LcgParams {
            modulus,
            multiplier,
            increment,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn multiplier(&self) -> u64 {
        self.multiplier
    }

    pub fn increment(&self) -> u64 {
        self.increment
    }

    /// Bit length of `m - 1`: every register value fits in this many bits.
    pub fn word_width(&self) -> u32 {
        64 - (self.modulus - 1).leading_zeros()
    }

    pub fn step(&self, register: u64) -> u64 {
        ((self.multiplier as u128 * register as u128 + self.increment as u128)
            % self.modulus as u128) as u64
    }

    pub fn full_period(&self) -> bool {
        full_period(self)
    }
}

/// Hull-Dobell: the recurrence has period `m` from every seed iff
/// `gcd(c, m) = 1`, every prime factor of `m` divides `a - 1`, and
/// `4 | a - 1` whenever `4 | m`.
pub fn full_period(params: &LcgParams) -> bool {
    let m = params.modulus;
    let a1 = params.multiplier - 1;
    if params.increment.gcd(&m) != 1 {
        return false;
    }
    if m % 4 == 0 && a1 % 4 != 0 {
        return false;
    }
    // Strip from m every prime shared with a - 1; anything left is a prime
    // factor of m that does not divide a - 1.
    let mut rest = m;
    loop {
        let g = rest.gcd(&a1);
        if g == 1 {
            break;
        }
        while rest % g == 0 {
            rest /= g;
        }
    }
    rest == 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lcg {
    params: LcgParams,
    register: u64,
    emitted: u64,
}

impl Lcg {
    pub fn new(params: LcgParams, seed: u64) -> Result<Self, GeneratorError> {
        if seed >= params.modulus {
            return Err(GeneratorError::SeedOutOfRange {
                variant: "lcg",
                seed: seed.to_string(),
                reason: format!("register must lie in [0, {})", params.modulus),
            });
        }
        Ok(Lcg {
            params,
            register: seed,
            emitted: 0,
        })
    }

    pub fn params(&self) -> &LcgParams {
        &self.params
    }

    pub fn register(&self) -> u64 {
        self.register
    }
}

impl WordSource for Lcg {
    fn width(&self) -> u32 {
        self.params.word_width()
    }

    fn next_word(&mut self) -> Result<u64, GeneratorError> {
        self.register = self.params.step(self.register);
        self.emitted += 1;
        Ok(self.register)
    }

    fn words_emitted(&self) -> u64 {
        self.emitted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orbit_length(params: &LcgParams, start: u64) -> u64 {
        let mut x = params.step(start);
        let mut n = 1;
        while x != start {
            x = params.step(x);
            n += 1;
            if n > params.modulus() {
                return u64::MAX;
            }
        }
        n
    }

    #[test]
    fn randu_first_words() {
        let mut g = Lcg::new(RANDU, 1).unwrap();
        assert_eq!(g.next_word().unwrap(), 65539);
        // 65539^2 mod 2^31
        assert_eq!(g.next_word().unwrap(), 393_225);
        assert_eq!(g.width(), 31);
        assert_eq!(g.words_emitted(), 2);
    }

    #[test]
    fn hull_dobell_examples() {
        assert!(LcgParams::new(256, 5, 1).unwrap().full_period());
        assert!(!RANDU.full_period());
        assert!(LcgParams::new(2, 1, 1).unwrap().full_period());
        // a - 1 = 2 is not divisible by 4 while 4 | m
        assert!(!LcgParams::new(256, 3, 1).unwrap().full_period());
        // 3 | m but 3 does not divide a - 1 = 4
        assert!(!LcgParams::new(30, 5, 7).unwrap().full_period());
        assert!(LcgParams::new(30, 1, 7).unwrap().full_period());
    }

    #[test]
    fn toy_lcg_visits_every_state() {
        let p = LcgParams::new(256, 5, 1).unwrap();
        let mut seen = [false; 256];
        let mut x = 0;
        for _ in 0..256 {
            x = p.step(x);
            assert!(!seen[x as usize]);
            seen[x as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(LcgParams::new(1, 1, 0).is_err());
        assert!(LcgParams::new(16, 0, 1).is_err());
        assert!(LcgParams::new(16, 16, 1).is_err());
        assert!(LcgParams::new(16, 5, 16).is_err());
        assert!(Lcg::new(RANDU, 1 << 31).is_err());
    }

    proptest! {
        #[test]
        fn predicate_matches_orbit_enumeration(m in 2u64..=600, a_raw: u64, c_raw: u64, start_raw: u64) {
            let a = 1 + a_raw % (m - 1);
            let c = c_raw % m;
            let p = LcgParams::new(m, a, c).unwrap();
            let start = start_raw % m;
            prop_assert_eq!(p.full_period(), orbit_length(&p, start) == m);
        }

        #[test]
        fn full_period_orbits_cover_all_residues(m in 2u64..=(1 << 16), k: u64, c_raw: u64) {
            // Build a full-period multiplier: a - 1 a multiple of rad(m), and of 4 if 4 | m.
            let mut rad = 1u64;
            let mut rest = m;
            let mut p = 2;
            while p * p <= rest {
                if rest % p == 0 {
                    rad *= p;
                    while rest % p == 0 { rest /= p; }
                }
                p += 1;
            }
            if rest > 1 { rad *= rest; }
            if m % 4 == 0 && rad % 4 != 0 { rad *= 2; }
            let a = 1 + (rad * (k % 8)) % m;
            prop_assume!(a >= 1 && a < m);
            let mut c = c_raw % m;
            while c.gcd(&m) != 1 { c = (c + 1) % m; }
            let params = LcgParams::new(m, a, c).unwrap();
            prop_assert!(params.full_period());
            prop_assert_eq!(orbit_length(&params, 0), m);
        }
    }
}
