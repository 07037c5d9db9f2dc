//! Stirling, entropy and Stirling-combination bounds.
//!
//! Bound values are returned in floating point (natural logs where they
//! overflow). The `*_holds` / `*_brackets_*` checks are exact: each
//! inequality is rearranged into a comparison of integers, with `e` and `pi`
//! replaced by rational enclosures that are tight to ~50 digits.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::{binomial, factorial, BigCount, BoundsError};

/// Floor and ceiling of `pi * 10^50`.
const PI_DIGITS: &str = "314159265358979323846264338327950288419716939937510";

fn pi_enclosure() -> (BigRational, BigRational) {
    let scaled: BigInt = PI_DIGITS.parse().expect("digits");
    let den = BigInt::from(10u32).pow(50);
    (
        BigRational::new(scaled.clone(), den.clone()),
        BigRational::new(scaled + 1, den),
    )
}

/// `sum_{j <= 45} 1/j!` and that plus the tail bound `1 / (45! * 45)`.
fn e_enclosure() -> (BigRational, BigRational) {
    const TERMS: u64 = 45;
    let mut sum = BigRational::one();
    let mut term = BigRational::one();
    for j in 1..=TERMS {
        term /= BigRational::from_integer(BigInt::from(j));
        sum += &term;
    }
    let tail = &term / BigRational::from_integer(BigInt::from(TERMS));
    let upper = &sum + tail;
    (sum, upper)
}

fn int(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

#[cfg(test)]
fn ln_big(x: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("fits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StirlingBounds {
    pub n: u64,
    /// `ln(sqrt(2 pi) n^(n + 1/2) e^-n)`
    pub ln_lower: f64,
    /// `ln(e n^(n + 1/2) e^-n)`
    pub ln_upper: f64,
}

impl StirlingBounds {
    pub fn lower(&self) -> f64 {
        self.ln_lower.exp()
    }

    pub fn upper(&self) -> f64 {
        self.ln_upper.exp()
    }
}

/// `sqrt(2 pi) n^(n+1/2) e^-n <= n! <= e n^(n+1/2) e^-n` for `n >= 1`.
pub fn stirling_bounds(n: u64) -> Result<StirlingBounds, BoundsError> {
    if n == 0 {
        return Err(BoundsError::Domain("Stirling bounds need n >= 1".into()));
    }
    let nf = n as f64;
    let core = (nf + 0.5) * nf.ln() - nf;
    Ok(StirlingBounds {
        n,
        ln_lower: 0.5 * (2.0 * std::f64::consts::PI).ln() + core,
        ln_upper: 1.0 + core,
    })
}

/// Exact check that both Stirling bounds bracket `n!`.
///
/// Squaring removes the half-integer power:
/// lower: `2 pi n^(2n+1) <= (n!)^2 e^(2n)`;
/// upper: `(n!)^2 e^(2n-2) <= n^(2n+1)`.
pub fn stirling_brackets_factorial(n: u64) -> Result<bool, BoundsError> {
    if n == 0 {
        return Err(BoundsError::Domain("Stirling bounds need n >= 1".into()));
    }
    let (_, pi_hi) = pi_enclosure();
    let (e_lo, e_hi) = e_enclosure();
    let fact = factorial(n);
    let fact_sq = int(&(&*fact * &*fact));
    let n_pow = int(&BigUint::from(n).pow((2 * n + 1) as u32));
    let two = BigRational::from_integer(BigInt::from(2));

    let lower_ok = &two * &pi_hi * &n_pow <= &fact_sq * pow(&e_lo, 2 * n);
    let upper_ok = &fact_sq * pow(&e_hi, 2 * n - 2) <= n_pow;
    Ok(lower_ok && upper_ok)
}

fn pow(base: &BigRational, exp: u64) -> BigRational {
    let exp = i32::try_from(exp).expect("exponent fits in i32");
    num_traits::Pow::pow(base, exp)
}

/// `H(q) = -q log2 q - (1-q) log2 (1-q)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

/// `2^(n H(k/n)) / (n+1) <= C(n,k) <= 2^(n H(k/n))`.
///
/// `2^(n H(k/n)) = n^n / (k^k (n-k)^(n-k))` is rational, so both bounds are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyBounds {
    pub lower: BigRational,
    pub upper: BigRational,
}

pub fn entropy_bounds(n: u64, k: u64) -> Result<EntropyBounds, BoundsError> {
    if k > n {
        return Err(BoundsError::KExceedsN { n, k });
    }
    let p = |base: u64, exp: u64| BigUint::from(base).pow(exp as u32);
    // 0^0 = 1 gives the H(0) = H(1) = 0 limits.
    let upper = BigRational::new(
        BigInt::from(p(n, n)),
        BigInt::from(p(k, k) * p(n - k, n - k)),
    );
    let lower = &upper / BigRational::from_integer(BigInt::from(n + 1));
    Ok(EntropyBounds { lower, upper })
}

/// `m^(m(l-1)+1) / (sqrt(l) (m-1)^((m-1)(l-1)))`, a lower bound on `C(lm, l)`.
pub fn stirling_combination_bound(l: u64, m: u64) -> Result<f64, BoundsError> {
    check_combination_domain(l, m)?;
    let (lf, mf) = (l as f64, m as f64);
    let ln = (mf * (lf - 1.0) + 1.0) * mf.ln()
        - 0.5 * lf.ln()
        - (mf - 1.0) * (lf - 1.0) * (mf - 1.0).ln();
    Ok(ln.exp())
}

/// Exact check of [`stirling_combination_bound`] against `C(lm, l)`, squared:
/// `m^(2(m(l-1)+1)) <= l C(lm,l)^2 (m-1)^(2(m-1)(l-1))`.
pub fn combination_bound_holds(l: u64, m: u64) -> Result<bool, BoundsError> {
    check_combination_domain(l, m)?;
    let c: BigCount = binomial(l * m, l)?;
    let lhs = BigUint::from(m).pow((2 * (m * (l - 1) + 1)) as u32);
    let rhs = BigUint::from(l) * &*c * &*c * BigUint::from(m - 1).pow((2 * (m - 1) * (l - 1)) as u32);
    Ok(lhs <= rhs)
}

fn check_combination_domain(l: u64, m: u64) -> Result<(), BoundsError> {
    if l < 1 || m < 2 {
        return Err(BoundsError::Domain(format!(
            "combination bound needs l >= 1 and m >= 2, got l={l}, m={m}"
        )));
    }
    Ok(())
}

/// Natural log of `n!`, accurate to `f64` precision.
#[cfg(test)]
fn ln_factorial(n: u64) -> f64 {
    ln_big(&factorial(n))
}
