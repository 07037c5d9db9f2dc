//! Exact decimal rendering of big rationals.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn pow10(exp: u32) -> BigUint {
    BigUint::from(10u32).pow(exp)
}

fn digit_count(x: &BigUint) -> i64 {
    x.to_str_radix(10).len() as i64
}

/// `round(num * 10^shift / den)`, halves away from zero, for any sign of `shift`.
fn scaled_round(num: &BigUint, den: &BigUint, shift: i64) -> BigUint {
    let (n, d) = if shift >= 0 {
        (num * pow10(shift as u32), den.clone())
    } else {
        (num.clone(), den * pow10((-shift) as u32))
    };
    let two = BigUint::from(2u32);
    (&n * &two + &d).div_floor(&(&d * two))
}

fn parts(value: &BigRational) -> (bool, BigUint, BigUint) {
    let negative = value.is_negative();
    let num = value.numer().abs().to_biguint().expect("nonnegative");
    let den = value.denom().to_biguint().expect("positive denominator");
    (negative, num, den)
}

/// Scientific notation with `sig` significant digits, e.g. `4.29e9`.
pub fn format_scientific(value: &BigRational, sig: u32) -> String {
    assert!(sig >= 1);
    let (negative, num, den) = parts(value);
    if num.is_zero() {
        return "0".to_string();
    }
    // 10^e <= value < 10^(e+1)
    let mut e = digit_count(&num) - digit_count(&den);
    let ten_e = |e: i64| -> bool {
        // value >= 10^e ?
        if e >= 0 {
            num >= &den * pow10(e as u32)
        } else {
            &num * pow10((-e) as u32) >= den
        }
    };
    if !ten_e(e) {
        e -= 1;
    }
    let mut mantissa = scaled_round(&num, &den, sig as i64 - 1 - e);
    if mantissa == pow10(sig) {
        mantissa = pow10(sig - 1);
        e += 1;
    }
    let digits = mantissa.to_str_radix(10);
    let body = if digits.len() > 1 {
        format!("{}.{}", &digits[..1], &digits[1..])
    } else {
        digits
    };
    format!("{}{}e{}", if negative { "-" } else { "" }, body, e)
}

/// Fixed-point notation rounded to `places` decimals, e.g. `0.418`.
pub fn format_fixed(value: &BigRational, places: u32) -> String {
    let (negative, num, den) = parts(value);
    let scaled = scaled_round(&num, &den, places as i64);
    let digits = scaled.to_str_radix(10);
    let places = places as usize;
    let padded = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = padded.len() - places;
    let body = if places == 0 {
        padded
    } else {
        format!("{}.{}", &padded[..split], &padded[split..])
    };
    let is_zero = scaled.is_zero();
    format!("{}{}", if negative && !is_zero { "-" } else { "" }, body)
}

/// Significant-digit rendering that stays in fixed notation for moderate
/// magnitudes, e.g. `0.418112` or `1.28889`.
pub fn format_significant(value: &BigRational, sig: u32) -> String {
    let sci = format_scientific(value, sig);
    let Some((_, exp)) = sci.split_once('e') else {
        return sci;
    };
    let exp: i64 = exp.parse().expect("exponent");
    if (-5..=15).contains(&exp) {
        let places = (sig as i64 - 1 - exp).max(0) as u32;
        format_fixed(value, places)
    } else {
        sci
    }
}

/// Nearest `f64`; saturates to infinity or zero outside the `f64` range.
pub fn to_f64(value: &BigRational) -> f64 {
    if value.is_zero() {
        return 0.0;
    }
    format_scientific(value, 17).parse().unwrap_or(f64::INFINITY)
}
