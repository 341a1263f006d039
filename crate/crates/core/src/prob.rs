//! Exact probabilities.
//!
//! Authored worlds carry bounds in hundredths; transformed worlds may carry
//! arbitrary rationals. Both live in [`Prob`], an arbitrary-precision rational.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Prob = BigRational;

pub fn hundredths(n: u32) -> Prob {
    Prob::new(BigInt::from(n), BigInt::from(100))
}

pub fn ratio(num: u64, den: u64) -> Prob {
    Prob::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Prob {
    Prob::zero()
}

pub fn one() -> Prob {
    Prob::one()
}

/// `Some(n)` when `p == n/100` for an integer `n` in `0..=100`.
pub fn as_hundredths(p: &Prob) -> Option<u32> {
    let scaled = p * BigInt::from(100);
    if !scaled.is_integer() || scaled.is_negative() {
        return None;
    }
    scaled.to_integer().to_u32().filter(|n| *n <= 100)
}

pub fn to_f64(p: &Prob) -> f64 {
    p.to_f64().unwrap_or(f64::NAN)
}

/// Nearest rational with denominator 10^9; used for configuration reals.
pub fn from_f64(x: f64) -> Prob {
    const SCALE: i64 = 1_000_000_000;
    Prob::new(
        BigInt::from((x * SCALE as f64).round() as i64),
        BigInt::from(SCALE),
    )
}

/// Parses `"n/d"`, a decimal such as `"0.125"`, or an integer.
pub fn parse(text: &str) -> Result<Prob, String> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| format!("bad numerator in `{text}`"))?;
        let den: BigInt = den.trim().parse().map_err(|_| format!("bad denominator in `{text}`"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in `{text}`"));
        }
        return Ok(Prob::new(num, den));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(format!("`{text}` is not a number"));
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| format!("`{text}` is not a number"))?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Prob::new(num, den);
    Ok(if negative { -value } else { value })
}

/// Canonical text: an integer, or `"n/d"` in lowest terms.
pub fn format(p: &Prob) -> String {
    if p.is_integer() {
        p.to_integer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

/// Two-decimal rendering for messages.
pub fn display(p: &Prob) -> String {
    format!("{:.2}", to_f64(p))
}
