//! Decimal parsing and printing of exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ScalarError;

fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), e as usize)
}

/// Parses `"p/q"`, integers, finite decimals and scientific literals such as
/// `"1.25"`, `"-3"`, `"1e-18"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, ScalarError> {
    let s = text.trim();
    let bad = || ScalarError::Parse(format!("not a rational or finite decimal: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(ScalarError::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (body, exp) = match s.find(['e', 'E']) {
        Some(k) => {
            let e: i64 = s[k + 1..].parse().map_err(|_| bad())?;
            (&s[..k], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match body.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, body.strip_prefix('+').unwrap_or(body)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exp - frac_part.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(bad());
    }
    if scale >= 0 {
        value *= BigRational::from_integer(pow10(scale as u32));
    } else {
        value /= BigRational::from_integer(pow10((-scale) as u32));
    }
    Ok(if neg { -value } else { value })
}

/// `floor(log10 |r|)` for nonzero `r`.
fn decimal_exponent(r: &BigRational) -> i64 {
    let a = r.abs();
    let est =
        ((a.numer().bits() as f64 - a.denom().bits() as f64) * std::f64::consts::LOG10_2) as i64;
    let mut e = est;
    loop {
        let lower = ten_pow(e);
        if a < lower {
            e -= 1;
            continue;
        }
        if a >= ten_pow(e + 1) {
            e += 1;
            continue;
        }
        return e;
    }
}

fn ten_pow(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(pow10(e as u32))
    } else {
        BigRational::new(BigInt::one(), pow10((-e) as u32))
    }
}

fn round_int(r: &BigRational, up: bool) -> BigInt {
    if up {
        r.ceil().to_integer()
    } else {
        let twice = r * BigRational::from_integer(BigInt::from(2));
        (twice + BigRational::one())
            .floor()
            .to_integer()
            .div_floor(&BigInt::from(2))
    }
}

fn format_sig(r: &BigRational, digits: usize, up: bool, force_sci: bool) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let neg = r.is_negative();
    let a = r.abs();
    let mut e10 = decimal_exponent(&a);
    let mut scaled = round_int(&(&a * ten_pow(digits as i64 - 1 - e10)), up);
    if scaled >= pow10(digits as u32) {
        e10 += 1;
        scaled = round_int(&(&a * ten_pow(digits as i64 - 1 - e10)), up);
    }
    let ds = scaled.to_string();
    let sign = if neg { "-" } else { "" };
    if force_sci || e10 < -6 || e10 >= (digits as i64).max(21) {
        let (head, tail) = ds.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{e10}")
        } else {
            format!("{sign}{head}.{tail}e{e10}")
        }
    } else if e10 < 0 {
        let zeros = "0".repeat((-e10 - 1) as usize);
        format!("{sign}0.{zeros}{ds}")
    } else {
        let int_len = (e10 + 1) as usize;
        if int_len >= ds.len() {
            format!("{sign}{ds}{}", "0".repeat(int_len - ds.len()))
        } else {
            format!("{sign}{}.{}", &ds[..int_len], &ds[int_len..])
        }
    }
}

/// Rounds to `digits` significant decimal digits (round half up).
pub fn format_significant(r: &BigRational, digits: usize) -> String {
    format_sig(r, digits, false, false)
}

/// Scientific rendering of a radius, rounded upward so it stays a bound.
pub fn format_radius(r: &BigRational) -> String {
    format_sig(r, 3, true, true)
}

/// Exact `"p/q"` rendering, or `"p"` for integers.
pub fn format_fraction(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Number of digits after the decimal point in a printed literal.
pub fn fractional_digits(literal: &str) -> usize {
    literal.split_once('.').map(|(_, f)| f.len()).unwrap_or(0)
}
