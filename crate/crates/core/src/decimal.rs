//! Exact decimal <-> binary64 conversions used at the I/O boundary.
//!
//! Parsing encloses the decimal literal (an inexact literal such as `0.1`
//! becomes a one-ulp interval); printing rounds outward so printed intervals
//! contain the stored ones.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Zero};

use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("malformed decimal literal {0:?}")]
pub struct DecimalError(pub String);

/// An exact decimal `mantissa * 10^exp10`.
#[derive(Debug, Clone, PartialEq)]
struct Decimal {
    mantissa: BigInt,
    exp10: i64,
}

fn parse_decimal(s: &str) -> Result<Decimal, DecimalError> {
    let err = || DecimalError(s.to_string());
    let t = s.trim();
    let (neg, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let (num, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().map_err(|_| err())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match num.find('.') {
        Some(i) => (&num[..i], &num[i + 1..]),
        None => (num, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut mantissa = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(err)?;
    if neg {
        mantissa = -mantissa;
    }
    Ok(Decimal {
        mantissa,
        exp10: exp - frac_part.len() as i64,
    })
}

/// Exact rational value of a finite float as `num / den` with `den > 0`.
fn float_to_ratio(x: f64) -> (BigInt, BigInt) {
    if x == 0.0 {
        return (BigInt::zero(), BigInt::one());
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp2) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    let m = BigInt::from(mant) * sign;
    if exp2 >= 0 {
        (m << exp2 as usize, BigInt::one())
    } else {
        (m, BigInt::one() << (-exp2) as usize)
    }
}

fn decimal_to_ratio(d: &Decimal) -> (BigInt, BigInt) {
    let ten = BigInt::from(10);
    if d.exp10 >= 0 {
        (&d.mantissa * num_traits::pow(ten, d.exp10 as usize), BigInt::one())
    } else {
        (d.mantissa.clone(), num_traits::pow(ten, (-d.exp10) as usize))
    }
}

fn cmp_decimal_float(d: &Decimal, x: f64) -> Ordering {
    let (a, b) = decimal_to_ratio(d);
    let (c, e) = float_to_ratio(x);
    (a * e).cmp(&(c * b))
}

/// Tightest interval of floats containing the decimal literal `s`.
pub fn parse_enclosure(s: &str) -> Result<Interval, DecimalError> {
    let d = parse_decimal(s)?;
    // The digit-length guard keeps absurd exponents out of the bignum path.
    if d.exp10.abs() > 1200 {
        return Err(DecimalError(s.to_string()));
    }
    let f: f64 = s.trim().parse().map_err(|_| DecimalError(s.to_string()))?;
    if !f.is_finite() {
        return Err(DecimalError(s.to_string()));
    }
    if d.mantissa.sign() == Sign::NoSign {
        return Ok(Interval::ZERO);
    }
    Ok(match cmp_decimal_float(&d, f) {
        Ordering::Equal => Interval::point(f),
        Ordering::Less => Interval::new(f.next_down(), f),
        Ordering::Greater => Interval::new(f, f.next_up()),
    })
}

fn render(x: f64) -> String {
    let s = format!("{:.16e}", x);
    let (mant, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent digits");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if neg { "-" } else { "" };
    if (-5..17).contains(&exp) {
        let n = digits.len() as i32;
        let body = if exp >= 0 {
            if n <= exp + 1 {
                format!("{}{}", digits, "0".repeat((exp + 1 - n) as usize))
            } else {
                let (a, b) = digits.split_at((exp + 1) as usize);
                format!("{a}.{b}")
            }
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        format!("{sign}{body}")
    } else {
        let (a, b) = digits.split_at(1);
        if b.is_empty() {
            format!("{sign}{a}e{exp}")
        } else {
            format!("{sign}{a}.{b}e{exp}")
        }
    }
}

/// Decimal string whose value is `<= x`.
pub fn format_down(x: f64) -> String {
    if !x.is_finite() {
        return if x > 0.0 { "inf".into() } else if x < 0.0 { "-inf".into() } else { "nan".into() };
    }
    let mut y = x;
    loop {
        let s = render(y);
        let d = parse_decimal(&s).expect("rendered decimal");
        if cmp_decimal_float(&d, x) != Ordering::Greater {
            return s;
        }
        y = y.next_down();
    }
}

/// Decimal string whose value is `>= x`.
pub fn format_up(x: f64) -> String {
    if !x.is_finite() {
        return if x > 0.0 { "inf".into() } else if x < 0.0 { "-inf".into() } else { "nan".into() };
    }
    let mut y = x;
    loop {
        let s = render(y);
        let d = parse_decimal(&s).expect("rendered decimal");
        if cmp_decimal_float(&d, x) != Ordering::Less {
            return s;
        }
        y = y.next_up();
    }
}

/// The exact decimal expansion of a finite float.
pub fn format_exact(x: f64) -> String {
    assert!(x.is_finite(), "format_exact needs a finite value");
    let (num, den) = float_to_ratio(x);
    let k = den.bits() - 1;
    let neg = num.sign() == Sign::Minus;
    let scaled = num.magnitude() * num_traits::pow(num_bigint::BigUint::from(5u32), k as usize);
    let digits = scaled.to_str_radix(10);
    let k = k as usize;
    let body = if k == 0 {
        digits
    } else if digits.len() > k {
        let (a, b) = digits.split_at(digits.len() - k);
        format!("{a}.{b}")
    } else {
        format!("0.{}{digits}", "0".repeat(k - digits.len()))
    };
    let body = if body.contains('.') { body.trim_end_matches('0').trim_end_matches('.').to_string() } else { body };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Shortest literal whose enclosure is exactly `v`, if one of the obvious
/// candidates works.
pub fn literal_for(v: Interval) -> Option<String> {
    [v.lo(), v.hi()]
        .into_iter()
        .filter(|x| x.is_finite())
        .map(|x| format!("{x:?}"))
        .chain(v.is_point().then(|| format_exact(v.lo())))
        .find(|s| parse_enclosure(s).is_ok_and(|e| e == v))
}

/// Exact comparison of a decimal literal with a float, exposed for tests of
/// outward printing.
pub fn compare_decimal(s: &str, x: f64) -> Result<Ordering, DecimalError> {
    Ok(cmp_decimal_float(&parse_decimal(s)?, x))
}
