//! Text forms of flow values: exact fractions, fixed-point decimals and the
//! JSON encodings used by problem and scene files.

use std::str::FromStr;

use nodeflow_core::{Rational, Scalar};
use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{Number, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not a number (expected an integer, a decimal or `num/den`)")]
pub struct NumberError(pub String);

/// Parses `600`, `-1.25`, `1e3`, `2.5E-1` or `50/3` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, NumberError> {
    let t = text.trim();
    let bad = || NumberError(text.to_string());
    if let Some((num, den)) = t.split_once('/') {
        let num = parse_integer(num.trim()).ok_or_else(bad)?;
        let den = parse_integer(den.trim()).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(t).ok_or_else(bad)
}

fn parse_integer(t: &str) -> Option<BigInt> {
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(t.strip_prefix('+').unwrap_or(t)).ok()
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(at) => (&t[..at], t[at + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (negative, unsigned) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = unsigned.split_once('.').unwrap_or((unsigned, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole
        .bytes()
        .chain(frac.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{}{}", whole, frac);
    let mut value = Rational::from_integer(BigInt::from_str(&digits).ok()?);
    let shift = exponent - i32::try_from(frac.len()).ok()?;
    if shift.unsigned_abs() > 4096 {
        return None;
    }
    let scale = Rational::from_integer(BigInt::from(10).pow(shift.unsigned_abs()));
    value = if shift >= 0 {
        value * scale
    } else {
        value / scale
    };
    Some(if negative { -value } else { value })
}

/// Reads a JSON number or string as an exact rational. JSON numbers are
/// taken from their source text, so `0.1` is exactly one tenth.
pub fn rational_from_json(value: &Value) -> Result<Rational, NumberError> {
    match value {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(NumberError(other.to_string())),
    }
}

/// `600` for integers, `50/3` otherwise.
pub fn fraction(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Always `num/den`, including `600/1`.
pub fn ratio_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Rounds half away from zero to `places` decimals.
pub fn decimal(r: &Rational, places: u32) -> String {
    let scale = BigInt::from(10).pow(places);
    let scaled = r.abs() * Rational::from_integer(scale.clone());
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let rounded = (scaled + half).floor().to_integer();
    let sign = if r.is_negative() && !rounded.is_zero() {
        "-"
    } else {
        ""
    };
    let whole = &rounded / &scale;
    if places == 0 {
        return format!("{}{}", sign, whole);
    }
    let frac = (&rounded % &scale).to_string();
    format!(
        "{}{}.{:0>width$}",
        sign,
        whole,
        frac,
        width = places as usize
    )
}

/// The full decimal expansion when the denominator has only factors 2 and 5.
pub fn terminating_decimal(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    Some(decimal(r, twos.max(fives)))
}

/// Problem-file encoding: integers and terminating decimals as JSON
/// numbers, anything else as a `num/den` string.
pub fn exact_json(r: &Rational) -> Value {
    match terminating_decimal(r) {
        Some(text) => {
            Value::Number(Number::from_str(&text).expect("decimal text is a JSON number"))
        }
        None => Value::String(fraction(r)),
    }
}

/// Float approximation for readers that do not want to parse fractions.
pub fn approx_json(x: f64) -> Value {
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// How a scalar type presents itself in reports and scene files.
pub trait Render: Scalar {
    /// Exact fraction for rationals, shortest round-trip text for floats.
    fn exact_text(&self) -> String;
    /// `num/den` form; floats give their exact binary value.
    fn ratio_text(&self) -> String;
    fn decimal_text(&self, places: u32) -> String;
}

impl Render for Rational {
    fn exact_text(&self) -> String {
        fraction(self)
    }

    fn ratio_text(&self) -> String {
        ratio_string(self)
    }

    fn decimal_text(&self, places: u32) -> String {
        decimal(self, places)
    }
}

impl Render for f64 {
    fn exact_text(&self) -> String {
        let text = format!("{:?}", self);
        match text.strip_suffix(".0") {
            Some(whole) => whole.to_string(),
            None => text,
        }
    }

    fn ratio_text(&self) -> String {
        match nodeflow_core::scalar::rational_from_f64(*self) {
            Some(r) => ratio_string(&r),
            None => format!("{}", self),
        }
    }

    fn decimal_text(&self, places: u32) -> String {
        let text = format!("{:.*}", places as usize, self);
        if text.starts_with('-') && text[1..].bytes().all(|b| b == b'0' || b == b'.') {
            text[1..].to_string()
        } else {
            text
        }
    }
}

/// Lossy conversion for the float approximations written next to exact values.
pub fn to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or_else(|| match r.numer().sign() {
        Sign::Minus => f64::NEG_INFINITY,
        _ => f64::INFINITY,
    })
}
