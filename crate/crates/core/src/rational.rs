//! Exact rational helpers: parsing, string forms and decimal rendering.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.15"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::invalid("empty rational"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad numerator in {s:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rat> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(Error::invalid(format!("bad number {s:?}")));
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::invalid(format!("bad number {s:?}")));
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().expect("digits only")
    };
    let denom = num_traits::pow(BigInt::from(10u32), frac.len());
    let r = BigRational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

/// Canonical `"p/q"` form (`"p"` for integers).
pub fn format_rational(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with `sig` significant digits, computed from the exact value.
pub fn to_decimal(r: &Rat, sig: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Find exponent e with 10^e <= a < 10^(e+1).
    let ten = BigInt::from(10u32);
    let mut e: i64 = (a.numer().bits() as i64 - a.denom().bits() as i64) * 3 / 10;
    loop {
        let lo = pow10(e);
        let hi = pow10(e + 1);
        if a < lo {
            e -= 1;
        } else if a >= hi {
            e += 1;
        } else {
            break;
        }
    }
    // Scale to an integer with `sig` digits and round half up.
    let shift = sig as i64 - 1 - e;
    let scaled = &a * pow10(shift);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if rem.clone() * 2 >= *scaled.denom() { q + 1 } else { q };
    let mut shift = shift;
    if digits >= num_traits::pow(ten.clone(), sig) {
        digits /= ten;
        shift -= 1;
    }
    let mut s = digits.to_string();
    let out = if shift <= 0 {
        s.push_str(&"0".repeat((-shift) as usize));
        s
    } else {
        let shift = shift as usize;
        if s.len() <= shift {
            s = format!("{}{}", "0".repeat(shift - s.len() + 1), s);
        }
        let (w, f) = s.split_at(s.len() - shift);
        let f = f.trim_end_matches('0');
        if f.is_empty() {
            w.to_string()
        } else {
            format!("{w}.{f}")
        }
    };
    if neg {
        format!("-{out}")
    } else {
        out
    }
}

fn pow10(e: i64) -> Rat {
    let p = num_traits::pow(BigInt::from(10u32), e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: shift both down to a common scale.
        let nb = r.numer().bits() as i64;
        let db = r.denom().bits() as i64;
        let s = (nb.max(db) - 1000).max(0) as usize;
        let n = (r.numer() >> s).to_f64().unwrap_or(0.0);
        let d = (r.denom() >> s).to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn from_biguint(n: &BigUint) -> Rat {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

/// Ratio `num/den` of two counts as an exact rational.
pub fn ratio(num: &BigUint, den: &BigUint) -> Rat {
    BigRational::new(
        BigInt::from_biguint(Sign::Plus, num.clone()),
        BigInt::from_biguint(Sign::Plus, den.clone()),
    )
}

/// `floor(r)` as an unsigned integer; `r` must be non-negative.
pub fn floor_u(r: &Rat) -> BigUint {
    r.floor().to_integer().to_biguint().unwrap_or_default()
}

pub(crate) mod serde_rat {
    use super::{format_rational, parse_rational, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod serde_rat_vec {
    use super::{format_rational, parse_rational, Rat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub(crate) mod serde_rat_opt {
    use super::{format_rational, parse_rational, Rat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        r.as_ref().map(format_rational).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}
