//! Circle rotations with exact rational or wide fixed-point angles.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{floor_u, format_rational, Rat};

/// Minimum number of fractional bits for irrational angles.
pub const MIN_PRECISION_BITS: u32 = 128;

/// Threshold comparisons closer than `2^-GUARD_BITS` are reported as indeterminate.
pub const GUARD_BITS: u32 = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Angle {
    Rational(Rat),
    /// `value / 2^bits`, a truncation of a real angle.
    Fixed { value: BigUint, bits: u32 },
}

/// A point of the unit-circumference circle, in the representation matching the angle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CirclePoint {
    Rational(Rat),
    Fixed(BigUint),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rotation {
    pub angle: Angle,
    /// Source text of the angle, echoed back in configurations.
    pub angle_text: String,
}

impl Rotation {
    pub fn rational(angle: Rat) -> Result<Self> {
        let text = format_rational(&angle);
        let angle = frac(&angle);
        Ok(Rotation { angle: Angle::Rational(angle), angle_text: text })
    }

    /// Rotation by a real angle given as a decimal, `p/q`, or `golden` (`(sqrt 5 - 1)/2`),
    /// truncated to `bits` fractional bits.
    pub fn fixed(text: &str, bits: u32) -> Result<Self> {
        if bits < MIN_PRECISION_BITS {
            return Err(Error::Config(format!(
                "precision_bits must be at least {MIN_PRECISION_BITS}, got {bits}"
            )));
        }
        let value = match text.trim() {
            "golden" => golden_fraction(bits),
            other => {
                let r = crate::rational::parse_rational(other)?;
                to_fixed(&frac(&r), bits)
            }
        };
        Ok(Rotation { angle: Angle::Fixed { value, bits }, angle_text: text.trim().to_string() })
    }

    pub fn precision_bits(&self) -> Option<u32> {
        match self.angle {
            Angle::Fixed { bits, .. } => Some(bits),
            _ => None,
        }
    }

    pub fn point(&self, x: &Rat) -> CirclePoint {
        let x = frac(x);
        match &self.angle {
            Angle::Rational(_) => CirclePoint::Rational(x),
            Angle::Fixed { bits, .. } => CirclePoint::Fixed(to_fixed(&x, *bits)),
        }
    }

    pub fn apply(&self, p: &CirclePoint) -> Result<CirclePoint> {
        match (&self.angle, p) {
            (Angle::Rational(a), CirclePoint::Rational(x)) => Ok(CirclePoint::Rational(frac(&(x + a)))),
            (Angle::Fixed { value, bits }, CirclePoint::Fixed(x)) => {
                let mut s = x + value;
                if s.bits() > *bits as u64 {
                    s -= BigUint::one() << *bits;
                }
                Ok(CirclePoint::Fixed(s))
            }
            _ => Err(Error::InvalidState("circle point representation does not match the angle".into())),
        }
    }

    /// Arc distance `min(|p-q|, 1-|p-q|)` as an exact rational of the stored representations.
    pub fn distance(&self, p: &CirclePoint, q: &CirclePoint) -> Result<Rat> {
        match (p, q) {
            (CirclePoint::Rational(x), CirclePoint::Rational(y)) => {
                let d = (x - y).abs();
                let e = Rat::one() - &d;
                Ok(if d <= e { d } else { e })
            }
            (CirclePoint::Fixed(x), CirclePoint::Fixed(y)) => {
                let bits = self.precision_bits().unwrap_or(MIN_PRECISION_BITS);
                let d = fixed_arc(x, y, bits);
                Ok(BigRational::new(
                    BigInt::from_biguint(Sign::Plus, d),
                    BigInt::one() << bits,
                ))
            }
            _ => Err(Error::InvalidState("mixed circle point representations".into())),
        }
    }

    /// `distance(p, q) < t`; fixed-point comparisons inside the guard band are indeterminate.
    pub fn within(&self, p: &CirclePoint, q: &CirclePoint, t: &Rat) -> Result<bool> {
        match (p, q) {
            (CirclePoint::Fixed(x), CirclePoint::Fixed(y)) => {
                let bits = self.precision_bits().unwrap_or(MIN_PRECISION_BITS);
                let d = BigInt::from_biguint(Sign::Plus, fixed_arc(x, y, bits));
                // Compare d / 2^bits with num / den.
                let lhs = &d * t.denom();
                let rhs = t.numer() << bits;
                let gap = (&lhs - &rhs).abs();
                if (gap << GUARD_BITS) < (t.denom() << bits) {
                    return Err(Error::Indeterminate { index: BigUint::zero() });
                }
                Ok(lhs < rhs)
            }
            _ => Ok(&self.distance(p, q)? < t),
        }
    }

    pub fn format_point(&self, p: &CirclePoint) -> String {
        match p {
            CirclePoint::Rational(x) => format_rational(x),
            CirclePoint::Fixed(v) => {
                let bits = self.precision_bits().unwrap_or(MIN_PRECISION_BITS);
                let r = BigRational::new(BigInt::from_biguint(Sign::Plus, v.clone()), BigInt::one() << bits);
                crate::rational::to_decimal(&r, 20)
            }
        }
    }

    pub fn angle_f64(&self) -> f64 {
        match &self.angle {
            Angle::Rational(a) => a.to_f64().unwrap_or(0.0),
            Angle::Fixed { value, bits } => {
                let shift = bits.saturating_sub(60);
                (value >> shift).to_f64().unwrap_or(0.0) / 2f64.powi((*bits - shift) as i32)
            }
        }
    }
}

fn fixed_arc(x: &BigUint, y: &BigUint, bits: u32) -> BigUint {
    let d = if x >= y { x - y } else { y - x };
    let full = BigUint::one() << bits;
    let e = &full - &d;
    d.min(e)
}

/// Fractional part in `[0,1)`.
pub fn frac(x: &Rat) -> Rat {
    x - x.floor()
}

fn to_fixed(x: &Rat, bits: u32) -> BigUint {
    let scaled = x * BigRational::from_integer(BigInt::one() << bits);
    floor_u(&scaled)
}

/// `floor(2^bits * (sqrt(5) - 1) / 2)`.
fn golden_fraction(bits: u32) -> BigUint {
    // sqrt(5 * 4^bits) = 2^bits sqrt 5, floored; the final halving keeps the floor exact.
    let r = (BigUint::from(5u32) << (2 * bits)).sqrt();
    let one = BigUint::one() << bits;
    (r - one) >> 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn rational_wraps() {
        let r = Rotation::rational(rat(1, 4)).unwrap();
        let p = r.point(&rat(3, 4));
        assert_eq!(r.apply(&p).unwrap(), CirclePoint::Rational(Rat::zero()));
    }

    #[test]
    fn arc_metric() {
        let r = Rotation::rational(rat(1, 3)).unwrap();
        let p = r.point(&rat(1, 10));
        let q = r.point(&rat(95, 100));
        assert_eq!(r.distance(&p, &q).unwrap(), rat(15, 100));
        assert!(r.within(&p, &q, &rat(2, 10)).unwrap());
        assert!(!r.within(&p, &q, &rat(15, 100)).unwrap());
    }

    #[test]
    fn golden_digits() {
        let r = Rotation::fixed("golden", 128).unwrap();
        assert!((r.angle_f64() - 0.618_033_988_749_894_8).abs() < 1e-15);
        assert!(Rotation::fixed("golden", 64).is_err());
    }

    #[test]
    fn fixed_guard_band() {
        let r = Rotation::fixed("1/8", 128).unwrap();
        let p = r.point(&Rat::zero());
        let q = r.apply(&p).unwrap();
        // distance exactly 1/8: the comparison against 1/8 falls inside the guard band
        assert!(matches!(r.within(&p, &q, &rat(1, 8)), Err(Error::Indeterminate { .. })));
        assert!(r.within(&p, &q, &rat(1, 7)).unwrap());
        assert!(!r.within(&p, &q, &rat(1, 9)).unwrap());
    }

    #[test]
    fn fixed_rotation_is_an_isometry() {
        let r = Rotation::fixed("golden", 160).unwrap();
        let mut p = r.point(&rat(1, 10));
        let mut q = r.point(&rat(7, 10));
        let d0 = r.distance(&p, &q).unwrap();
        for _ in 0..1000 {
            p = r.apply(&p).unwrap();
            q = r.apply(&q).unwrap();
            assert_eq!(r.distance(&p, &q).unwrap(), d0);
        }
    }
}
