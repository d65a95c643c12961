//! The dyadic odometer on eventually constant 0/1 sequences.
//!
//! A sequence with a tail of zeros is the binary expansion (least significant symbol first) of
//! a non-negative integer; a tail of ones is a negative integer in two's complement. Adding one
//! with carry is then integer increment, and agreement on the first `n` symbols is congruence
//! modulo `2^n`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::rational::Rat;

/// Symbol `i` (0-based) of the sequence encoded by `x`.
pub fn symbol(x: &BigInt, i: u64) -> u8 {
    let m = BigInt::one() << (i + 1);
    let r = x.mod_floor(&m);
    u8::from(r >= (BigInt::one() << i))
}

/// Number of leading symbols on which `x` and `y` agree; `None` when equal.
pub fn agreement(x: &BigInt, y: &BigInt) -> Option<u64> {
    let d = x - y;
    if d.is_zero() {
        None
    } else {
        Some(d.trailing_zeros().unwrap_or(0))
    }
}

/// Dyadic metric `2^-k`, `k` the first 1-based disagreement.
pub fn distance(x: &BigInt, y: &BigInt) -> Rat {
    match agreement(x, y) {
        None => Rat::zero(),
        Some(a) => BigRational::new(BigInt::one(), BigInt::one() << (a + 1)),
    }
}

/// Number of leading symbols that must agree for `distance < t`: the least `k` with `2^k t > 1`,
/// minus one.
pub fn symbols_needed(t: &Rat) -> u64 {
    let mut k = 0u64;
    let mut v = t.clone();
    while v <= Rat::one() {
        v *= BigRational::from_integer(BigInt::from(2));
        k += 1;
    }
    k.saturating_sub(1)
}

pub fn within(x: &BigInt, y: &BigInt, t: &Rat) -> bool {
    let need = symbols_needed(t);
    match agreement(x, y) {
        None => true,
        Some(a) => a >= need,
    }
}

pub fn format_point(x: &BigInt, shown: usize) -> String {
    let mut s: String = (0..shown as u64).map(|i| char::from(b'0' + symbol(x, i))).collect();
    s.push_str(if x < &BigInt::zero() { "(1)" } else { "(0)" });
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn symbols_are_little_endian_twos_complement() {
        let x = BigInt::from(6); // 0110...
        assert_eq!((0..4).map(|i| symbol(&x, i)).collect::<Vec<_>>(), vec![0, 1, 1, 0]);
        let m = BigInt::from(-1);
        assert!((0..70).all(|i| symbol(&m, i) == 1));
        // ...111 + 1 carries forever
        assert_eq!(&m + 1, BigInt::zero());
    }

    #[test]
    fn dyadic_thresholds() {
        assert_eq!(symbols_needed(&rat(1, 2)), 1);
        assert_eq!(symbols_needed(&rat(1, 4)), 2);
        assert_eq!(symbols_needed(&rat(1, 3)), 1);
        assert_eq!(symbols_needed(&rat(1, 1)), 0);
        let x = BigInt::from(5);
        assert!(within(&x, &(&x + 4), &rat(1, 4)));
        assert!(!within(&x, &(&x + 4), &rat(1, 8)));
        assert_eq!(distance(&x, &(&x + 4)), rat(1, 8));
    }
}
