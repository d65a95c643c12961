//! Dynamical systems with exact one-step maps and exact threshold queries.

pub mod config;
pub mod interval;
pub mod odometer;
pub mod rotation;

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::construction::ShiftPoint;
use crate::error::{Error, Result};
use crate::rational::{format_rational, rat, Rat};

pub use config::{FiberConfig, SystemConfig};
pub use interval::{Direction, Interval, IntervalPLMap, Lap};
pub use rotation::{CirclePoint, Rotation};

/// Cap on symbols compared when a shift distance is requested as a number.
pub const SHIFT_DISTANCE_SCAN: usize = 1 << 16;

/// A fiber map selected by the longest matching prefix of the base point's symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberRule {
    pub prefix: Vec<u8>,
    pub map: IntervalPLMap,
}

#[derive(Clone, Debug)]
pub struct SkewProduct {
    pub base: Box<System>,
    pub fibers: Vec<FiberRule>,
    pub default_fiber: IntervalPLMap,
}

impl SkewProduct {
    pub fn new(base: System, fibers: Vec<FiberRule>, default_fiber: IntervalPLMap) -> Result<Self> {
        if !matches!(base, System::Shift | System::Odometer) {
            return Err(Error::Config("skew-product base must be a symbolic system (shift or odometer)".into()));
        }
        Ok(SkewProduct { base: Box::new(base), fibers, default_fiber })
    }

    fn fiber_for(&self, x: &State) -> Result<&IntervalPLMap> {
        let longest = self.fibers.iter().map(|f| f.prefix.len()).max().unwrap_or(0);
        let symbols = match x {
            State::Symbolic(p) => p.first_symbols(longest)?,
            State::Odometer(v) => (0..longest as u64).map(|i| odometer::symbol(v, i)).collect(),
            other => return Err(mismatch(&self.base, other)),
        };
        Ok(self
            .fibers
            .iter()
            .filter(|f| symbols.starts_with(&f.prefix))
            .max_by_key(|f| f.prefix.len())
            .map(|f| &f.map)
            .unwrap_or(&self.default_fiber))
    }
}

/// A dynamical system `(X, d, f)`.
#[derive(Clone, Debug)]
pub enum System {
    /// Full shift on two symbols with `ρ(x, y) = 1/k`.
    Shift,
    IntervalPL(IntervalPLMap),
    Rotation(Rotation),
    /// Dyadic odometer with `d(x, y) = 2^-k`.
    Odometer,
    SkewProduct(SkewProduct),
    /// `m`-th iterate of a system that has no closed form for its powers.
    Power { base: Box<System>, m: u32 },
}

/// A point of some system.
#[derive(Clone, Debug)]
pub enum State {
    Real(Rat),
    Circle(CirclePoint),
    Symbolic(ShiftPoint),
    Odometer(BigInt),
    Pair(Box<State>, Rat),
}

impl State {
    pub fn kind(&self) -> &'static str {
        match self {
            State::Real(_) => "interval point",
            State::Circle(_) => "circle point",
            State::Symbolic(_) => "shift point",
            State::Odometer(_) => "odometer point",
            State::Pair(..) => "skew-product point",
        }
    }

    pub fn as_real(&self) -> Option<&Rat> {
        match self {
            State::Real(x) => Some(x),
            _ => None,
        }
    }
}

fn mismatch(system: &System, state: &State) -> Error {
    Error::KindMismatch { system: system.kind(), state: state.kind() }
}

impl System {
    pub fn kind(&self) -> &'static str {
        match self {
            System::Shift => "shift",
            System::IntervalPL(_) => "interval-pl",
            System::Rotation(_) => "rotation",
            System::Odometer => "odometer",
            System::SkewProduct(_) => "skew-product",
            System::Power { base, .. } => base.kind(),
        }
    }

    /// Whether `p` has the state representation this system acts on.
    pub fn accepts(&self, p: &State) -> bool {
        matches!(
            (self, p),
            (System::Shift, State::Symbolic(_))
                | (System::IntervalPL(_), State::Real(_))
                | (System::Rotation(_), State::Circle(_))
                | (System::Odometer, State::Odometer(_))
                | (System::SkewProduct(_), State::Pair(..))
        ) || matches!(self, System::Power { base, .. } if base.accepts(p))
    }

    /// `f^m`; interval maps are composed exactly, other systems are wrapped.
    pub fn power(&self, m: u32) -> System {
        assert!(m >= 1, "iterate exponent must be positive");
        match self {
            _ if m == 1 => self.clone(),
            System::IntervalPL(f) => System::IntervalPL(f.power(m)),
            System::Power { base, m: k } => System::Power { base: base.clone(), m: k * m },
            other => System::Power { base: Box::new(other.clone()), m },
        }
    }

    /// Supremum of the metric.
    pub fn diameter(&self) -> Rat {
        match self {
            System::Shift | System::IntervalPL(_) => Rat::one(),
            System::Rotation(_) | System::Odometer => rat(1, 2),
            System::SkewProduct(s) => s.base.diameter().max(Rat::one()),
            System::Power { base, .. } => base.diameter(),
        }
    }

    /// One step of the map.
    pub fn apply(&self, p: &State) -> Result<State> {
        match (self, p) {
            (System::Shift, State::Symbolic(x)) => Ok(State::Symbolic(x.shifted(&BigUint::one()))),
            (System::IntervalPL(f), State::Real(x)) => Ok(State::Real(f.eval(x)?)),
            (System::Rotation(r), State::Circle(x)) => Ok(State::Circle(r.apply(x)?)),
            (System::Odometer, State::Odometer(x)) => Ok(State::Odometer(x + 1)),
            (System::SkewProduct(s), State::Pair(x, y)) => {
                let g = s.fiber_for(x)?;
                let y1 = g.eval(y)?;
                Ok(State::Pair(Box::new(s.base.apply(x)?), y1))
            }
            (System::Power { base, m }, p) => {
                if let (System::Shift, State::Symbolic(x)) = (base.as_ref(), p) {
                    return Ok(State::Symbolic(x.shifted(&BigUint::from(*m))));
                }
                let mut s = base.apply(p)?;
                for _ in 1..*m {
                    s = base.apply(&s)?;
                }
                Ok(s)
            }
            (sys, st) => Err(mismatch(sys, st)),
        }
    }

    /// Exact truth of `d(p, q) < t`.
    pub fn within(&self, p: &State, q: &State, t: &Rat) -> Result<bool> {
        if t <= &Rat::zero() {
            return Err(Error::invalid("radius must be positive"));
        }
        match (self, p, q) {
            (System::Power { base, .. }, _, _) => base.within(p, q, t),
            (System::Shift, State::Symbolic(x), State::Symbolic(y)) => {
                x.agrees_on(y, shift_symbols_needed(t)?)
            }
            (System::IntervalPL(_), State::Real(x), State::Real(y)) => {
                Ok(&(x - y).abs_rat() < t)
            }
            (System::Rotation(r), State::Circle(x), State::Circle(y)) => r.within(x, y, t),
            (System::Odometer, State::Odometer(x), State::Odometer(y)) => Ok(odometer::within(x, y, t)),
            (System::SkewProduct(s), State::Pair(x1, y1), State::Pair(x2, y2)) => {
                Ok(s.base.within(x1, x2, t)? && &(y1 - y2).abs_rat() < t)
            }
            (sys, a, b) => Err(mismatch(sys, if sys.accepts(a) { b } else { a })),
        }
    }

    /// Exact distance where it is a finite computation.
    pub fn distance(&self, p: &State, q: &State) -> Result<Rat> {
        match (self, p, q) {
            (System::Power { base, .. }, _, _) => base.distance(p, q),
            (System::Shift, State::Symbolic(x), State::Symbolic(y)) => {
                match x.first_difference(y, SHIFT_DISTANCE_SCAN)? {
                    Some(i) => Ok(rat(1, i as i64 + 1)),
                    None if x.offset == y.offset && Arc::ptr_eq(&x.word, &y.word) => Ok(Rat::zero()),
                    None => Err(Error::Resource(format!(
                        "shift distance below 1/{SHIFT_DISTANCE_SCAN} is not resolved"
                    ))),
                }
            }
            (System::IntervalPL(_), State::Real(x), State::Real(y)) => Ok((x - y).abs_rat()),
            (System::Rotation(r), State::Circle(x), State::Circle(y)) => r.distance(x, y),
            (System::Odometer, State::Odometer(x), State::Odometer(y)) => Ok(odometer::distance(x, y)),
            (System::SkewProduct(s), State::Pair(x1, y1), State::Pair(x2, y2)) => {
                Ok(s.base.distance(x1, x2)?.max((y1 - y2).abs_rat()))
            }
            (sys, a, _) => Err(mismatch(sys, a)),
        }
    }

    /// Lazy orbit `p, f(p), ..., f^{n-1}(p)`.
    pub fn orbit<'a>(&'a self, p: &State, n: u64) -> Orbit<'a> {
        Orbit { system: self, next: Some(p.clone()), remaining: n }
    }

    pub fn format_state(&self, p: &State) -> String {
        match (self, p) {
            (System::Power { base, .. }, p) => base.format_state(p),
            (System::Rotation(r), State::Circle(x)) => r.format_point(x),
            (_, State::Real(x)) => format_rational(x),
            (_, State::Circle(CirclePoint::Rational(x))) => format_rational(x),
            (_, State::Circle(CirclePoint::Fixed(v))) => v.to_string(),
            (_, State::Symbolic(x)) => {
                let shown = x.first_symbols(16).unwrap_or_default();
                let s: String = shown.iter().map(|&b| char::from(b'0' + b)).collect();
                format!("{s}...")
            }
            (_, State::Odometer(v)) => v.to_string(),
            (sys, State::Pair(x, y)) => {
                let base = match sys {
                    System::SkewProduct(s) => s.base.format_state(x),
                    _ => format!("{x:?}"),
                };
                format!("({base}; {})", format_rational(y))
            }
        }
    }
}

/// Number of leading symbols that must agree for `1/k < t`: `floor(1/t)`.
pub fn shift_symbols_needed(t: &Rat) -> Result<usize> {
    let inv = t.recip();
    crate::rational::floor_u(&inv)
        .to_usize()
        .ok_or_else(|| Error::Resource("radius too small for a symbol comparison".into()))
}

trait AbsRat {
    fn abs_rat(&self) -> Rat;
}

impl AbsRat for Rat {
    fn abs_rat(&self) -> Rat {
        num_traits::Signed::abs(self)
    }
}

/// Orbit stream holding only the current state.
pub struct Orbit<'a> {
    system: &'a System,
    next: Option<State>,
    remaining: u64,
}

impl Iterator for Orbit<'_> {
    type Item = Result<State>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let current = self.next.take()?;
        self.remaining -= 1;
        if self.remaining > 0 {
            match self.system.apply(&current) {
                Ok(s) => self.next = Some(s),
                Err(e) => {
                    self.remaining = 0;
                    return Some(Err(e));
                }
            }
        }
        Some(Ok(current))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{BlockProgram, SymbolicWord};
    use crate::rational::int;

    fn shift_point(text: &str) -> State {
        State::Symbolic(ShiftPoint::new(Arc::new(SymbolicWord::parse(text).unwrap())))
    }

    #[test]
    fn apply_examples() {
        let tent = System::IntervalPL(IntervalPLMap::tent());
        let s = tent.apply(&State::Real(rat(1, 2))).unwrap();
        assert_eq!(s.as_real().unwrap(), &int(1));

        let rot = System::Rotation(Rotation::rational(rat(1, 4)).unwrap());
        let p = State::Circle(CirclePoint::Rational(rat(3, 4)));
        match rot.apply(&p).unwrap() {
            State::Circle(CirclePoint::Rational(x)) => assert_eq!(x, Rat::zero()),
            other => panic!("{other:?}"),
        }

        let x = shift_point("101(0)");
        let y = System::Shift.apply(&x).unwrap();
        match &y {
            State::Symbolic(p) => assert_eq!(p.first_symbols(4).unwrap(), vec![0, 1, 0, 0]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let tent = System::IntervalPL(IntervalPLMap::tent());
        let err = tent.apply(&State::Odometer(BigInt::zero())).unwrap_err();
        assert!(matches!(err, Error::KindMismatch { .. }));
        assert!(err.to_string().contains("interval-pl"));
        assert!(System::Shift.within(&State::Real(int(0)), &State::Real(int(0)), &int(1)).is_err());
    }

    #[test]
    fn within_examples() {
        let x = shift_point("101(0)");
        assert!(System::Shift.within(&x, &x, &rat(1, 1000)).unwrap());
        let a = shift_point("11111(0)");
        let b = shift_point("111111(0)");
        assert!(System::Shift.within(&a, &b, &rat(1, 5)).unwrap());
        assert!(!System::Shift.within(&a, &b, &rat(1, 6)).unwrap());

        let rot = System::Rotation(Rotation::rational(rat(1, 3)).unwrap());
        let p = State::Circle(CirclePoint::Rational(rat(1, 10)));
        let q = State::Circle(CirclePoint::Rational(rat(95, 100)));
        assert!(rot.within(&p, &q, &rat(1, 5)).unwrap());
        assert!(rot.within(&p, &p, &rat(1, 5)).unwrap());
        assert!(rot.within(&p, &q, &Rat::zero()).is_err());
    }

    #[test]
    fn orbit_examples() {
        let tent = System::IntervalPL(IntervalPLMap::tent());
        let xs: Vec<Rat> = tent
            .orbit(&State::Real(rat(2, 5)), 4)
            .map(|s| s.unwrap().as_real().unwrap().clone())
            .collect();
        assert_eq!(xs, vec![rat(2, 5), rat(4, 5), rat(2, 5), rat(4, 5)]);

        let rot = System::Rotation(Rotation::rational(rat(1, 3)).unwrap());
        let xs: Vec<String> = rot
            .orbit(&State::Circle(CirclePoint::Rational(Rat::zero())), 4)
            .map(|s| rot.format_state(&s.unwrap()))
            .collect();
        assert_eq!(xs, vec!["0", "1/3", "2/3", "0"]);

        let od: Vec<String> = System::Odometer
            .orbit(&State::Odometer(BigInt::zero()), 3)
            .map(|s| match s.unwrap() {
                State::Odometer(v) => odometer::format_point(&v, 3),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(od, vec!["000(0)", "100(0)", "010(0)"]);
    }

    #[test]
    fn power_of_shift_and_interval() {
        let tent = System::IntervalPL(IntervalPLMap::tent());
        let t3 = tent.power(3);
        let x = State::Real(rat(3, 7));
        let mut y = x.clone();
        for _ in 0..3 {
            y = tent.apply(&y).unwrap();
        }
        assert_eq!(t3.apply(&x).unwrap().as_real(), y.as_real());

        let program = Arc::new(BlockProgram::build(2, 1).unwrap());
        let u = State::Symbolic(ShiftPoint::new(Arc::new(SymbolicWord::Program(program))));
        match System::Shift.power(5).apply(&u).unwrap() {
            State::Symbolic(p) => assert_eq!(p.offset, BigUint::from(5u32)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn skew_product_uses_longest_prefix() {
        let halve = IntervalPLMap::from_ints(&[(0, 1), (1, 1)], &[(0, 1), (1, 2)]);
        let id = IntervalPLMap::identity();
        let zero = IntervalPLMap::from_ints(&[(0, 1), (1, 1)], &[(0, 1), (0, 1)]);
        let sp = SkewProduct::new(
            System::Odometer,
            vec![
                FiberRule { prefix: vec![1], map: halve },
                FiberRule { prefix: vec![1, 1], map: zero },
            ],
            id,
        )
        .unwrap();
        let sys = System::SkewProduct(sp);
        let step = |x: i64, y: Rat| match sys.apply(&State::Pair(Box::new(State::Odometer(BigInt::from(x))), y)).unwrap() {
            State::Pair(b, y) => (b, y),
            _ => unreachable!(),
        };
        assert_eq!(step(0, rat(1, 2)).1, rat(1, 2)); // default
        assert_eq!(step(1, rat(1, 2)).1, rat(1, 4)); // prefix 1
        assert_eq!(step(3, rat(1, 2)).1, int(0)); // prefix 11
        assert!(SkewProduct::new(System::IntervalPL(IntervalPLMap::tent()), vec![], IntervalPLMap::identity()).is_err());
    }
}
