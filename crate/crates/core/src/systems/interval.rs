//! Continuous piecewise-linear self-maps of `[0,1]` with rational data.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, Rat};

/// A closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "crate::rational::serde_rat")]
    pub lo: Rat,
    #[serde(with = "crate::rational::serde_rat")]
    pub hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn unit() -> Self {
        Interval::new(Rat::zero(), Rat::one())
    }

    pub fn diam(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_disjoint(&self, other: &Interval) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(
            (&self.lo).min(&other.lo).clone(),
            (&self.hi).max(&other.hi).clone(),
        )
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

/// Direction of a monotone piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Increasing,
    Decreasing,
    Constant,
}

/// A maximal monotone piece of a map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lap {
    pub domain: Interval,
    pub direction: Direction,
}

/// Continuous piecewise-linear map of `[0,1]` into itself, linear between consecutive breakpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalPLMap {
    breakpoints: Vec<Rat>,
    values: Vec<Rat>,
}

impl IntervalPLMap {
    pub fn new(breakpoints: Vec<Rat>, values: Vec<Rat>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Config("at least two breakpoints are required".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::Config(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if !breakpoints[0].is_zero() || !breakpoints.last().unwrap().is_one() {
            return Err(Error::Config("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.is_negative() || v > &Rat::one()) {
            return Err(Error::Config("values must lie in [0,1]".into()));
        }
        Ok(IntervalPLMap { breakpoints, values })
    }

    /// Full tent map `x -> 1 - |2x - 1|`.
    pub fn tent() -> Self {
        Self::from_ints(&[(0, 1), (1, 2), (1, 1)], &[(0, 1), (1, 1), (0, 1)])
    }

    pub fn identity() -> Self {
        Self::from_ints(&[(0, 1), (1, 1)], &[(0, 1), (1, 1)])
    }

    /// Builds a map from `(numerator, denominator)` pairs.
    pub fn from_ints(breakpoints: &[(i64, i64)], values: &[(i64, i64)]) -> Self {
        let b = breakpoints.iter().map(|&(p, q)| crate::rational::rat(p, q)).collect();
        let v = values.iter().map(|&(p, q)| crate::rational::rat(p, q)).collect();
        Self::new(b, v).expect("valid literal map")
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn piece_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    fn piece_index(&self, x: &Rat) -> usize {
        // Largest i with breakpoints[i] <= x, clamped to a valid piece.
        let i = match self.breakpoints.binary_search(x) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        i.min(self.piece_count() - 1)
    }

    fn lerp(&self, i: usize, x: &Rat) -> Rat {
        let (x0, x1) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
        let (y0, y1) = (&self.values[i], &self.values[i + 1]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn eval(&self, x: &Rat) -> Result<Rat> {
        if x.is_negative() || x > &Rat::one() {
            return Err(Error::InvalidState(format!(
                "{} is outside [0,1]",
                format_rational(x)
            )));
        }
        Ok(self.lerp(self.piece_index(x), x))
    }

    fn piece_direction(&self, i: usize) -> Direction {
        match self.values[i + 1].cmp(&self.values[i]) {
            Ordering::Greater => Direction::Increasing,
            Ordering::Less => Direction::Decreasing,
            Ordering::Equal => Direction::Constant,
        }
    }

    /// `self ∘ inner`, computed exactly by pulling the breakpoints of `self` back through `inner`.
    pub fn compose(&self, inner: &IntervalPLMap) -> IntervalPLMap {
        let mut xs: Vec<Rat> = vec![inner.breakpoints[0].clone()];
        let mut ys: Vec<Rat> = vec![inner.values[0].clone()];
        for i in 0..inner.piece_count() {
            let (x0, x1) = (&inner.breakpoints[i], &inner.breakpoints[i + 1]);
            let (y0, y1) = (&inner.values[i], &inner.values[i + 1]);
            if y0 != y1 {
                let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
                let start = self.breakpoints.partition_point(|b| b <= lo);
                let end = self.breakpoints.partition_point(|b| b < hi);
                let mut cuts: Vec<&Rat> = self.breakpoints[start..end].iter().collect();
                if y0 > y1 {
                    cuts.reverse();
                }
                for c in cuts {
                    xs.push(x0 + (x1 - x0) * (c - y0) / (y1 - y0));
                    ys.push(c.clone());
                }
            }
            xs.push(x1.clone());
            ys.push(y1.clone());
        }
        let vals = ys.iter().map(|y| self.eval(y).expect("inner maps into [0,1]")).collect();
        IntervalPLMap { breakpoints: xs, values: vals }.simplified()
    }

    /// Merges consecutive collinear pieces.
    pub fn simplified(mut self) -> Self {
        let mut keep = vec![true; self.breakpoints.len()];
        for i in 1..self.breakpoints.len() - 1 {
            let (x0, x1, x2) = (&self.breakpoints[i - 1], &self.breakpoints[i], &self.breakpoints[i + 1]);
            let (y0, y1, y2) = (&self.values[i - 1], &self.values[i], &self.values[i + 1]);
            if (y1 - y0) * (x2 - x1) == (y2 - y1) * (x1 - x0) {
                keep[i] = false;
            }
        }
        let mut k = keep.iter();
        self.breakpoints.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        self.values.retain(|_| *k.next().unwrap());
        self
    }

    /// The `m`-th iterate as a piecewise-linear map.
    pub fn power(&self, m: u32) -> IntervalPLMap {
        let mut acc = IntervalPLMap::identity();
        for _ in 0..m {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Maximal monotone pieces; constant pieces join the preceding lap.
    pub fn laps(&self) -> Vec<Lap> {
        let mut laps: Vec<Lap> = Vec::new();
        let mut start = 0usize;
        let mut dir = Direction::Constant;
        for i in 0..self.piece_count() {
            let d = self.piece_direction(i);
            let compatible = d == Direction::Constant || dir == Direction::Constant || d == dir;
            if !compatible {
                laps.push(Lap {
                    domain: Interval::new(self.breakpoints[start].clone(), self.breakpoints[i].clone()),
                    direction: dir,
                });
                start = i;
                dir = d;
            } else if dir == Direction::Constant {
                dir = d;
            }
        }
        laps.push(Lap {
            domain: Interval::new(
                self.breakpoints[start].clone(),
                self.breakpoints[self.piece_count()].clone(),
            ),
            direction: dir,
        });
        laps
    }

    pub fn lap_count(&self) -> usize {
        self.laps().len()
    }

    pub fn has_flat_piece(&self) -> bool {
        (0..self.piece_count()).any(|i| self.piece_direction(i) == Direction::Constant)
    }

    /// Exact image of a closed subinterval.
    pub fn image(&self, k: &Interval) -> Result<Interval> {
        let mut lo = self.eval(&k.lo)?;
        let mut hi = lo.clone();
        let inner = self
            .breakpoints
            .iter()
            .zip(&self.values)
            .filter(|(b, _)| &k.lo < *b && *b < &k.hi)
            .map(|(_, v)| v.clone());
        for v in inner.chain(std::iter::once(self.eval(&k.hi)?)) {
            if v < lo {
                lo = v;
            } else if v > hi {
                hi = v;
            }
        }
        Ok(Interval::new(lo, hi))
    }

    /// Minimum of `|slope|` over the pieces meeting the interior of `k`.
    pub fn min_abs_slope_on(&self, k: &Interval) -> Rat {
        self.slopes_on(k).into_iter().min().unwrap_or_else(Rat::zero)
    }

    pub fn max_abs_slope_on(&self, k: &Interval) -> Rat {
        self.slopes_on(k).into_iter().max().unwrap_or_else(Rat::zero)
    }

    fn slopes_on(&self, k: &Interval) -> Vec<Rat> {
        (0..self.piece_count())
            .filter(|&i| self.breakpoints[i] < k.hi && self.breakpoints[i + 1] > k.lo)
            .map(|i| {
                ((&self.values[i + 1] - &self.values[i])
                    / (&self.breakpoints[i + 1] - &self.breakpoints[i]))
                    .abs()
            })
            .collect()
    }

    /// Whether the map is strictly monotone on `k`, returning its direction.
    pub fn strict_direction_on(&self, k: &Interval) -> Option<Direction> {
        let mut dir = None;
        for i in 0..self.piece_count() {
            if self.breakpoints[i] < k.hi && self.breakpoints[i + 1] > k.lo {
                let d = self.piece_direction(i);
                if d == Direction::Constant {
                    return None;
                }
                match dir {
                    None => dir = Some(d),
                    Some(prev) if prev != d => return None,
                    _ => {}
                }
            }
        }
        dir
    }

    /// Unique `x ∈ k` with `f(x) = y`, for `f` strictly monotone on `k` and `y ∈ f(k)`.
    pub fn inverse_on(&self, k: &Interval, y: &Rat) -> Option<Rat> {
        for i in 0..self.piece_count() {
            let lo = (&self.breakpoints[i]).max(&k.lo);
            let hi = (&self.breakpoints[i + 1]).min(&k.hi);
            if lo > hi {
                continue;
            }
            let (ylo, yhi) = (self.lerp(i, lo), self.lerp(i, hi));
            let (a, b) = if ylo <= yhi { (&ylo, &yhi) } else { (&yhi, &ylo) };
            if a <= y && y <= b {
                if ylo == yhi {
                    return Some(lo.clone());
                }
                return Some(lo + (hi - lo) * (y - &ylo) / (&yhi - &ylo));
            }
        }
        None
    }

    /// Preimage of `target` inside `k`, for `f` strictly monotone on `k` with `target ⊆ f(k)`.
    pub fn pullback_on(&self, k: &Interval, target: &Interval) -> Option<Interval> {
        let dir = self.strict_direction_on(k)?;
        let a = self.inverse_on(k, &target.lo)?;
        let b = self.inverse_on(k, &target.hi)?;
        Some(match dir {
            Direction::Increasing => Interval::new(a, b),
            _ => Interval::new(b, a),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn tent_values() {
        let t = IntervalPLMap::tent();
        assert_eq!(t.eval(&rat(1, 2)).unwrap(), int(1));
        assert_eq!(t.eval(&rat(2, 5)).unwrap(), rat(4, 5));
        assert_eq!(t.eval(&rat(4, 5)).unwrap(), rat(2, 5));
        assert_eq!(t.eval(&int(1)).unwrap(), int(0));
        assert!(t.eval(&rat(3, 2)).is_err());
    }

    #[test]
    fn validation() {
        assert!(IntervalPLMap::new(vec![int(0), int(1)], vec![int(0)]).is_err());
        assert!(IntervalPLMap::new(vec![rat(1, 4), int(1)], vec![int(0), int(0)]).is_err());
        assert!(IntervalPLMap::new(vec![int(0), int(0), int(1)], vec![int(0); 3]).is_err());
        assert!(IntervalPLMap::new(vec![int(0), int(1)], vec![int(0), int(2)]).is_err());
    }

    #[test]
    fn tent_square_has_four_laps() {
        let t2 = IntervalPLMap::tent().power(2);
        assert_eq!(t2.lap_count(), 4);
        assert_eq!(
            t2.breakpoints(),
            &[int(0), rat(1, 4), rat(1, 2), rat(3, 4), int(1)]
        );
        for i in 0..=20 {
            let x = rat(i, 20);
            let t = IntervalPLMap::tent();
            let twice = t.eval(&t.eval(&x).unwrap()).unwrap();
            assert_eq!(t2.eval(&x).unwrap(), twice);
        }
    }

    #[test]
    fn identity_composition_stays_single_piece() {
        let id = IntervalPLMap::identity();
        assert_eq!(id.power(5), id);
    }

    #[test]
    fn image_and_pullback() {
        let t2 = IntervalPLMap::tent().power(2);
        let k1 = Interval::new(rat(1, 2), rat(3, 4));
        assert_eq!(t2.image(&k1).unwrap(), Interval::unit());
        let pre = t2.pullback_on(&k1, &Interval::new(int(0), rat(1, 4))).unwrap();
        assert_eq!(pre, Interval::new(rat(1, 2), rat(9, 16)));
        assert_eq!(t2.image(&Interval::unit()).unwrap(), Interval::unit());
    }

    #[test]
    fn flat_pieces_join_laps() {
        // up, flat, down: two laps
        let f = IntervalPLMap::from_ints(&[(0, 1), (1, 3), (2, 3), (1, 1)], &[(0, 1), (1, 1), (1, 1), (0, 1)]);
        assert_eq!(f.lap_count(), 2);
        assert!(f.has_flat_piece());
        let c = IntervalPLMap::from_ints(&[(0, 1), (1, 1)], &[(1, 2), (1, 2)]);
        assert_eq!(c.lap_count(), 1);
    }
}
