use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::BlockProgram;
use crate::error::{Error, Result};

/// An infinite 0/1 sequence with random access.
#[derive(Clone, Debug)]
pub enum SymbolicWord {
    /// `prefix` followed by `cycle` repeated forever.
    EventuallyPeriodic { prefix: Vec<u8>, cycle: Vec<u8> },
    /// The constructed point `u`, valid below `a_{level_cap}`.
    Program(Arc<BlockProgram>),
}

impl SymbolicWord {
    pub fn eventually_periodic(prefix: Vec<u8>, cycle: Vec<u8>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::invalid("periodic tail must be non-empty"));
        }
        if prefix.iter().chain(&cycle).any(|&s| s > 1) {
            return Err(Error::invalid("symbols must be 0 or 1"));
        }
        Ok(SymbolicWord::EventuallyPeriodic { prefix, cycle })
    }

    /// Parses `"101(0)"`: explicit prefix, periodic tail in parentheses.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (prefix, cycle) = match text.split_once('(') {
            Some((p, rest)) => {
                let c = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::invalid(format!("unterminated cycle in {text:?}")))?;
                (p, c)
            }
            None => (text, "0"),
        };
        let bits = |s: &str| -> Result<Vec<u8>> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::invalid(format!("bad symbol {c:?} in {text:?}"))),
                })
                .collect()
        };
        Self::eventually_periodic(bits(prefix)?, bits(cycle)?)
    }

    pub fn symbol_at(&self, i: &BigUint) -> Result<u8> {
        match self {
            SymbolicWord::EventuallyPeriodic { prefix, cycle } => {
                if let Some(s) = i.to_usize().and_then(|i| prefix.get(i)) {
                    return Ok(*s);
                }
                let j = (i - prefix.len()) % cycle.len();
                Ok(cycle[j.to_usize().unwrap()])
            }
            SymbolicWord::Program(p) => p.symbol_at(i),
        }
    }

    /// Exclusive index bound, `None` when the word is total.
    pub fn index_bound(&self) -> Option<BigUint> {
        match self {
            SymbolicWord::EventuallyPeriodic { .. } => None,
            SymbolicWord::Program(p) => Some(p.index_bound()),
        }
    }

    pub fn program(&self) -> Option<&Arc<BlockProgram>> {
        match self {
            SymbolicWord::Program(p) => Some(p),
            _ => None,
        }
    }

    /// Symbols `start .. start + len`.
    pub fn segment(&self, start: &BigUint, len: usize) -> Result<Vec<u8>> {
        if let SymbolicWord::Program(p) = self {
            return p.segment(start, len);
        }
        let mut out = Vec::with_capacity(len);
        let mut i = start.clone();
        for _ in 0..len {
            out.push(self.symbol_at(&i)?);
            i += 1u32;
        }
        Ok(out)
    }

    fn same_source(&self, other: &SymbolicWord) -> bool {
        match (self, other) {
            (SymbolicWord::Program(a), SymbolicWord::Program(b)) => Arc::ptr_eq(a, b),
            (
                SymbolicWord::EventuallyPeriodic { prefix: p1, cycle: c1 },
                SymbolicWord::EventuallyPeriodic { prefix: p2, cycle: c2 },
            ) => p1 == p2 && c1 == c2,
            _ => false,
        }
    }
}

/// A point of the full shift: a word viewed from `offset` onwards.
#[derive(Clone, Debug)]
pub struct ShiftPoint {
    pub word: Arc<SymbolicWord>,
    pub offset: BigUint,
}

impl ShiftPoint {
    pub fn new(word: Arc<SymbolicWord>) -> Self {
        ShiftPoint { word, offset: BigUint::zero() }
    }

    pub fn symbol(&self, i: &BigUint) -> Result<u8> {
        self.word.symbol_at(&(&self.offset + i))
    }

    pub fn shifted(&self, by: &BigUint) -> Self {
        ShiftPoint { word: self.word.clone(), offset: &self.offset + by }
    }

    pub fn first_symbols(&self, len: usize) -> Result<Vec<u8>> {
        self.word.segment(&self.offset, len)
    }

    /// Least 0-based index `< cap` where the two points differ.
    pub fn first_difference(&self, other: &ShiftPoint, cap: usize) -> Result<Option<usize>> {
        if cap == 0 {
            return Ok(None);
        }
        if self.word.same_source(&other.word) && self.offset == other.offset {
            return Ok(None);
        }
        let a = self.first_symbols(cap)?;
        let b = other.first_symbols(cap)?;
        Ok(a.iter().zip(&b).position(|(x, y)| x != y))
    }

    /// Whether the shift metric `1/k` (k = first 1-based disagreement) is below `1/l`
    /// for `l = floor(1/t)`, i.e. the first `l` symbols agree.
    pub fn agrees_on(&self, other: &ShiftPoint, l: usize) -> Result<bool> {
        Ok(self.first_difference(other, l)?.is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_periodic() {
        let w = SymbolicWord::parse("10(01)").unwrap();
        let s: Vec<u8> = (0..7u32).map(|i| w.symbol_at(&BigUint::from(i)).unwrap()).collect();
        assert_eq!(s, vec![1, 0, 0, 1, 0, 1, 0]);
        assert!(SymbolicWord::parse("12").is_err());
        assert!(SymbolicWord::parse("1(").is_err());
        assert!(SymbolicWord::parse("1()").is_err());
        let z = SymbolicWord::parse("101").unwrap();
        assert_eq!(z.symbol_at(&BigUint::from(10u32)).unwrap(), 0);
    }

    #[test]
    fn first_difference_one_based_metric() {
        let x = ShiftPoint::new(Arc::new(SymbolicWord::parse("11111(0)").unwrap()));
        let y = ShiftPoint::new(Arc::new(SymbolicWord::parse("111111(0)").unwrap()));
        // agree on the first five symbols, differ at the sixth
        assert_eq!(x.first_difference(&y, 10).unwrap(), Some(5));
        assert!(x.agrees_on(&y, 5).unwrap());
        assert!(!x.agrees_on(&y, 6).unwrap());
    }
}
