//! Exact occurrence counting of a short pattern inside long prefixes of `u`.
//!
//! Each block `A_m` is summarized by its length, the number of pattern occurrences fully
//! inside it, and its first and last `L - 1` symbols. Concatenation only needs the
//! occurrences straddling the seam, and a run of identical copies adds a constant number of
//! occurrences per copy once the run is longer than the pattern, so counts over prefixes of
//! length ~10^25 cost a few thousand window scans.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{BlockProgram, Item};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct Summary {
    len: BigUint,
    count: BigUint,
    head: Vec<u8>,
    tail: Vec<u8>,
}

/// Occurrence counter for one pattern over one program.
#[derive(Debug)]
pub struct PatternCounter<'a> {
    program: &'a BlockProgram,
    pattern: Vec<u8>,
    failure: Vec<usize>,
    summaries: Vec<Summary>,
    zero: Summary,
}

struct Appender<'c> {
    pattern: &'c [u8],
    failure: &'c [usize],
    window: Vec<u8>,
    count: BigUint,
}

fn failure_table(p: &[u8]) -> Vec<usize> {
    let mut f = vec![0usize; p.len()];
    let mut k = 0;
    for i in 1..p.len() {
        while k > 0 && p[i] != p[k] {
            k = f[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        f[i] = k;
    }
    f
}

impl<'c> Appender<'c> {
    fn new(pattern: &'c [u8], failure: &'c [usize]) -> Self {
        Appender { pattern, failure, window: Vec::new(), count: BigUint::zero() }
    }

    fn keep(&self) -> usize {
        self.pattern.len() - 1
    }

    /// Match end positions (exclusive) in `text`.
    fn scan(&self, text: &[u8], mut on_match: impl FnMut(usize)) {
        let p = self.pattern;
        let mut k = 0usize;
        for (i, &c) in text.iter().enumerate() {
            while k > 0 && c != p[k] {
                k = self.failure[k - 1];
            }
            if c == p[k] {
                k += 1;
            }
            if k == p.len() {
                on_match(i + 1);
                k = self.failure[k - 1];
            }
        }
    }

    fn set_window(&mut self, text: &[u8]) {
        let keep = self.keep();
        self.window = text[text.len().saturating_sub(keep)..].to_vec();
    }

    /// Appends explicit symbols; returns the number of new occurrences.
    fn push_symbols(&mut self, symbols: &[u8]) -> BigUint {
        let mut text = self.window.clone();
        text.extend_from_slice(symbols);
        let w = self.window.len();
        let mut added = 0u64;
        self.scan(&text, |end| {
            if end > w {
                added += 1;
            }
        });
        self.set_window(&text);
        let added = BigUint::from(added);
        self.count += &added;
        added
    }

    /// Appends a summarized block.
    fn push_summary(&mut self, s: &Summary) -> BigUint {
        let keep = self.keep();
        if s.len.to_usize().is_some_and(|l| l <= keep) {
            return self.push_symbols(&s.head);
        }
        let mut text = self.window.clone();
        text.extend_from_slice(&s.head);
        let w = self.window.len();
        let l = self.pattern.len();
        let mut straddling = 0u64;
        self.scan(&text, |end| {
            if end > w && end - l < w {
                straddling += 1;
            }
        });
        self.window = s.tail.clone();
        let added = &s.count + straddling;
        self.count += &added;
        added
    }

    /// Appends `copies` consecutive copies of a summarized block.
    fn push_run(&mut self, s: &Summary, copies: &BigUint) {
        if copies.is_zero() {
            return;
        }
        // After `steady` copies the window is a suffix of the periodic run.
        let keep = BigUint::from(self.keep());
        let steady = keep.div_ceil(&s.len) + 1u32;
        let explicit = copies.min(&steady).to_usize().expect("small");
        let mut last = BigUint::zero();
        for _ in 0..explicit {
            last = self.push_summary(s);
        }
        if copies > &steady {
            self.count += last * (copies - &steady);
        }
    }
}

impl<'a> PatternCounter<'a> {
    /// Prepares summaries for every level of `program`.
    pub fn new(program: &'a BlockProgram, pattern: Vec<u8>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::invalid("pattern must be non-empty"));
        }
        if pattern.iter().any(|&s| s > 1) {
            return Err(Error::invalid("pattern symbols must be 0 or 1"));
        }
        let failure = failure_table(&pattern);
        let keep = pattern.len() - 1;
        let top_len = program.index_bound();
        let head_len = if BigUint::from(keep) <= top_len { keep } else { top_len.to_usize().unwrap() };
        let u_head = program.prefix(head_len)?;
        let mut counter = PatternCounter {
            program,
            pattern,
            failure,
            summaries: Vec::new(),
            zero: Summary { len: BigUint::from(1u32), count: BigUint::zero(), head: vec![0], tail: vec![] },
        };
        let zero = counter.explicit_summary(&[0]);
        counter.zero = zero;
        let a0 = counter.explicit_summary(&[1, 0]);
        counter.summaries.push(a0);
        for n in 1..=program.level_cap() {
            let mut app = Appender::new(&counter.pattern, &counter.failure);
            for item in program.items(n) {
                counter.push_item(&mut app, &item);
            }
            let len = program.len(n);
            let head = u_head[..keep.min(len.to_usize().unwrap_or(usize::MAX))].to_vec();
            let s = Summary { len, count: app.count, head, tail: app.window };
            counter.summaries.push(s);
        }
        Ok(counter)
    }

    /// Counter for the first `len` symbols of `u` (the returns pattern at radius `1/len`).
    pub fn for_prefix(program: &'a BlockProgram, len: usize) -> Result<Self> {
        let pattern = program.prefix(len)?;
        Self::new(program, pattern)
    }

    pub fn pattern(&self) -> &[u8] {
        &self.pattern
    }

    fn explicit_summary(&self, symbols: &[u8]) -> Summary {
        let mut app = Appender::new(&self.pattern, &self.failure);
        app.push_symbols(symbols);
        let keep = self.pattern.len() - 1;
        Summary {
            len: BigUint::from(symbols.len()),
            count: app.count,
            head: symbols[..keep.min(symbols.len())].to_vec(),
            tail: app.window,
        }
    }

    fn push_item(&self, app: &mut Appender<'_>, item: &Item<'_>) {
        match item {
            Item::Run { level, count } => app.push_run(&self.summaries[*level], count),
            Item::Zeros(count) => app.push_run(&self.zero, count),
            Item::Literal(block) => {
                app.push_symbols(block);
            }
        }
    }

    fn push_prefix(&self, app: &mut Appender<'_>, n: usize, limit: &BigUint) {
        if limit >= &self.summaries[n].len {
            app.push_summary(&self.summaries[n]);
            return;
        }
        if n == 0 {
            let l = limit.to_usize().unwrap();
            app.push_symbols(&[1, 0][..l]);
            return;
        }
        let mut rem = limit.clone();
        for item in self.program.items(n) {
            if rem.is_zero() {
                break;
            }
            let (unit, copies, summary) = match &item {
                Item::Run { level, count } => (&self.summaries[*level].len, *count, &self.summaries[*level]),
                Item::Zeros(count) => (&self.zero.len, *count, &self.zero),
                Item::Literal(block) => {
                    let take = rem.to_usize().map_or(block.len(), |r| r.min(block.len()));
                    app.push_symbols(&block[..take]);
                    rem -= take;
                    continue;
                }
            };
            let total = unit * copies;
            if total <= rem {
                app.push_run(summary, copies);
                rem -= total;
                continue;
            }
            let (whole, part) = rem.div_rem(unit);
            app.push_run(summary, &whole);
            if !part.is_zero() {
                match item {
                    Item::Run { level, .. } => self.push_prefix(app, level, &part),
                    _ => {
                        let z = part.to_usize().unwrap();
                        app.push_symbols(&vec![0; z]);
                    }
                }
            }
            break;
        }
    }

    /// Number of occurrences lying entirely inside `u[0..len)`.
    pub fn occurrences_in_prefix(&self, len: &BigUint) -> Result<BigUint> {
        let bound = self.program.index_bound();
        if len > &bound {
            return Err(Error::OutOfRange { index: len - 1u32, required_level: self.program.level_cap() + 1 });
        }
        let mut app = Appender::new(&self.pattern, &self.failure);
        let n = (0..=self.program.level_cap())
            .find(|&n| len <= &self.summaries[n].len)
            .unwrap();
        self.push_prefix(&mut app, n, len);
        Ok(app.count)
    }

    /// `#{ start <= j < start + horizon : u[j..j+L) = pattern }`.
    pub fn count_starts(&self, start: &BigUint, horizon: &BigUint) -> Result<BigUint> {
        let l = self.pattern.len() - 1;
        let hi = self.occurrences_in_prefix(&(start + horizon + l))?;
        let lo = if start.is_zero() {
            BigUint::zero()
        } else {
            self.occurrences_in_prefix(&(start + l))?
        };
        Ok(hi - lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_count(text: &[u8], pattern: &[u8], start: usize, horizon: usize) -> usize {
        (start..start + horizon)
            .filter(|&j| text[j..].starts_with(pattern))
            .count()
    }

    #[test]
    fn matches_naive_scan_level_three() {
        let p = BlockProgram::build(3, 1).unwrap();
        let text = p.prefix(300_000).unwrap();
        for l in [1usize, 2, 3, 9, 20, 1084] {
            let c = PatternCounter::for_prefix(&p, l).unwrap();
            for (s, h) in [(0usize, 1usize), (0, 361), (0, 1083), (5, 70_840), (1000, 250_000), (17, 123_457)] {
                let got = c.count_starts(&BigUint::from(s), &BigUint::from(h)).unwrap();
                assert_eq!(got, BigUint::from(naive_count(&text, &text[..l], s, h)), "L={l} s={s} h={h}");
            }
        }
    }

    #[test]
    fn arbitrary_patterns() {
        let p = BlockProgram::build(3, 2).unwrap();
        let text = p.prefix(100_000).unwrap();
        for pat in [vec![0u8, 0, 0], vec![1, 1], vec![0, 1, 1, 0], vec![0]] {
            let c = PatternCounter::new(&p, pat.clone()).unwrap();
            let got = c.count_starts(&BigUint::from(3u32), &BigUint::from(90_000u32)).unwrap();
            assert_eq!(got, BigUint::from(naive_count(&text, &pat, 3, 90_000)));
        }
    }

    #[test]
    fn ones_in_level_prefixes() {
        let p = BlockProgram::build(2, 1).unwrap();
        let ones = PatternCounter::new(&p, vec![1]).unwrap();
        assert_eq!(ones.occurrences_in_prefix(&BigUint::from(1083u32)).unwrap(), BigUint::from(83u32));
        assert_eq!(ones.occurrences_in_prefix(&BigUint::from(9u32)).unwrap(), BigUint::from(2u32));
        assert!(ones.occurrences_in_prefix(&BigUint::from(1085u32)).is_err());
    }
}
