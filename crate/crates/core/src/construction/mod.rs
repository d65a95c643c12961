//! The irregularly recurrent transitive point `u` of the full two-symbol shift.
//!
//! `u` is the limit of the blocks
//!
//! ```text
//! A_0 = 10
//! A_n = A_{n-1} (A_0)^{k_{n,0}} (A_1)^{k_{n,1}} ... (A_{n-1})^{k_{n,n-1}} 0^{k_{n,n}} B_n
//! ```
//!
//! where `B_1, B_2, ...` enumerates every finite 0/1 block and `k_{n,m+1} = n * λ_{n,m}`,
//! with `λ_{n,m}` the length of the prefix of `A_n` ending after the `(A_m)` run. Lengths grow
//! doubly exponentially, so blocks are never materialized beyond level 2; every index query
//! descends the recursion on arbitrary-precision integers.

mod pattern;
mod word;

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use pattern::PatternCounter;
pub use word::{ShiftPoint, SymbolicWord};

/// Highest level `build` accepts unless a different bound is configured.
pub const DEFAULT_MAX_LEVEL: usize = 16;

/// Largest prefix (in symbols) that will be materialized in memory.
pub const MAX_MATERIALIZED: usize = 1 << 27;

/// Levels up to this one are kept as explicit symbol vectors.
const EXPLICIT_LEVELS: usize = 2;

/// `B_j` in length-then-lexicographic order: the binary digits of `j + 1` after the leading 1.
pub fn enumerate_block(j: &BigUint) -> Vec<u8> {
    assert!(!j.is_zero(), "blocks are numbered from 1");
    let v = j + 1u32;
    let bits = v.bits() as usize;
    (0..bits - 1)
        .rev()
        .map(|i| if v.bit(i as u64) { 1 } else { 0 })
        .collect()
}

/// Exponents, checkpoint lengths and block for one level `n >= 1`.
#[derive(Clone, Debug)]
pub struct LevelRecord {
    pub n: usize,
    /// `k_{n,m}` for `m = 0..=n`.
    pub k: Vec<BigUint>,
    /// `λ_{n,m}` for `m = 0..n`.
    pub lambda: Vec<BigUint>,
    pub a: BigUint,
    pub b: BigUint,
    pub c: BigUint,
    pub block: Vec<u8>,
}

/// One row of the checkpoint table. `lambda` is `None` for `m = n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckpointRow {
    pub n: usize,
    pub m: usize,
    pub lambda: Option<BigUint>,
    pub k: BigUint,
    pub a_n: BigUint,
    pub b_n: BigUint,
    pub c_n: BigUint,
}

/// Piece of the layout of `A_n`.
#[derive(Clone, Debug)]
pub(crate) enum Item<'a> {
    /// `count` consecutive copies of `A_level`.
    Run { level: usize, count: &'a BigUint },
    Zeros(&'a BigUint),
    Literal(&'a [u8]),
}

/// Arithmetic progression `start, start + stride, ...` with `count` terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithmeticRun {
    pub start: BigUint,
    pub stride: BigUint,
    pub count: BigUint,
}

impl ArithmeticRun {
    pub fn get(&self, j: &BigUint) -> Option<BigUint> {
        (j < &self.count).then(|| &self.start + &self.stride * j)
    }

    pub fn last(&self) -> Option<BigUint> {
        if self.count.is_zero() {
            None
        } else {
            self.get(&(&self.count - 1u32))
        }
    }

    pub fn contains(&self, x: &BigUint) -> bool {
        if x < &self.start {
            return false;
        }
        let (q, r) = (x - &self.start).div_rem(&self.stride);
        r.is_zero() && q < self.count
    }

    pub fn iter(&self) -> impl Iterator<Item = BigUint> + '_ {
        let mut next = self.start.clone();
        let mut left = self.count.clone();
        std::iter::from_fn(move || {
            if left.is_zero() {
                return None;
            }
            left -= 1u32;
            let out = next.clone();
            next += &self.stride;
            Some(out)
        })
    }
}

/// The construction tables together with the explicitly stored low levels.
#[derive(Clone, Debug)]
pub struct BlockProgram {
    seed: BigUint,
    levels: Vec<LevelRecord>,
    explicit: Vec<Vec<u8>>,
}

impl BlockProgram {
    /// Builds levels `1..=level_cap` with `k_{1,0} = seed` and `k_{n,0} = k_{n-1,n-1} + 1`.
    pub fn build(level_cap: usize, seed: u64) -> Result<Self> {
        Self::build_bounded(level_cap, seed, DEFAULT_MAX_LEVEL)
    }

    pub fn build_bounded(level_cap: usize, seed: u64, max_level: usize) -> Result<Self> {
        if level_cap == 0 {
            return Err(Error::invalid("level cap must be at least 1"));
        }
        if seed == 0 {
            return Err(Error::invalid("seed exponent k_{1,0} must be positive"));
        }
        if level_cap > max_level {
            return Err(Error::Resource(format!(
                "level {level_cap} exceeds the configured bound of {max_level}; block lengths grow doubly exponentially"
            )));
        }
        let seed = BigUint::from(seed);
        let mut lens: Vec<BigUint> = vec![BigUint::from(2u32)];
        let mut levels: Vec<LevelRecord> = Vec::with_capacity(level_cap);
        for n in 1..=level_cap {
            let nn = BigUint::from(n);
            let k0 = match levels.last() {
                None => seed.clone(),
                Some(prev) => prev.k[prev.n].clone() + 1u32,
            };
            let mut k = vec![k0];
            let mut lambda = Vec::with_capacity(n);
            let mut acc = &lens[n - 1] + &k[0] * &lens[0];
            lambda.push(acc.clone());
            for m in 1..n {
                let km = &nn * &lambda[m - 1];
                acc += &km * &lens[m];
                k.push(km);
                lambda.push(acc.clone());
            }
            let knn = &nn * &lambda[n - 1];
            let block = enumerate_block(&nn);
            let b = BigUint::from(block.len());
            let a = &acc + &knn + &b;
            let c = &a - &b - &knn;
            k.push(knn);
            lens.push(a.clone());
            levels.push(LevelRecord { n, k, lambda, a, b, c, block });
        }
        let mut program = BlockProgram { seed, levels, explicit: Vec::new() };
        let mut explicit = vec![vec![1u8, 0u8]];
        for n in 1..=level_cap.min(EXPLICIT_LEVELS) {
            let len = program.len(n).to_usize().expect("low levels are small");
            let mut out = Vec::with_capacity(len);
            let (mut skip, mut limit) = (BigUint::zero(), len);
            program.emit(n, &mut skip, &mut limit, &mut out, &explicit);
            explicit.push(out);
        }
        program.explicit = explicit;
        Ok(program)
    }

    pub fn level_cap(&self) -> usize {
        self.levels.len()
    }

    pub fn seed(&self) -> &BigUint {
        &self.seed
    }

    /// Record for level `n` (`1 <= n <= level_cap`).
    pub fn level(&self, n: usize) -> &LevelRecord {
        &self.levels[n - 1]
    }

    /// `a_n = |A_n|`, with `a_0 = 2`.
    pub fn len(&self, n: usize) -> BigUint {
        if n == 0 {
            BigUint::from(2u32)
        } else {
            self.levels[n - 1].a.clone()
        }
    }

    fn len_ref(&self, n: usize) -> std::borrow::Cow<'_, BigUint> {
        if n == 0 {
            std::borrow::Cow::Owned(BigUint::from(2u32))
        } else {
            std::borrow::Cow::Borrowed(&self.levels[n - 1].a)
        }
    }

    pub fn k(&self, n: usize, m: usize) -> &BigUint {
        &self.levels[n - 1].k[m]
    }

    pub fn lambda(&self, n: usize, m: usize) -> &BigUint {
        &self.levels[n - 1].lambda[m]
    }

    /// Index bound of the implicit word: `a_{level_cap}`.
    pub fn index_bound(&self) -> BigUint {
        self.len(self.level_cap())
    }

    pub(crate) fn items(&self, n: usize) -> Vec<Item<'_>> {
        let rec = self.level(n);
        let mut items = Vec::with_capacity(n + 3);
        items.push(Item::Run { level: n - 1, count: one() });
        for m in 0..n {
            items.push(Item::Run { level: m, count: &rec.k[m] });
        }
        items.push(Item::Zeros(&rec.k[n]));
        items.push(Item::Literal(&rec.block));
        items
    }

    /// Appends `A_n[skip .. skip + limit]` to `out`, skipping whole runs arithmetically.
    fn emit(&self, n: usize, skip: &mut BigUint, limit: &mut usize, out: &mut Vec<u8>, explicit: &[Vec<u8>]) {
        if let Some(block) = explicit.get(n) {
            let s = skip.to_usize().unwrap_or(usize::MAX);
            if s >= block.len() {
                *skip -= block.len();
                return;
            }
            let take = (*limit).min(block.len() - s);
            out.extend_from_slice(&block[s..s + take]);
            *skip = BigUint::zero();
            *limit -= take;
            return;
        }
        for item in self.items(n) {
            if *limit == 0 {
                return;
            }
            match item {
                Item::Run { level, count } => {
                    let unit = self.len_ref(level).into_owned();
                    let total = &unit * count;
                    if *skip >= total {
                        *skip -= total;
                        continue;
                    }
                    let (mut copy, inner) = skip.div_rem(&unit);
                    *skip = inner;
                    while *limit > 0 && &copy < count {
                        self.emit(level, skip, limit, out, explicit);
                        copy += 1u32;
                    }
                }
                Item::Zeros(count) => {
                    if *skip >= *count {
                        *skip -= count;
                        continue;
                    }
                    let avail = count - &*skip;
                    let take = avail.to_usize().map_or(*limit, |a| a.min(*limit));
                    out.resize(out.len() + take, 0);
                    *skip = BigUint::zero();
                    *limit -= take;
                }
                Item::Literal(block) => {
                    let s = skip.to_usize().unwrap_or(usize::MAX);
                    if s >= block.len() {
                        *skip -= block.len();
                        continue;
                    }
                    let take = (*limit).min(block.len() - s);
                    out.extend_from_slice(&block[s..s + take]);
                    *skip = BigUint::zero();
                    *limit -= take;
                }
            }
        }
    }

    /// First `len` symbols of `u`.
    pub fn prefix(&self, len: usize) -> Result<Vec<u8>> {
        self.segment(&BigUint::zero(), len)
    }

    /// Symbols `start .. start + len` of `u`, materialized by walking the block layout.
    pub fn segment(&self, start: &BigUint, len: usize) -> Result<Vec<u8>> {
        if len > MAX_MATERIALIZED {
            return Err(Error::Resource(format!(
                "refusing to materialize {len} symbols (limit {MAX_MATERIALIZED})"
            )));
        }
        if len == 0 {
            return Ok(Vec::new());
        }
        let end = start + len;
        if end > self.index_bound() {
            return Err(self.out_of_range(&(end - 1u32)));
        }
        let top = &self.explicit[self.explicit.len() - 1];
        if let Some(s) = start.to_usize() {
            if s + len <= top.len() {
                return Ok(top[s..s + len].to_vec());
            }
        }
        let n = (1..=self.level_cap()).find(|&n| end <= self.levels[n - 1].a).unwrap();
        let mut out = Vec::with_capacity(len);
        let mut skip = start.clone();
        let mut limit = len;
        self.emit(n, &mut skip, &mut limit, &mut out, &self.explicit);
        Ok(out)
    }

    fn out_of_range(&self, index: &BigUint) -> Error {
        let mut required = self.level_cap() + 1;
        // Estimate the required level assuming lengths at least square each level.
        let mut bits = self.index_bound().bits();
        while bits <= index.bits() {
            bits *= 2;
            required += 1;
        }
        Error::OutOfRange { index: index.clone(), required_level: required }
    }

    /// `i`-th symbol (0-based) of `u`, for `i < a_{level_cap}`.
    pub fn symbol_at(&self, i: &BigUint) -> Result<u8> {
        let cap = self.level_cap();
        if i >= &self.levels[cap - 1].a {
            return Err(self.out_of_range(i));
        }
        // Prefix stability: descend from the lowest level containing i.
        let n = (1..=cap).find(|&n| i < &self.levels[n - 1].a).unwrap();
        Ok(self.symbol_in(n, i.clone()))
    }

    /// `i`-th symbol of `A_n` itself; prefix stability makes this agree with `symbol_at`.
    pub fn symbol_at_level(&self, n: usize, i: &BigUint) -> Result<u8> {
        if n == 0 || n > self.level_cap() {
            return Err(Error::invalid(format!("level {n} is not built")));
        }
        if i >= &self.levels[n - 1].a {
            return Err(Error::invalid(format!("index {i} exceeds a_{n}")));
        }
        Ok(self.symbol_in(n, i.clone()))
    }

    fn symbol_in(&self, mut n: usize, mut i: BigUint) -> u8 {
        loop {
            if let Some(block) = self.explicit.get(n) {
                return block[i.to_usize().expect("explicit index")];
            }
            let rec = self.level(n);
            let prev = self.len_ref(n - 1);
            if i < *prev {
                n -= 1;
                continue;
            }
            // Locate the run containing i by the checkpoint lengths.
            let mut start = prev.into_owned();
            let mut found = None;
            for m in 0..n {
                if i < rec.lambda[m] {
                    found = Some(m);
                    break;
                }
                start = rec.lambda[m].clone();
            }
            match found {
                Some(m) => {
                    i = (i - start) % self.len_ref(m).as_ref();
                    n = m;
                }
                None => {
                    let zeros_end = &rec.lambda[n - 1] + &rec.k[n];
                    if i < zeros_end {
                        return 0;
                    }
                    let j = (i - zeros_end).to_usize().expect("inside B_n");
                    return rec.block[j];
                }
            }
        }
    }

    /// The full checkpoint table, rows ordered by `(n, m)`.
    pub fn checkpoints(&self) -> Vec<CheckpointRow> {
        let mut rows = Vec::new();
        for rec in &self.levels {
            for m in 0..=rec.n {
                rows.push(CheckpointRow {
                    n: rec.n,
                    m,
                    lambda: rec.lambda.get(m).cloned(),
                    k: rec.k[m].clone(),
                    a_n: rec.a.clone(),
                    b_n: rec.b.clone(),
                    c_n: rec.c.clone(),
                });
            }
        }
        rows
    }

    pub fn checkpoints_csv(&self) -> String {
        let mut out = String::from("n,m,lambda,k,a_n,b_n,c_n\n");
        for r in self.checkpoints() {
            let lambda = r.lambda.map(|l| l.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{},{},{}", r.n, r.m, lambda, r.k, r.a_n, r.b_n, r.c_n)
                .expect("write to string");
        }
        out
    }

    /// Start offsets of the `(A_m)^{k_{n,m}}` run inside `A_n`.
    pub fn occurrence_offsets(&self, n: usize, m: usize) -> Result<ArithmeticRun> {
        if !(m < n && n <= self.level_cap()) {
            return Err(Error::invalid(format!(
                "need 0 <= m < n <= {}, got n={n}, m={m}",
                self.level_cap()
            )));
        }
        let start = if m == 0 {
            self.len(n - 1)
        } else {
            self.lambda(n, m - 1).clone()
        };
        Ok(ArithmeticRun {
            start,
            stride: self.len(m),
            count: self.k(n, m).clone(),
        })
    }

    /// Exact checkpoint ratio `k_{n,m} / λ_{n,m}`.
    pub fn checkpoint_ratio(&self, n: usize, m: usize) -> crate::rational::Rat {
        crate::rational::ratio(self.k(n, m), self.lambda(n, m))
    }
}

fn one() -> &'static BigUint {
    static ONE: std::sync::OnceLock<BigUint> = std::sync::OnceLock::new();
    ONE.get_or_init(BigUint::one)
}
