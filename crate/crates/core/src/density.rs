//! Return counts and finite-horizon lower/upper Banach density estimates.
//!
//! For a point `x`, radius `t` and horizon `n`, the return count is
//! `#{0 <= j < n : d(x, f^j x) < t}`; `j = 0` always counts. The lower and upper estimates are
//! the minimum and maximum of `count(n)/n` over a schedule of horizons `n_min <= n <= N`.
//! They are finite-horizon surrogates for the liminf and limsup, never the limits themselves.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{PatternCounter, ShiftPoint, SymbolicWord, MAX_MATERIALIZED};
use crate::error::{Error, Result};
use crate::rational::{format_rational, ratio, to_decimal, Rat};
use crate::systems::{shift_symbols_needed, State, System};

/// Default warm-up horizon.
pub const DEFAULT_N_MIN: u64 = 16;

/// Significant digits of decimal renderings.
pub const DECIMAL_DIGITS: usize = 12;

/// Which horizons `n` enter the min/max.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Every `n` in `[n_min, N]`.
    All,
    /// `n_min`, then `ceil(n * ratio)` (at least `n + 1`), always ending at `N`.
    Geometric(Rat),
}

impl Schedule {
    pub fn label(&self) -> String {
        match self {
            Schedule::All => "all".into(),
            Schedule::Geometric(r) => format!("geometric({})", format_rational(r)),
        }
    }

    /// Scheduled horizons in increasing order.
    pub fn horizons(&self, n_min: &BigUint, horizon: &BigUint) -> Result<Vec<BigUint>> {
        match self {
            Schedule::All => {
                let (lo, hi) = (to_u64(n_min)?, to_u64(horizon)?);
                Ok((lo..=hi).map(BigUint::from).collect())
            }
            Schedule::Geometric(r) => {
                if r <= &Rat::one() {
                    return Err(Error::invalid("geometric ratio must exceed 1"));
                }
                let mut out = vec![n_min.clone()];
                let mut n = n_min.clone();
                while &n < horizon {
                    let scaled = crate::rational::from_biguint(&n) * r;
                    let next = scaled.ceil().to_integer().to_biguint().unwrap();
                    n = next.max(&n + 1u32).min(horizon.clone());
                    out.push(n.clone());
                }
                Ok(out)
            }
        }
    }
}

/// How counts are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    /// One pass over the orbit.
    OrbitScan,
    /// Occurrence counting over the block recursion of the constructed word.
    Structural,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate {
    pub radius: Rat,
    pub lower: Rat,
    pub lower_at: BigUint,
    pub upper: Rat,
    pub upper_at: BigUint,
    /// Return count at the full horizon.
    pub count: BigUint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub horizon: BigUint,
    pub n_min: BigUint,
    pub schedule: Schedule,
    pub method: CountMethod,
    pub estimates: Vec<DensityEstimate>,
}

#[derive(Clone, Debug)]
pub struct DensityOptions {
    pub n_min: u64,
    pub schedule: Schedule,
    /// Force a counting method; `None` picks structural counting only when a scan is infeasible.
    pub method: Option<CountMethod>,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { n_min: DEFAULT_N_MIN, schedule: Schedule::All, method: None }
    }
}

fn to_u64(n: &BigUint) -> Result<u64> {
    n.to_u64().ok_or_else(|| Error::Resource(format!("horizon {n} is too large for an orbit scan")))
}

fn check_radius(t: &Rat) -> Result<()> {
    if t <= &Rat::zero() {
        return Err(Error::invalid("radius must be positive"));
    }
    Ok(())
}

/// The constructed-word point when structural counting applies to `(system, x)`.
fn structural_point<'a>(system: &System, x: &'a State) -> Option<&'a ShiftPoint> {
    match (system, x) {
        (System::Shift, State::Symbolic(p)) if matches!(*p.word, SymbolicWord::Program(_)) => Some(p),
        _ => None,
    }
}

/// Symbols that must agree for a shift return at radius `t`.
fn needed(t: &Rat) -> Result<usize> {
    shift_symbols_needed(t)
}

fn structural_count(p: &ShiftPoint, t: &Rat, horizon: &BigUint) -> Result<BigUint> {
    let l = needed(t)?;
    if l == 0 {
        return Ok(horizon.clone());
    }
    let program = p.word.program().expect("program word");
    let pattern = p.first_symbols(l)?;
    let counter = PatternCounter::new(program, pattern)?;
    counter.count_starts(&p.offset, horizon)
}

/// Return flags `d(x, f^j x) < t` for `j < horizon`, one vector per radius, in one orbit pass.
pub fn return_flags(system: &System, x: &State, radii: &[Rat], horizon: u64) -> Result<Vec<Vec<bool>>> {
    for t in radii {
        check_radius(t)?;
    }
    let n = usize::try_from(horizon).map_err(|_| Error::Resource("horizon exceeds address space".into()))?;
    let shift_like = match system {
        System::Shift => true,
        System::Power { base, .. } => matches!(**base, System::Shift),
        _ => false,
    };
    if let (true, State::Symbolic(p)) = (shift_like, x) {
        let step = match system {
            System::Power { m, .. } => *m as usize,
            _ => 1,
        };
        let lens = radii.iter().map(needed).collect::<Result<Vec<_>>>()?;
        let lmax = lens.iter().copied().max().unwrap_or(0);
        let span = (n.saturating_sub(1))
            .checked_mul(step)
            .and_then(|s| s.checked_add(lmax))
            .filter(|&s| s <= MAX_MATERIALIZED)
            .ok_or_else(|| Error::Resource("shift scan window too large to materialize".into()))?;
        let seg = p.first_symbols(span.max(lmax))?;
        return Ok(lens
            .iter()
            .map(|&l| (0..n).map(|j| seg[j * step..j * step + l] == seg[..l]).collect())
            .collect());
    }
    let mut flags = vec![Vec::with_capacity(n); radii.len()];
    for (j, state) in system.orbit(x, horizon).enumerate() {
        let state = state?;
        for (r, t) in radii.iter().enumerate() {
            let hit = system.within(x, &state, t).map_err(|e| match e {
                Error::Indeterminate { .. } => Error::Indeterminate { index: BigUint::from(j) },
                other => other,
            })?;
            flags[r].push(hit);
        }
    }
    Ok(flags)
}

/// `#{0 <= j < n : d(x, f^j x) < t}`.
pub fn return_count(system: &System, x: &State, t: &Rat, n: &BigUint) -> Result<BigUint> {
    return_count_with(system, x, t, n, None)
}

pub fn return_count_with(
    system: &System,
    x: &State,
    t: &Rat,
    n: &BigUint,
    method: Option<CountMethod>,
) -> Result<BigUint> {
    check_radius(t)?;
    if n.is_zero() {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let structural = structural_point(system, x);
    let use_structural = match method {
        Some(CountMethod::Structural) => {
            if structural.is_none() {
                return Err(Error::invalid("structural counting needs the constructed shift point"));
            }
            true
        }
        Some(CountMethod::OrbitScan) => false,
        None => structural.is_some() && n.to_usize().is_none_or(|n| n > MAX_MATERIALIZED / 2),
    };
    if use_structural {
        return structural_count(structural.unwrap(), t, n);
    }
    let flags = return_flags(system, x, std::slice::from_ref(t), to_u64(n)?)?;
    Ok(BigUint::from(flags[0].iter().filter(|&&b| b).count()))
}

/// Min/max of `count(n)/n` over the scheduled horizons.
pub fn density_profile(
    system: &System,
    x: &State,
    radii: &[Rat],
    horizon: u64,
    opts: &DensityOptions,
) -> Result<DensityProfile> {
    density_profile_big(system, x, radii, &BigUint::from(horizon), opts)
}

pub fn density_profile_big(
    system: &System,
    x: &State,
    radii: &[Rat],
    horizon: &BigUint,
    opts: &DensityOptions,
) -> Result<DensityProfile> {
    if radii.is_empty() {
        return Err(Error::invalid("radius grid is empty"));
    }
    let n_min = BigUint::from(opts.n_min);
    if opts.n_min == 0 || &n_min > horizon {
        return Err(Error::invalid("need 1 <= n_min <= horizon"));
    }
    let structural = structural_point(system, x);
    let method = match opts.method {
        Some(CountMethod::Structural) if structural.is_none() => {
            return Err(Error::invalid("structural counting needs the constructed shift point"))
        }
        Some(m) => m,
        None if structural.is_some() && horizon.to_usize().is_none_or(|n| n > MAX_MATERIALIZED / 2) => {
            CountMethod::Structural
        }
        None => CountMethod::OrbitScan,
    };
    let schedule = opts.schedule.horizons(&n_min, horizon)?;
    let estimates = match method {
        CountMethod::OrbitScan => {
            let flags = return_flags(system, x, radii, to_u64(horizon)?)?;
            let marks: Vec<usize> = schedule.iter().map(|n| n.to_usize().unwrap()).collect();
            radii
                .par_iter()
                .zip(flags.par_iter())
                .map(|(t, f)| scan_estimate(t, f, &marks))
                .collect()
        }
        CountMethod::Structural => {
            let p = structural.unwrap();
            radii
                .par_iter()
                .map(|t| structural_estimate(p, t, &schedule))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(DensityProfile {
        horizon: horizon.clone(),
        n_min,
        schedule: opts.schedule.clone(),
        method,
        estimates,
    })
}

pub(crate) fn scan_estimate(t: &Rat, flags: &[bool], marks: &[usize]) -> DensityEstimate {
    // (count, n) pairs compared by cross-multiplication.
    let mut lo: Option<(u64, u64)> = None;
    let mut hi: Option<(u64, u64)> = None;
    let mut count = 0u64;
    let mut next = 0usize;
    for (j, &f) in flags.iter().enumerate() {
        count += u64::from(f);
        let n = j + 1;
        if next < marks.len() && marks[next] == n {
            next += 1;
            let (c, n) = (count as u128, n as u128);
            if lo.is_none_or(|(lc, ln)| c * (ln as u128) < (lc as u128) * n) {
                lo = Some((count, n as u64));
            }
            if hi.is_none_or(|(hc, hn)| c * (hn as u128) > (hc as u128) * n) {
                hi = Some((count, n as u64));
            }
        }
    }
    let (lc, ln) = lo.expect("non-empty schedule");
    let (hc, hn) = hi.expect("non-empty schedule");
    DensityEstimate {
        radius: t.clone(),
        lower: ratio(&BigUint::from(lc), &BigUint::from(ln)),
        lower_at: BigUint::from(ln),
        upper: ratio(&BigUint::from(hc), &BigUint::from(hn)),
        upper_at: BigUint::from(hn),
        count: BigUint::from(count),
    }
}

fn structural_estimate(p: &ShiftPoint, t: &Rat, schedule: &[BigUint]) -> Result<DensityEstimate> {
    check_radius(t)?;
    let l = needed(t)?;
    let counter = if l == 0 {
        None
    } else {
        let program = p.word.program().expect("program word");
        Some(PatternCounter::new(program, p.first_symbols(l)?)?)
    };
    let mut best: Option<(Rat, BigUint, Rat, BigUint)> = None;
    let mut last = BigUint::zero();
    for n in schedule {
        let c = match &counter {
            None => n.clone(),
            Some(c) => c.count_starts(&p.offset, n)?,
        };
        let r = ratio(&c, n);
        best = Some(match best {
            None => (r.clone(), n.clone(), r, n.clone()),
            Some((lo, lo_at, hi, hi_at)) => {
                let (lo, lo_at) = if r < lo { (r.clone(), n.clone()) } else { (lo, lo_at) };
                let (hi, hi_at) = if r > hi { (r, n.clone()) } else { (hi, hi_at) };
                (lo, lo_at, hi, hi_at)
            }
        });
        last = c;
    }
    let (lower, lower_at, upper, upper_at) = best.expect("non-empty schedule");
    Ok(DensityEstimate { radius: t.clone(), lower, lower_at, upper, upper_at, count: last })
}

impl DensityProfile {
    pub fn estimate(&self, t: &Rat) -> Option<&DensityEstimate> {
        self.estimates.iter().find(|e| &e.radius == t)
    }

    /// CSV with exact rationals and decimal renderings.
    pub fn to_csv(&self, point_id: &str) -> String {
        let mut out = String::from(
            "point_id,radius,horizon,count,lower,lower_decimal,upper,upper_decimal,n_min,schedule,method\n",
        );
        let method = match self.method {
            CountMethod::OrbitScan => "orbit-scan",
            CountMethod::Structural => "structural",
        };
        for e in &self.estimates {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                point_id,
                format_rational(&e.radius),
                self.horizon,
                e.count,
                format_rational(&e.lower),
                to_decimal(&e.lower, DECIMAL_DIGITS),
                format_rational(&e.upper),
                to_decimal(&e.upper, DECIMAL_DIGITS),
                self.n_min,
                self.schedule.label(),
                method,
            )
            .expect("write to string");
        }
        out
    }
}

/// Both sides of `count_f(n m, t) >= count_{f^m}(n, t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterateInequality {
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub holds: bool,
}

/// Compares returns of `f` over `n m` steps with returns of `f^m` over `n` steps; the latter are
/// the multiples of `m` among the former, so the inequality always holds.
pub fn iterate_count_inequality(system: &System, x: &State, t: &Rat, n: u64, m: u32) -> Result<IterateInequality> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("n and m must be positive"));
    }
    let lhs = return_count_with(system, x, t, &BigUint::from(n * m as u64), Some(CountMethod::OrbitScan))?;
    let rhs = return_count_with(&system.power(m), x, t, &BigUint::from(n), Some(CountMethod::OrbitScan))?;
    let holds = lhs >= rhs;
    Ok(IterateInequality { lhs, rhs, holds })
}
