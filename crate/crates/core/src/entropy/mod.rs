//! Entropy of piecewise-linear interval maps: lap growth, strict turbulence, itinerary realization
//! and Li-Yorke pair scanning.

mod itinerary;
mod liyorke;
mod turbulence;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::systems::{Direction, IntervalPLMap};

pub use itinerary::{
    CheckpointCount,
    ir_witness_pipeline, realize_itinerary, ItineraryCoder, PipelineParams, PipelineReport, RadiusMatch,
    MAX_REALIZATION_DEPTH,
};
pub use liyorke::{li_yorke_pair, li_yorke_scan, LiYorkePairReport, LiYorkeParams, PairSource};
pub use turbulence::{entropy_lower_bound, find_turbulence, EntropyBound, TurbulenceWitness, MAX_SEARCH_PIECES};

/// Breakpoint budget of explicit composition.
pub const MAX_COMPOSED_BREAKPOINTS: usize = 1 << 20;

/// Budget of distinct lap images tracked by the image-multiset recursion.
pub const MAX_LAP_IMAGES: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LapMethod {
    /// Counts laps of `f^(n+1)` from the images of the laps of `f^n`.
    ImageMultiset,
    /// Composes `f^n` explicitly.
    Composition,
}

/// Lap numbers `L(1), ..., L(achieved)` and the growth-rate estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LapGrowth {
    pub n_max: usize,
    pub achieved: usize,
    pub method: LapMethod,
    #[serde(serialize_with = "ser_counts")]
    pub lap_counts: Vec<BigUint>,
    /// Least-squares slope of `log L(n)` over the final third of `1..=achieved`.
    pub estimate: f64,
    /// Set when a budget stopped the computation before `n_max`.
    pub truncated: bool,
}

fn ser_counts<S: serde::Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

impl LapGrowth {
    pub fn laps(&self, n: usize) -> Option<&BigUint> {
        n.checked_sub(1).and_then(|i| self.lap_counts.get(i))
    }

    /// CSV with columns `n,laps,log_laps`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,laps,log_laps\n");
        for (i, c) in self.lap_counts.iter().enumerate() {
            out.push_str(&format!("{},{},{:.12}\n", i + 1, c, ln_big(c)));
        }
        out
    }
}

/// Natural logarithm of a positive integer.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 53;
    (n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxy / sxx).max(0.0)
}

fn estimate(counts: &[BigUint]) -> f64 {
    let n = counts.len();
    let from = (2 * n).div_ceil(3).max(1);
    let pts: Vec<(f64, f64)> = (from..=n).map(|i| (i as f64, ln_big(&counts[i - 1]))).collect();
    slope(&pts)
}

/// Exact lap numbers of `f^n` for `n <= n_max` and their exponential growth rate.
///
/// Maps without flat pieces use the image-multiset recursion, which stays small when critical
/// orbits are finite. Otherwise iterates are composed explicitly. Either route stops early with
/// `truncated` set once its budget is exceeded.
pub fn lap_entropy(map: &IntervalPLMap, n_max: usize) -> Result<LapGrowth> {
    if n_max < 4 {
        return Err(Error::invalid("n_max must be at least 4"));
    }
    let (method, counts) = if map.has_flat_piece() {
        (LapMethod::Composition, laps_by_composition(map, n_max))
    } else {
        (LapMethod::ImageMultiset, laps_by_images(map, n_max))
    };
    let achieved = counts.len();
    if achieved < n_max {
        log::warn!("lap computation stopped at n = {achieved} of {n_max}");
    }
    Ok(LapGrowth { n_max, achieved, method, estimate: estimate(&counts), truncated: achieved < n_max, lap_counts: counts })
}

fn laps_by_composition(map: &IntervalPLMap, n_max: usize) -> Vec<BigUint> {
    let mut counts = Vec::new();
    let mut g = map.clone();
    loop {
        counts.push(BigUint::from(g.lap_count()));
        if counts.len() == n_max {
            break;
        }
        let next = map.compose(&g);
        if next.breakpoints().len() > MAX_COMPOSED_BREAKPOINTS {
            break;
        }
        g = next;
    }
    counts
}

/// Turning points of a map without flat pieces.
fn turning_points(map: &IntervalPLMap) -> Vec<Rat> {
    let laps = map.laps();
    laps[..laps.len() - 1].iter().map(|l| l.domain.hi.clone()).collect()
}

fn laps_by_images(map: &IntervalPLMap, n_max: usize) -> Vec<BigUint> {
    let turns = turning_points(map);
    let mut images: BTreeMap<(Rat, Rat), BigUint> = BTreeMap::new();
    for lap in map.laps() {
        debug_assert_ne!(lap.direction, Direction::Constant);
        let im = map.image(&lap.domain).expect("lap inside [0,1]");
        *images.entry((im.lo, im.hi)).or_insert_with(BigUint::zero) += 1u32;
    }
    let mut counts = vec![BigUint::from(turns.len() + 1)];
    while counts.len() < n_max {
        let mut next: BTreeMap<(Rat, Rat), BigUint> = BTreeMap::new();
        let mut total = BigUint::zero();
        for ((lo, hi), mult) in &images {
            let mut cuts = vec![lo.clone()];
            cuts.extend(turns.iter().filter(|c| lo < *c && *c < hi).cloned());
            cuts.push(hi.clone());
            for w in cuts.windows(2) {
                let (a, b) = (map.eval(&w[0]).unwrap(), map.eval(&w[1]).unwrap());
                let key = if a <= b { (a, b) } else { (b, a) };
                *next.entry(key).or_insert_with(BigUint::zero) += mult;
                total += mult;
            }
        }
        if next.len() > MAX_LAP_IMAGES {
            break;
        }
        counts.push(total);
        images = next;
    }
    counts
}

/// `L(n + k) <= L(n) L(k)` over all computed prefixes.
pub fn submultiplicative(growth: &LapGrowth) -> bool {
    let c = &growth.lap_counts;
    (1..=c.len()).all(|n| (1..=c.len() - n).all(|k| c[n + k - 1] <= &c[n - 1] * &c[k - 1]))
}

/// Lap counts are nondecreasing; guaranteed only for maps without flat pieces.
pub fn monotone(growth: &LapGrowth) -> bool {
    growth.lap_counts.windows(2).all(|w| w[0] <= w[1]) && growth.lap_counts.first().is_none_or(|c| c >= &BigUint::one())
}
