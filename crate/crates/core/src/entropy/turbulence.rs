use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, Rat};
use crate::systems::{Direction, Interval, IntervalPLMap, Lap};

/// Iterates with more pieces than this are not searched.
pub const MAX_SEARCH_PIECES: usize = 1 << 12;

/// Dyadic shrink depths tried on each end of a candidate pair.
const SHRINK_DEPTH: u32 = 4;

/// Disjoint `K_0, K_1` with `f^m(K_0) ∩ f^m(K_1) ⊇ K_0 ∪ K_1`, re-checkable from its own data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurbulenceWitness {
    pub m: u32,
    #[serde(with = "crate::rational::serde_rat_vec")]
    pub breakpoints: Vec<Rat>,
    #[serde(with = "crate::rational::serde_rat_vec")]
    pub values: Vec<Rat>,
    pub k0: Interval,
    pub k1: Interval,
    pub image0: Interval,
    pub image1: Interval,
}

impl TurbulenceWitness {
    pub fn map(&self) -> Result<IntervalPLMap> {
        IntervalPLMap::new(self.breakpoints.clone(), self.values.clone())
    }

    pub fn k(&self, symbol: u8) -> &Interval {
        if symbol == 0 {
            &self.k0
        } else {
            &self.k1
        }
    }

    /// Recomputes `f^m` and both images from scratch.
    pub fn verify(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("witness iterate must be positive"));
        }
        let fm = self.map()?.power(self.m);
        for k in [&self.k0, &self.k1] {
            if k.lo > k.hi || k.lo < int(0) || k.hi > int(1) {
                return Err(Error::invalid(format!("witness interval {k} is not a subinterval of [0,1]")));
            }
        }
        if !self.k0.is_disjoint(&self.k1) {
            return Err(Error::invalid("witness intervals intersect"));
        }
        let (i0, i1) = (fm.image(&self.k0)?, fm.image(&self.k1)?);
        if i0 != self.image0 || i1 != self.image1 {
            return Err(Error::invalid("recorded images differ from the recomputed ones"));
        }
        if !covers(&i0, &self.k0, &self.k1) || !covers(&i1, &self.k0, &self.k1) {
            return Err(Error::invalid("an image does not cover both witness intervals"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn covers(image: &Interval, k0: &Interval, k1: &Interval) -> bool {
    image.contains_interval(k0) && image.contains_interval(k1)
}

fn certify(fm: &IntervalPLMap, k0: Interval, k1: Interval) -> Option<(Interval, Interval, Interval, Interval)> {
    if !k0.is_disjoint(&k1) || k0.diam().is_zero() || k1.diam().is_zero() {
        return None;
    }
    let (i0, i1) = (fm.image(&k0).ok()?, fm.image(&k1).ok()?);
    (covers(&i0, &k0, &k1) && covers(&i1, &k0, &k1)).then_some((k0, k1, i0, i1))
}

fn shrinks(width: &Rat) -> Vec<Rat> {
    std::iter::once(Rat::zero())
        .chain((1..=SHRINK_DEPTH).map(|s| width / Rat::from_integer((1u64 << s).into())))
        .collect()
}

/// Shrunk subintervals of two monotone laps, least shrinking first.
fn shrunk_candidates(a: &Lap, b: &Lap) -> Vec<(Interval, Interval)> {
    let (sa, sb) = (shrinks(&a.domain.diam()), shrinks(&b.domain.diam()));
    let mut out = Vec::new();
    for total in 1..=4 * SHRINK_DEPTH as usize {
        for (i, da_lo) in sa.iter().enumerate() {
            for (j, da_hi) in sa.iter().enumerate() {
                for (k, db_lo) in sb.iter().enumerate() {
                    for (l, db_hi) in sb.iter().enumerate() {
                        if i + j + k + l != total {
                            continue;
                        }
                        let k0 = Interval::new(&a.domain.lo + da_lo, &a.domain.hi - da_hi);
                        let k1 = Interval::new(&b.domain.lo + db_lo, &b.domain.hi - db_hi);
                        out.push((k0, k1));
                    }
                }
            }
        }
    }
    out
}

fn search_iterate(fm: &IntervalPLMap) -> Option<(Interval, Interval, Interval, Interval)> {
    let laps: Vec<Lap> = fm
        .laps()
        .into_iter()
        .filter(|l| l.direction != Direction::Constant && fm.strict_direction_on(&l.domain).is_some())
        .collect();
    let pairs: Vec<(usize, usize)> =
        (0..laps.len()).flat_map(|i| (i + 1..laps.len()).map(move |j| (i, j))).collect();
    let direct = pairs
        .par_iter()
        .find_map_first(|&(i, j)| certify(fm, laps[i].domain.clone(), laps[j].domain.clone()));
    direct.or_else(|| {
        pairs.par_iter().find_map_first(|&(i, j)| {
            shrunk_candidates(&laps[i], &laps[j]).into_iter().find_map(|(k0, k1)| certify(fm, k0, k1))
        })
    })
}

/// First `m <= m_max` at which a pair of monotone pieces of `f^m`, possibly shrunk by dyadic
/// fractions of their widths, certifies strict turbulence. `None` means the bounded search failed.
pub fn find_turbulence(map: &IntervalPLMap, m_max: u32) -> Result<Option<TurbulenceWitness>> {
    if m_max == 0 {
        return Err(Error::invalid("m_max must be at least 1"));
    }
    let mut fm = map.clone();
    for m in 1..=m_max {
        if m > 1 {
            fm = map.compose(&fm);
        }
        if fm.piece_count() > MAX_SEARCH_PIECES {
            log::warn!("f^{m} has {} pieces; turbulence search stopped", fm.piece_count());
            return Ok(None);
        }
        if let Some((k0, k1, image0, image1)) = search_iterate(&fm) {
            return Ok(Some(TurbulenceWitness {
                m,
                breakpoints: map.breakpoints().to_vec(),
                values: map.values().to_vec(),
                k0,
                k1,
                image0,
                image1,
            }));
        }
    }
    Ok(None)
}

/// `h(f) >= log(2) / m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyBound {
    /// The bound as a multiple of `log 2`.
    #[serde(with = "crate::rational::serde_rat")]
    pub log2_multiple: Rat,
    pub value: f64,
}

pub fn entropy_lower_bound(witness: &TurbulenceWitness) -> EntropyBound {
    EntropyBound {
        log2_multiple: Rat::new(1.into(), witness.m.into()),
        value: std::f64::consts::LN_2 / witness.m as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn tent_witness() {
        let w = find_turbulence(&IntervalPLMap::tent(), 4).unwrap().unwrap();
        assert_eq!(w.m, 2);
        assert_eq!(w.k0, Interval::new(int(0), rat(1, 4)));
        assert_eq!(w.k1, Interval::new(rat(1, 2), rat(3, 4)));
        assert_eq!(w.image0, Interval::unit());
        assert_eq!(w.image1, Interval::unit());
        w.verify().unwrap();
        assert_eq!(entropy_lower_bound(&w).log2_multiple, rat(1, 2));
    }

    #[test]
    fn identity_has_no_witness() {
        assert!(find_turbulence(&IntervalPLMap::identity(), 5).unwrap().is_none());
        assert!(find_turbulence(&IntervalPLMap::identity(), 0).is_err());
    }

    #[test]
    fn witness_roundtrip_and_tamper() {
        let w = find_turbulence(&IntervalPLMap::tent(), 3).unwrap().unwrap();
        let back = TurbulenceWitness::from_json(&w.to_json()).unwrap();
        back.verify().unwrap();
        let mut bad = back.clone();
        bad.k1 = Interval::new(rat(1, 5), rat(3, 4));
        assert!(bad.verify().is_err());
        let mut bad = back;
        bad.m = 1;
        assert!(bad.verify().is_err());
    }

    #[test]
    fn steep_map_turbulent_at_once() {
        let f = IntervalPLMap::from_ints(&[(0, 1), (1, 3), (2, 3), (1, 1)], &[(0, 1), (1, 1), (0, 1), (1, 1)]);
        let w = find_turbulence(&f, 3).unwrap().unwrap();
        assert_eq!(w.m, 1);
        assert_eq!(w.k0, Interval::new(int(0), rat(1, 3)));
    }

    #[test]
    fn shrinking_needed() {
        // Adjacent full branches at m = 1 plus a short third lap: only shrunk pairs qualify.
        let f = IntervalPLMap::from_ints(&[(0, 1), (2, 5), (4, 5), (1, 1)], &[(0, 1), (1, 1), (0, 1), (1, 5)]);
        let w = find_turbulence(&f, 1).unwrap().unwrap();
        w.verify().unwrap();
        assert_eq!(w.m, 1);
    }
}
