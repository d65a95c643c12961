use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::DECIMAL_DIGITS;
use crate::error::{Error, Result};
use crate::rational::{rat, to_decimal, Rat};
use crate::systems::rotation::Angle;
use crate::systems::{CirclePoint, State, System};

/// Largest odd denominator drawn for rational samples.
const SAMPLE_DENOMINATOR_BITS: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiYorkeParams {
    pub horizon: u64,
    pub n_min: u64,
    #[serde(with = "crate::rational::serde_rat")]
    pub delta_prox: Rat,
    #[serde(with = "crate::rational::serde_rat")]
    pub delta_sep: Rat,
}

impl Default for LiYorkeParams {
    fn default() -> Self {
        LiYorkeParams { horizon: 10_000, n_min: 16, delta_prox: rat(1, 1000), delta_sep: rat(1, 10) }
    }
}

/// Pairs to scan.
#[derive(Clone, Debug)]
pub enum PairSource {
    Explicit(Vec<(State, State)>),
    /// `count` pairs drawn from a ChaCha stream seeded with `seed`.
    Sampled { count: usize, seed: u64 },
}

/// Min and max of `d(f^n x, f^n y)` over `n_min <= n <= N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiYorkePairReport {
    pub x: String,
    pub y: String,
    pub horizon: u64,
    pub n_min: u64,
    #[serde(with = "crate::rational::serde_rat")]
    pub liminf: Rat,
    pub liminf_decimal: String,
    #[serde(with = "crate::rational::serde_rat")]
    pub limsup: Rat,
    pub limsup_decimal: String,
    pub scrambled: bool,
}

pub fn li_yorke_pair(system: &System, x: &State, y: &State, params: &LiYorkeParams) -> Result<LiYorkePairReport> {
    if params.n_min > params.horizon {
        return Err(Error::invalid("need n_min <= horizon"));
    }
    if params.delta_prox >= params.delta_sep {
        return Err(Error::invalid("delta_prox must be below delta_sep"));
    }
    let distinct = !system.distance(x, y)?.is_zero();
    let (mut a, mut b) = (x.clone(), y.clone());
    for _ in 0..params.n_min {
        a = system.apply(&a)?;
        b = system.apply(&b)?;
    }
    let mut lo = system.distance(&a, &b)?;
    let mut hi = lo.clone();
    for _ in params.n_min..params.horizon {
        a = system.apply(&a)?;
        b = system.apply(&b)?;
        let d = system.distance(&a, &b)?;
        if d < lo {
            lo = d;
        } else if d > hi {
            hi = d;
        }
    }
    let scrambled = distinct && lo < params.delta_prox && hi > params.delta_sep;
    Ok(LiYorkePairReport {
        x: system.format_state(x),
        y: system.format_state(y),
        horizon: params.horizon,
        n_min: params.n_min,
        liminf_decimal: to_decimal(&lo, DECIMAL_DIGITS),
        limsup_decimal: to_decimal(&hi, DECIMAL_DIGITS),
        liminf: lo,
        limsup: hi,
        scrambled,
    })
}

fn odd_rational(rng: &mut ChaCha8Rng) -> Rat {
    let q: i64 = 2 * rng.gen_range(1..1i64 << SAMPLE_DENOMINATOR_BITS) + 1;
    rat(rng.gen_range(0..=q), q)
}

fn random_bits(rng: &mut ChaCha8Rng, bits: u32) -> BigUint {
    let words: Vec<u32> = (0..bits.div_ceil(32)).map(|_| rng.gen()).collect();
    BigUint::from_slice(&words) >> (32 * bits.div_ceil(32) - bits)
}

fn sample(system: &System, rng: &mut ChaCha8Rng) -> Result<State> {
    match system {
        System::Power { base, .. } => sample(base, rng),
        System::IntervalPL(_) => Ok(State::Real(odd_rational(rng))),
        System::Rotation(r) => Ok(State::Circle(match &r.angle {
            Angle::Rational(_) => CirclePoint::Rational(odd_rational(rng) % rat(1, 1)),
            Angle::Fixed { bits, .. } => CirclePoint::Fixed(random_bits(rng, *bits)),
        })),
        System::Odometer => Ok(State::Odometer(BigInt::from(rng.gen::<u32>()))),
        other => Err(Error::invalid(format!("no pair sampler for {} systems", other.kind()))),
    }
}

/// Pair reports in source order; sampling is sequential so reports depend only on the seed.
pub fn li_yorke_scan(system: &System, source: &PairSource, params: &LiYorkeParams) -> Result<Vec<LiYorkePairReport>> {
    let pairs = match source {
        PairSource::Explicit(p) => p.clone(),
        PairSource::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count)
                .map(|_| Ok((sample(system, &mut rng)?, sample(system, &mut rng)?)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    pairs.par_iter().map(|(x, y)| li_yorke_pair(system, x, y, params)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::systems::{IntervalPLMap, Rotation};

    fn tent() -> System {
        System::IntervalPL(IntervalPLMap::tent())
    }

    #[test]
    fn tent_pair_is_flagged() {
        let x = State::Real(rat(2, 7));
        let y = State::Real(rat(2, 7) + Rat::new(1.into(), BigInt::from(4).pow(10)));
        let r = li_yorke_pair(&tent(), &x, &y, &Default::default()).unwrap();
        assert!(r.scrambled);
        assert!(r.liminf.is_zero());
    }

    #[test]
    fn equal_points_not_flagged() {
        let x = State::Real(rat(1, 3));
        let r = li_yorke_pair(&tent(), &x, &x, &Default::default()).unwrap();
        assert!(!r.scrambled);
        assert_eq!(r.liminf, int(0));
        assert_eq!(r.limsup, int(0));
    }

    #[test]
    fn rotation_is_isometric() {
        let g = System::Rotation(Rotation::fixed("golden", 128).unwrap());
        let params = LiYorkeParams { horizon: 500, ..Default::default() };
        let reports = li_yorke_scan(&g, &PairSource::Sampled { count: 10, seed: 3 }, &params).unwrap();
        for r in &reports {
            assert_eq!(r.liminf, r.limsup);
            assert!(!r.scrambled);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let params = LiYorkeParams { horizon: 300, ..Default::default() };
        let a = li_yorke_scan(&tent(), &PairSource::Sampled { count: 6, seed: 9 }, &params).unwrap();
        let b = li_yorke_scan(&tent(), &PairSource::Sampled { count: 6, seed: 9 }, &params).unwrap();
        assert_eq!(a, b);
        assert!(li_yorke_scan(&System::Shift, &PairSource::Sampled { count: 1, seed: 0 }, &params).is_err());
    }

    #[test]
    fn bad_params() {
        let x = State::Real(rat(1, 3));
        let p = LiYorkeParams { delta_prox: int(1), ..Default::default() };
        assert!(li_yorke_pair(&tent(), &x, &x, &p).is_err());
    }
}
