use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use recurlab::classify::{classify_point, hierarchy_check, ClassifyParams};
use recurlab::construction::{BlockProgram, ShiftPoint, SymbolicWord};
use recurlab::density::{density_profile, return_count, return_count_with, CountMethod, DensityOptions};
use recurlab::entropy::{find_turbulence, lap_entropy, ItineraryCoder, TurbulenceWitness};
use recurlab::entropy::{monotone, submultiplicative};
use recurlab::rational::{rat, Rat};
use recurlab::systems::{IntervalPLMap, Rotation, State, System};

fn tent_eval(x: &Rat) -> Rat {
    if x <= &rat(1, 2) {
        x * rat(2, 1)
    } else {
        rat(2, 1) - x * rat(2, 1)
    }
}

fn tent() -> System {
    System::IntervalPL(IntervalPLMap::tent())
}

fn program() -> Arc<BlockProgram> {
    static P: std::sync::OnceLock<Arc<BlockProgram>> = std::sync::OnceLock::new();
    P.get_or_init(|| Arc::new(BlockProgram::build(3, 1).unwrap())).clone()
}

fn odd_point() -> impl Strategy<Value = Rat> {
    (1i64..400).prop_flat_map(|h| {
        let q = 2 * h + 1;
        (0..=q).prop_map(move |p| rat(p, q))
    })
}

fn radius() -> impl Strategy<Value = Rat> {
    (1i64..64).prop_map(|d| rat(1, d))
}

/// Continuous PL self-maps of [0,1] on a uniform grid.
fn pl_map() -> impl Strategy<Value = IntervalPLMap> {
    (2usize..5).prop_flat_map(|k| {
        prop::collection::vec(0i64..=4, k + 1).prop_map(move |v| {
            let b = (0..=k as i64).map(|i| (i, k as i64)).collect::<Vec<_>>();
            let v = v.iter().map(|&y| (y, 4)).collect::<Vec<_>>();
            IntervalPLMap::from_ints(&b, &v)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counting_equivalence(x in odd_point(), t in radius(), n in 1u64..6, big_n in 1u64..40) {
        // Sum of ball indicators along the orbit, with an independent tent evaluator.
        let mut y = x.clone();
        let mut hits = 0u64;
        for _ in 0..n * big_n {
            if (&y - &x).abs() < t {
                hits += 1;
            }
            y = tent_eval(&y);
        }
        let c = return_count(&tent(), &State::Real(x), &t, &BigUint::from(n * big_n)).unwrap();
        prop_assert_eq!(c.to_u64().unwrap(), hits);
        prop_assert_eq!(hits >= n, c >= BigUint::from(n));
    }

    #[test]
    fn count_monotone_in_radius(x in odd_point(), a in 1i64..64, b in 1i64..64, n in 1u64..200) {
        let (t1, t2) = if a >= b { (rat(1, a), rat(1, b)) } else { (rat(1, b), rat(1, a)) };
        let s = State::Real(x);
        let c1 = return_count(&tent(), &s, &t1, &BigUint::from(n)).unwrap();
        let c2 = return_count(&tent(), &s, &t2, &BigUint::from(n)).unwrap();
        prop_assert!(c1 <= c2);
        prop_assert!(c1 >= BigUint::from(1u32) && c2 <= BigUint::from(n));
    }

    #[test]
    fn count_decomposes(x in odd_point(), t in radius(), n1 in 1u64..100, n2 in 1u64..100) {
        let s = State::Real(x.clone());
        let whole = return_count(&tent(), &s, &t, &BigUint::from(n1 + n2)).unwrap();
        let head = return_count(&tent(), &s, &t, &BigUint::from(n1)).unwrap();
        let mut y = x.clone();
        for _ in 0..n1 {
            y = tent_eval(&y);
        }
        let mut tail = 0u64;
        for _ in 0..n2 {
            if (&y - &x).abs() < t {
                tail += 1;
            }
            y = tent_eval(&y);
        }
        prop_assert_eq!(whole, head + tail);
    }

    #[test]
    fn density_bounds(x in odd_point(), n in 20u64..300) {
        let radii = [rat(1, 2), rat(1, 8), rat(1, 32)];
        let p = density_profile(&tent(), &State::Real(x), &radii, n, &DensityOptions::default()).unwrap();
        for w in p.estimates.windows(2) {
            prop_assert!(w[1].lower <= w[0].lower && w[1].upper <= w[0].upper);
        }
        for e in &p.estimates {
            prop_assert!(e.lower > Rat::zero() && e.lower <= e.upper && e.upper <= rat(1, 1));
        }
    }

    #[test]
    fn structural_matches_scan(offset in 0u64..5000, l in 1usize..12, n in 1u64..3000) {
        let p = ShiftPoint::new(Arc::new(SymbolicWord::Program(program()))).shifted(&BigUint::from(offset));
        let x = State::Symbolic(p);
        let t = rat(1, l as i64);
        let n = BigUint::from(n);
        let a = return_count_with(&System::Shift, &x, &t, &n, Some(CountMethod::Structural)).unwrap();
        let b = return_count_with(&System::Shift, &x, &t, &n, Some(CountMethod::OrbitScan)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn laps_submultiplicative(f in pl_map()) {
        let g = lap_entropy(&f, 6).unwrap();
        prop_assert!(submultiplicative(&g));
        prop_assert!(monotone(&g) || f.has_flat_piece());
        prop_assert!(g.estimate >= 0.0);
    }

    #[test]
    fn witnesses_reverify(f in pl_map()) {
        if let Some(w) = find_turbulence(&f, 2).unwrap() {
            let back = TurbulenceWitness::from_json(&w.to_json()).unwrap();
            prop_assert!(back.verify().is_ok());
            prop_assert!(w.k0.is_disjoint(&w.k1));
            let g = lap_entropy(&f, 8).unwrap();
            for k in 1..=8 / w.m {
                if let Some(l) = g.laps((k * w.m) as usize) {
                    prop_assert!(*l >= BigUint::from(1u32 << k));
                }
            }
        }
    }

    #[test]
    fn realized_intervals_shadow(word in prop::collection::vec(0u8..2, 1..40)) {
        let w = find_turbulence(&IntervalPLMap::tent(), 2).unwrap().unwrap();
        let coder = ItineraryCoder::new(w).unwrap();
        let j = coder.realize(&word).unwrap();
        prop_assert!(coder.shadows(&j.midpoint(), &word, word.len()).unwrap());
        prop_assert_eq!(j.diam(), rat(1, 4).pow(word.len() as i32));
    }

    #[test]
    fn profiles_nest(x in odd_point(), hi in 2i64..40) {
        let params = ClassifyParams { theta_high: rat(1, hi), theta_low: rat(1, 4 * hi), ..Default::default() };
        let grid = [rat(1, 2), rat(1, 4), rat(1, 16)];
        for sys in [tent(), System::Rotation(Rotation::rational(rat(2, 5)).unwrap())] {
            let s = sys.parse_point(&recurlab::rational::format_rational(&x), None).unwrap();
            let p = classify_point(&sys, &s, "x", &grid, 256, &params).unwrap();
            prop_assert!(hierarchy_check(&p));
            let stricter = ClassifyParams { theta_high: rat(2, hi), ..params.clone() };
            let q = classify_point(&sys, &s, "x", &grid, 256, &stricter).unwrap();
            prop_assert!(!q.flags.w || p.flags.w);
            prop_assert!(!q.flags.qw || p.flags.qw);
        }
    }
}

#[test]
fn flat_piece_can_lower_lap_count() {
    // f^3 falls entirely into the flat piece on [2/3, 1].
    let f = IntervalPLMap::from_ints(&[(0, 1), (1, 3), (2, 3), (1, 1)], &[(0, 1), (1, 2), (1, 2), (1, 4)]);
    let g = lap_entropy(&f, 4).unwrap();
    assert_eq!(g.lap_counts[1], BigUint::from(2u32));
    assert_eq!(g.lap_counts[2], BigUint::from(1u32));
    assert!(submultiplicative(&g));
}

#[test]
fn monotone_maps_have_no_irregular_points() {
    let maps = [
        IntervalPLMap::identity(),
        IntervalPLMap::from_ints(&[(0, 1), (1, 2), (1, 1)], &[(0, 1), (1, 4), (1, 1)]),
    ];
    for f in maps {
        assert_eq!(lap_entropy(&f, 8).unwrap().estimate, 0.0);
        let sys = System::IntervalPL(f);
        for x in [rat(0, 1), rat(1, 3), rat(5, 7), rat(1, 1)] {
            let p = classify_point(&sys, &State::Real(x), "x", &[rat(1, 4), rat(1, 64)], 512, &Default::default()).unwrap();
            assert!(!p.ir_flag);
        }
    }
}
