use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::turbulence::{entropy_lower_bound, find_turbulence, EntropyBound, TurbulenceWitness};
use crate::classify::{classify_point, ClassifyParams, RecurrenceProfile};
use crate::construction::{BlockProgram, ShiftPoint, SymbolicWord};
use crate::density::{return_flags, scan_estimate, CountMethod, DensityProfile, Schedule};
use crate::error::{Error, Result};
use crate::rational::{rat, ratio, to_decimal, Rat};
use crate::systems::{Interval, IntervalPLMap, State, System};

/// Largest realization depth accepted by the pipeline.
pub const MAX_REALIZATION_DEPTH: u64 = 1 << 14;

/// Inverse branches of `f^m` on the two witness intervals.
#[derive(Clone, Debug)]
pub struct ItineraryCoder {
    witness: TurbulenceWitness,
    fm: IntervalPLMap,
    /// Upper bound on `diam(J_{ws}) / diam(J_w)`.
    contraction: Rat,
}

impl ItineraryCoder {
    /// Requires `f^m` strictly monotone with `|slope| > 1` on both intervals.
    pub fn new(witness: TurbulenceWitness) -> Result<Self> {
        witness.verify()?;
        let fm = witness.map()?.power(witness.m);
        let mut min_slope: Option<Rat> = None;
        for k in [&witness.k0, &witness.k1] {
            if fm.strict_direction_on(k).is_none() {
                return Err(Error::Config(format!("f^{} is not strictly monotone on {k}", witness.m)));
            }
            let s = fm.min_abs_slope_on(k);
            if s <= Rat::one() {
                return Err(Error::Config(format!("branch slope on {k} does not exceed 1")));
            }
            min_slope = Some(min_slope.map_or(s.clone(), |m| m.min(s)));
        }
        let contraction = min_slope.unwrap().recip();
        Ok(ItineraryCoder { witness, fm, contraction })
    }

    pub fn witness(&self) -> &TurbulenceWitness {
        &self.witness
    }

    pub fn iterate_map(&self) -> &IntervalPLMap {
        &self.fm
    }

    pub fn contraction(&self) -> &Rat {
        &self.contraction
    }

    /// Common `|slope|` when `f^m` is affine on both intervals with the same steepness.
    pub fn uniform_slope(&self) -> Option<Rat> {
        let (w, f) = (&self.witness, &self.fm);
        let s = f.min_abs_slope_on(&w.k0);
        let same = [&w.k0, &w.k1].iter().all(|k| f.min_abs_slope_on(k) == s && f.max_abs_slope_on(k) == s);
        same.then_some(s)
    }

    /// `J_w`: points whose `f^m`-itinerary through `K_0, K_1` starts with `symbols`.
    pub fn realize(&self, symbols: &[u8]) -> Result<Interval> {
        let (last, rest) = symbols
            .split_last()
            .ok_or_else(|| Error::invalid("realization depth must be at least 1"))?;
        let mut j = self.witness.k(*last).clone();
        for (depth, &s) in rest.iter().enumerate().rev() {
            j = self
                .fm
                .pullback_on(self.witness.k(s), &j)
                .ok_or(Error::NotInvertible { depth })?;
        }
        Ok(j)
    }

    /// Whether `f^{m i}(x) ∈ K_{w_i}` for `i < steps`.
    pub fn shadows(&self, x: &Rat, symbols: &[u8], steps: usize) -> Result<bool> {
        let mut y = x.clone();
        for (i, &s) in symbols.iter().take(steps).enumerate() {
            if !self.witness.k(s).contains(&y) {
                log::debug!("shadowing fails at step {i}");
                return Ok(false);
            }
            y = self.fm.eval(&y)?;
        }
        Ok(true)
    }
}

/// Realizes the first `depth` symbols of `word`.
pub fn realize_itinerary(coder: &ItineraryCoder, word: &SymbolicWord, depth: usize) -> Result<Interval> {
    if depth == 0 {
        return Err(Error::invalid("realization depth must be at least 1"));
    }
    coder.realize(&word.segment(&BigUint::from(0u32), depth)?)
}

#[derive(Clone, Debug)]
pub struct PipelineParams {
    pub level: usize,
    pub seed: u64,
    pub m_max: u32,
    /// Realization depth; defaults to the level block length.
    pub depth: Option<u64>,
    /// Symbol counts `L`; level `L` pairs interval radius `d s^{1-L}` with symbolic radius `1/L`.
    pub radius_levels: Vec<usize>,
    pub classify: ClassifyParams,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            level: 2,
            seed: 1,
            m_max: 4,
            depth: None,
            radius_levels: vec![1, 3, 9],
            classify: ClassifyParams { theta_high: rat(1, 10), theta_low: rat(1, 20), ..Default::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusMatch {
    pub symbols: usize,
    #[serde(with = "crate::rational::serde_rat")]
    pub interval_radius: Rat,
    #[serde(with = "crate::rational::serde_rat")]
    pub symbolic_radius: Rat,
    pub interval_count: u64,
    pub symbolic_count: u64,
    pub pattern_match: bool,
    pub first_mismatch: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckpointCount {
    pub label: String,
    pub horizon: u64,
    pub symbols: usize,
    pub interval_count: u64,
    pub symbolic_count: u64,
    #[serde(with = "crate::rational::serde_rat")]
    pub ratio: Rat,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub witness: TurbulenceWitness,
    pub entropy_bound: EntropyBound,
    pub level: usize,
    pub seed: u64,
    pub depth: u64,
    /// Returns are compared for `j < horizon = depth - margin`.
    pub margin: u64,
    pub horizon: u64,
    #[serde(with = "crate::rational::serde_rat")]
    pub branch_slope: Rat,
    pub interval_lo: String,
    pub interval_hi: String,
    pub diameter_log2: f64,
    /// `diam(J) <= diam(K) s^{1-D}`.
    pub diameter_bound_holds: bool,
    pub shadowing_steps: u64,
    pub shadowing_holds: bool,
    pub radii: Vec<RadiusMatch>,
    pub checkpoints: Vec<CheckpointCount>,
    pub density_csv: String,
    pub symbolic_density_csv: String,
    pub classification: RecurrenceProfile,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn patterns_match(&self) -> bool {
        self.radii.iter().all(|r| r.pattern_match)
    }
}

fn log2_rat(r: &Rat) -> f64 {
    let (n, d) = (r.numer().magnitude(), r.denom().magnitude());
    (super::ln_big(n) - super::ln_big(d)) / std::f64::consts::LN_2
}

fn profile_from_flags(radii: &[Rat], flags: &[Vec<bool>], n_min: u64, horizon: u64) -> DensityProfile {
    let marks: Vec<usize> = (n_min as usize..=horizon as usize).collect();
    DensityProfile {
        horizon: BigUint::from(horizon),
        n_min: BigUint::from(n_min),
        schedule: Schedule::All,
        method: CountMethod::OrbitScan,
        estimates: radii.iter().zip(flags).map(|(t, f)| scan_estimate(t, f, &marks)).collect(),
    }
}

/// Realizes the constructed word inside a strictly turbulent iterate and compares the returns
/// of the realized point with those of the word.
pub fn ir_witness_pipeline(map: &IntervalPLMap, params: &PipelineParams) -> Result<PipelineReport> {
    let witness = find_turbulence(map, params.m_max)?.ok_or_else(|| {
        Error::invalid(format!("no strict turbulence found up to m = {}; nothing to realize", params.m_max))
    })?;
    let coder = ItineraryCoder::new(witness.clone())?;
    let s = coder
        .uniform_slope()
        .ok_or_else(|| Error::invalid("witness branches are not affine with a common slope"))?;
    let d = witness.k0.diam();
    let gap = if witness.k0.hi < witness.k1.lo { &witness.k1.lo - &witness.k0.hi } else { &witness.k0.lo - &witness.k1.hi };
    if witness.k1.diam() != d || d > gap {
        return Err(Error::invalid("witness intervals do not separate cylinders at the derived radii"));
    }

    let program = Arc::new(BlockProgram::build(params.level, params.seed)?);
    let depth = match params.depth {
        Some(dep) => dep,
        None => program
            .len(params.level)
            .to_u64()
            .ok_or_else(|| Error::Resource("block length exceeds u64".into()))?,
    };
    if depth > MAX_REALIZATION_DEPTH {
        return Err(Error::Resource(format!(
            "realization depth {depth} exceeds the budget {MAX_REALIZATION_DEPTH}"
        )));
    }
    let levels: Vec<usize> =
        params.radius_levels.iter().copied().filter(|&l| l >= 1 && 2 * l as u64 <= depth).collect();
    let margin = *levels.iter().max().ok_or_else(|| Error::invalid("no radius level fits the depth"))? as u64;
    let horizon = depth - margin;
    let n_min = params.classify.n_min.min(horizon);

    let word = Arc::new(SymbolicWord::Program(program.clone()));
    let symbols = word.segment(&BigUint::from(0u32), depth as usize)?;
    let j = coder.realize(&symbols)?;
    let x = j.midpoint();
    let bound = &d * s.pow(1 - depth as i32);
    let shadowing_steps = depth - 1;
    let shadowing_holds = coder.shadows(&x, &symbols, shadowing_steps as usize)?;

    let radii_interval: Vec<Rat> = levels.iter().map(|&l| &d * s.pow(1 - l as i32)).collect();
    let radii_symbolic: Vec<Rat> = levels.iter().map(|&l| rat(1, l as i64)).collect();
    let fm = System::IntervalPL(coder.iterate_map().clone());
    let xs = State::Real(x.clone());
    let u = State::Symbolic(ShiftPoint::new(word));
    let iflags = return_flags(&fm, &xs, &radii_interval, horizon)?;
    let sflags = return_flags(&System::Shift, &u, &radii_symbolic, horizon)?;

    let radii = levels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let first_mismatch = iflags[i].iter().zip(&sflags[i]).position(|(a, b)| a != b).map(|p| p as u64);
            RadiusMatch {
                symbols: l,
                interval_radius: radii_interval[i].clone(),
                symbolic_radius: radii_symbolic[i].clone(),
                interval_count: iflags[i].iter().filter(|&&b| b).count() as u64,
                symbolic_count: sflags[i].iter().filter(|&&b| b).count() as u64,
                pattern_match: first_mismatch.is_none(),
                first_mismatch,
            }
        })
        .collect();

    let mut marks: Vec<(String, u64)> = Vec::new();
    for n in 1..=params.level {
        if n >= 2 {
            marks.push((format!("lambda_{n},1"), program.lambda(n, 1).to_u64().unwrap_or(u64::MAX)));
        }
        let ab = program.len(n) - &program.level(n).b;
        marks.push((format!("a_{n}-b_{n}"), ab.to_u64().unwrap_or(u64::MAX)));
    }
    let mut checkpoints = Vec::new();
    for (label, h) in marks.into_iter().filter(|(_, h)| *h >= 1 && *h <= horizon) {
        for (i, &l) in levels.iter().enumerate() {
            let ic = iflags[i][..h as usize].iter().filter(|&&b| b).count() as u64;
            let sc = sflags[i][..h as usize].iter().filter(|&&b| b).count() as u64;
            checkpoints.push(CheckpointCount {
                label: label.clone(),
                horizon: h,
                symbols: l,
                interval_count: ic,
                symbolic_count: sc,
                ratio: ratio(&BigUint::from(ic), &BigUint::from(h)),
            });
        }
    }

    let density_csv = profile_from_flags(&radii_interval, &iflags, n_min, horizon).to_csv("x_u");
    let symbolic_density_csv = profile_from_flags(&radii_symbolic, &sflags, n_min, horizon).to_csv("u");
    let cparams = ClassifyParams { n_min, ..params.classify.clone() };
    let classification = classify_point(&fm, &xs, "x_u", &radii_interval, horizon, &cparams)?;

    Ok(PipelineReport {
        entropy_bound: entropy_lower_bound(&witness),
        witness,
        level: params.level,
        seed: params.seed,
        depth,
        margin,
        horizon,
        branch_slope: s,
        interval_lo: to_decimal(&j.lo, 24),
        interval_hi: to_decimal(&j.hi, 24),
        diameter_log2: log2_rat(&j.diam()),
        diameter_bound_holds: j.diam() <= bound,
        shadowing_steps,
        shadowing_holds,
        radii,
        checkpoints,
        density_csv,
        symbolic_density_csv,
        classification,
    })
}
