//! Finite-horizon membership flags for `AP ⊆ UR ⊆ W ⊆ QW ⊆ R` and irregular recurrence.
//!
//! Every test here screens a finite orbit segment. A `true` flag means the segment is consistent
//! with membership under the echoed parameters; it does not decide membership of the point.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{return_flags, scan_estimate, Schedule, DEFAULT_N_MIN};
use crate::error::{Error, Result};
use crate::rational::{rat, to_decimal, Rat};
use crate::systems::{State, System};

pub const DEFAULT_THETA_HIGH: (i64, i64) = (1, 100);
pub const DEFAULT_THETA_LOW: (i64, i64) = (1, 1000);
pub const DEFAULT_K_GAP_MAX: u64 = 1024;
pub const DEFAULT_K_MULT_MAX: u64 = 256;
pub const DEFAULT_HORIZON: u64 = 4096;

/// `{1/2, 1/4, ..., 2^-depth}`.
pub fn dyadic_grid(depth: u32) -> Vec<Rat> {
    (1..=depth).map(|m| rat(1, 1i64 << m)).collect()
}

/// Default grid `{1/2, ..., 1/64}`.
pub fn default_grid() -> Vec<Rat> {
    dyadic_grid(6)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    #[serde(with = "crate::rational::serde_rat")]
    pub theta_high: Rat,
    #[serde(with = "crate::rational::serde_rat")]
    pub theta_low: Rat,
    /// Largest admissible return gap for UR.
    pub k_gap_max: u64,
    /// Largest admissible progression step for AP.
    pub k_mult_max: u64,
    pub n_min: u64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            theta_high: rat(DEFAULT_THETA_HIGH.0, DEFAULT_THETA_HIGH.1),
            theta_low: rat(DEFAULT_THETA_LOW.0, DEFAULT_THETA_LOW.1),
            k_gap_max: DEFAULT_K_GAP_MAX,
            k_mult_max: DEFAULT_K_MULT_MAX,
            n_min: DEFAULT_N_MIN,
        }
    }
}

impl ClassifyParams {
    fn check(&self, horizon: u64) -> Result<()> {
        if self.theta_low >= self.theta_high {
            return Err(Error::invalid("theta_low must be below theta_high"));
        }
        if self.n_min == 0 || self.n_min > horizon {
            return Err(Error::invalid("need 1 <= n_min <= horizon"));
        }
        Ok(())
    }
}

/// One flag per class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub ap: bool,
    pub ur: bool,
    pub w: bool,
    pub qw: bool,
    pub r: bool,
}

impl ClassFlags {
    fn and(self, o: ClassFlags) -> ClassFlags {
        ClassFlags { ap: self.ap && o.ap, ur: self.ur && o.ur, w: self.w && o.w, qw: self.qw && o.qw, r: self.r && o.r }
    }

    /// Each flag restricted by the next larger class.
    fn nested(self) -> ClassFlags {
        let r = self.r;
        let qw = self.qw && r;
        let w = self.w && qw;
        let ur = self.ur && w;
        let ap = self.ap && ur;
        ClassFlags { ap, ur, w, qw, r }
    }

    pub fn is_nested(&self) -> bool {
        (!self.ap || self.ur) && (!self.ur || self.w) && (!self.w || self.qw) && (!self.qw || self.r)
    }
}

/// Test data at a single radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusWitness {
    #[serde(with = "crate::rational::serde_rat")]
    pub radius: Rat,
    /// Smallest `j >= 1` with a return.
    pub first_return: Option<u64>,
    /// Smallest `K` such that every length-`K` window of `[0, N)` contains a return.
    pub gap_bound: u64,
    /// Smallest progression step with a return at every multiple below `N`.
    pub ap_step: Option<u64>,
    #[serde(with = "crate::rational::serde_rat")]
    pub lower: Rat,
    pub lower_decimal: String,
    pub lower_at: u64,
    #[serde(with = "crate::rational::serde_rat")]
    pub upper: Rat,
    pub upper_decimal: String,
    pub upper_at: u64,
    pub count: u64,
    /// Per-radius test outcomes before nesting.
    pub raw: ClassFlags,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedRadius {
    #[serde(with = "crate::rational::serde_rat")]
    pub radius: Rat,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceProfile {
    pub point_id: String,
    pub system: String,
    #[serde(with = "crate::rational::serde_rat_vec")]
    pub radii: Vec<Rat>,
    pub horizon: u64,
    pub schedule: String,
    pub params: ClassifyParams,
    /// Conjunction of per-radius outcomes.
    pub raw_flags: ClassFlags,
    /// Raw flags restricted along the inclusion chain.
    pub flags: ClassFlags,
    pub ir_flag: bool,
    #[serde(with = "crate::rational::serde_rat_opt")]
    pub ir_radius: Option<Rat>,
    pub witnesses: Vec<RadiusWitness>,
    pub skipped: Vec<SkippedRadius>,
    pub note: String,
}

const NOTE: &str = "finite-horizon screening; AP checks steps up to k_mult_max with at least two multiples below \
                    the horizon, UR checks return gaps up to k_gap_max, W and QW compare the min and max of \
                    count(n)/n over n_min <= n <= horizon with theta_high";

fn gap_bound(flags: &[bool]) -> u64 {
    let mut longest = 0u64;
    let mut run = 0u64;
    for &f in flags {
        if f {
            run = 0;
        } else {
            run += 1;
            longest = longest.max(run);
        }
    }
    longest + 1
}

fn ap_step(flags: &[bool], k_max: u64) -> Option<u64> {
    let n = flags.len() as u64;
    (1..=k_max)
        .take_while(|k| 2 * k < n)
        .find(|&k| flags.iter().step_by(k as usize).all(|&f| f))
}

/// Classifies `x` over the horizon `[0, N)`.
pub fn classify_point(
    system: &System,
    x: &State,
    point_id: &str,
    radii: &[Rat],
    horizon: u64,
    params: &ClassifyParams,
) -> Result<RecurrenceProfile> {
    params.check(horizon)?;
    if radii.is_empty() {
        return Err(Error::invalid("radius grid is empty"));
    }
    let diam = system.diameter();
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for t in radii {
        if t <= &Rat::from_integer(0.into()) {
            return Err(Error::invalid("radius must be positive"));
        }
        if t > &diam {
            log::warn!("radius {t} exceeds the diameter {diam}; skipped");
            skipped.push(SkippedRadius { radius: t.clone(), reason: format!("exceeds diameter {diam}") });
        } else {
            kept.push(t.clone());
        }
    }
    if kept.is_empty() {
        return Err(Error::invalid("every grid radius exceeds the diameter"));
    }
    let flags = return_flags(system, x, &kept, horizon)?;
    let marks: Vec<usize> = (params.n_min as usize..=horizon as usize).collect();
    let witnesses: Vec<RadiusWitness> = kept
        .par_iter()
        .zip(flags.par_iter())
        .map(|(t, f)| {
            let est = scan_estimate(t, f, &marks);
            let first_return = f.iter().skip(1).position(|&b| b).map(|j| j as u64 + 1);
            let gap = gap_bound(f);
            let step = ap_step(f, params.k_mult_max);
            let raw = ClassFlags {
                r: first_return.is_some(),
                ur: gap <= params.k_gap_max,
                ap: step.is_some(),
                w: est.lower >= params.theta_high,
                qw: est.upper >= params.theta_high,
            };
            RadiusWitness {
                radius: t.clone(),
                first_return,
                gap_bound: gap,
                ap_step: step,
                lower_decimal: to_decimal(&est.lower, crate::density::DECIMAL_DIGITS),
                upper_decimal: to_decimal(&est.upper, crate::density::DECIMAL_DIGITS),
                lower: est.lower,
                lower_at: est.lower_at.to_u64().unwrap(),
                upper: est.upper,
                upper_at: est.upper_at.to_u64().unwrap(),
                count: est.count.to_u64().unwrap(),
                raw,
            }
        })
        .collect();
    let all = ClassFlags { ap: true, ur: true, w: true, qw: true, r: true };
    let raw_flags = witnesses.iter().fold(all, |acc, w| acc.and(w.raw));
    let flags = raw_flags.nested();
    let ir_radius = witnesses.iter().find(|w| w.lower < params.theta_low).map(|w| w.radius.clone());
    let ir_flag = flags.qw && ir_radius.is_some();
    Ok(RecurrenceProfile {
        point_id: point_id.to_string(),
        system: system.kind().to_string(),
        radii: radii.to_vec(),
        horizon,
        schedule: Schedule::All.label(),
        params: params.clone(),
        raw_flags,
        flags,
        ir_flag,
        ir_radius,
        witnesses,
        skipped,
        note: NOTE.to_string(),
    })
}

/// Whether the flags of `profile` nest and `ir_flag` implies QW without W.
pub fn hierarchy_check(profile: &RecurrenceProfile) -> bool {
    profile.flags.is_nested() && (!profile.ir_flag || (profile.flags.qw && !profile.flags.w))
}

impl RecurrenceProfile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn witness(&self, t: &Rat) -> Option<&RadiusWitness> {
        self.witnesses.iter().find(|w| &w.radius == t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagAgreement {
    pub class: String,
    pub under_f: bool,
    pub under_iterate: bool,
    pub agree: bool,
}

/// Classification under `f` and `f^m` with horizons `N` and `N/m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateInvarianceReport {
    pub m: u32,
    pub base: RecurrenceProfile,
    pub iterate: RecurrenceProfile,
    pub agreement: Vec<FlagAgreement>,
    pub all_agree: bool,
}

impl IterateInvarianceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Disagreements are reported, never raised: finite horizons need not respect the limit statement.
pub fn iterate_invariance_report(
    system: &System,
    x: &State,
    m: u32,
    radii: &[Rat],
    horizon: u64,
    params: &ClassifyParams,
) -> Result<IterateInvarianceReport> {
    if m < 2 {
        return Err(Error::invalid("iterate exponent must be at least 2"));
    }
    let base = classify_point(system, x, "f", radii, horizon, params)?;
    let short = horizon / m as u64;
    let iter_params = ClassifyParams { n_min: (params.n_min / m as u64).max(1), ..params.clone() };
    let iterate = classify_point(&system.power(m), x, &format!("f^{m}"), radii, short.max(1), &iter_params)?;
    let pairs = [
        ("AP", base.flags.ap, iterate.flags.ap),
        ("UR", base.flags.ur, iterate.flags.ur),
        ("W", base.flags.w, iterate.flags.w),
        ("QW", base.flags.qw, iterate.flags.qw),
        ("R", base.flags.r, iterate.flags.r),
        ("IR", base.ir_flag, iterate.ir_flag),
    ];
    let agreement: Vec<FlagAgreement> = pairs
        .iter()
        .map(|&(c, a, b)| FlagAgreement { class: c.to_string(), under_f: a, under_iterate: b, agree: a == b })
        .collect();
    let all_agree = agreement.iter().all(|a| a.agree);
    Ok(IterateInvarianceReport { m, base, iterate, agreement, all_agree })
}


#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::construction::{BlockProgram, ShiftPoint, SymbolicWord};
    use crate::rational::int;
    use crate::systems::{CirclePoint, IntervalPLMap, Rotation};

    fn rotation(p: i64, q: i64) -> System {
        System::Rotation(Rotation::rational(rat(p, q)).unwrap())
    }

    fn origin() -> State {
        State::Circle(CirclePoint::Rational(int(0)))
    }

    fn u() -> State {
        let p = Arc::new(BlockProgram::build(3, 1).unwrap());
        State::Symbolic(ShiftPoint::new(Arc::new(SymbolicWord::Program(p))))
    }

    fn ir_params() -> ClassifyParams {
        ClassifyParams { theta_high: rat(1, 10), theta_low: rat(1, 20), ..Default::default() }
    }

    #[test]
    fn periodic_rotation_is_almost_periodic() {
        let p = classify_point(&rotation(1, 3), &origin(), "x", &default_grid(), 300, &Default::default()).unwrap();
        assert_eq!(p.flags, ClassFlags { ap: true, ur: true, w: true, qw: true, r: true });
        assert!(p.witnesses.iter().filter(|w| w.radius < rat(1, 3)).all(|w| w.ap_step == Some(3)));
        assert!(!p.ir_flag);
        assert!(hierarchy_check(&p));
    }

    #[test]
    fn odometer_progressions() {
        let p = classify_point(&System::Odometer, &State::Odometer(5.into()), "x", &[rat(1, 2), rat(1, 4)], 64, &Default::default())
            .unwrap();
        assert!(p.flags.ap);
        assert_eq!(p.witness(&rat(1, 4)).unwrap().ap_step, Some(4));
        assert!(hierarchy_check(&p));
    }

    #[test]
    fn constructed_word_is_irregular() {
        let grid = [int(1), rat(1, 3), rat(1, 9)];
        let p = classify_point(&System::Shift, &u(), "u", &grid, 1083, &ir_params()).unwrap();
        assert!(p.flags.qw);
        assert!(!p.flags.w);
        assert!(!p.flags.ap);
        assert!(p.ir_flag);
        assert_eq!(p.ir_radius, Some(rat(1, 3)));
        assert!(p.witness(&int(1)).unwrap().lower < ir_params().theta_high);
        assert!(hierarchy_check(&p));
    }

    #[test]
    fn hand_built_profile_fails_check() {
        let mut p = classify_point(&rotation(1, 3), &origin(), "x", &[rat(1, 4)], 50, &Default::default()).unwrap();
        p.flags.ur = false;
        assert!(!hierarchy_check(&p));
    }

    #[test]
    fn skipped_radius_and_json_roundtrip() {
        let tent = System::IntervalPL(IntervalPLMap::tent());
        let p = classify_point(&tent, &State::Real(int(0)), "zero", &[int(2), rat(1, 2)], 40, &Default::default())
            .unwrap();
        assert_eq!(p.skipped.len(), 1);
        assert_eq!(p.witnesses.len(), 1);
        let back = RecurrenceProfile::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!(classify_point(&tent, &State::Real(int(0)), "z", &[int(2)], 40, &Default::default()).is_err());
    }

    #[test]
    fn invalid_thresholds() {
        let params = ClassifyParams { theta_low: rat(1, 2), theta_high: rat(1, 4), ..Default::default() };
        assert!(classify_point(&rotation(1, 3), &origin(), "x", &[rat(1, 4)], 50, &params).is_err());
    }

    #[test]
    fn raising_theta_only_clears_flags() {
        let golden = System::Rotation(Rotation::fixed("golden", 128).unwrap());
        let x = golden.parse_point("0", None).unwrap();
        let lo = classify_point(&golden, &x, "g", &default_grid(), DEFAULT_HORIZON, &Default::default()).unwrap();
        let hi = classify_point(&golden, &x, "g", &default_grid(), DEFAULT_HORIZON, &ClassifyParams {
            theta_high: rat(1, 10),
            ..Default::default()
        })
        .unwrap();
        assert!(lo.flags.w && !lo.flags.ap);
        assert!(!hi.flags.w || lo.flags.w);
        assert!(!hi.flags.qw || lo.flags.qw);
    }

    #[test]
    fn iterate_invariance() {
        let r = iterate_invariance_report(&rotation(1, 4), &origin(), 2, &default_grid(), 400, &Default::default())
            .unwrap();
        assert!(r.all_agree);
        let r = iterate_invariance_report(&System::Shift, &u(), 2, &[int(1), rat(1, 3)], 1083, &ir_params()).unwrap();
        assert!(r.agreement.iter().find(|a| a.class == "QW").unwrap().agree);
        assert!(iterate_invariance_report(&System::Shift, &u(), 1, &[int(1)], 100, &ir_params()).is_err());
    }

    #[test]
    fn gap_and_step() {
        assert_eq!(gap_bound(&[true, false, false, true, false]), 3);
        assert_eq!(ap_step(&[true, false, true, false, true, false], 4), Some(2));
        assert_eq!(ap_step(&[true, false, false], 4), None);
    }
}
