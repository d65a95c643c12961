//! JSON system descriptors and textual point syntax.
//!
//! ```json
//! {"kind":"interval-pl","breakpoints":["0","1/2","1"],"values":["0","1","0"]}
//! {"kind":"rotation","angle":"golden","precision_bits":128}
//! {"kind":"shift"}
//! {"kind":"odometer"}
//! {"kind":"skew-product","base":{"kind":"odometer"},
//!  "fibers":[{"prefix":"1","breakpoints":["0","1"],"values":["0","1/2"]}],
//!  "default_fiber":{"breakpoints":["0","1"],"values":["0","1"]}}
//! ```

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::{FiberRule, IntervalPLMap, Rotation, SkewProduct, State, System};
use crate::construction::{BlockProgram, ShiftPoint, SymbolicWord};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rat};

/// Environment variable overriding the precision of fixed-point rotation angles.
pub const PRECISION_ENV: &str = "RECURLAB_PRECISION_BITS";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlConfig {
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberConfig {
    /// Base-state prefix as a 0/1 string.
    pub prefix: String,
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemConfig {
    Shift,
    IntervalPl {
        breakpoints: Vec<String>,
        values: Vec<String>,
    },
    Rotation {
        angle: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        precision_bits: Option<u32>,
    },
    Odometer,
    SkewProduct {
        base: Box<SystemConfig>,
        #[serde(default)]
        fibers: Vec<FiberConfig>,
        default_fiber: PlConfig,
    },
}

fn pl_map(breakpoints: &[String], values: &[String]) -> Result<IntervalPLMap> {
    let parse = |v: &[String]| -> Result<Vec<Rat>> {
        v.iter().map(|s| parse_rational(s).map_err(|e| Error::Config(e.to_string()))).collect()
    };
    IntervalPLMap::new(parse(breakpoints)?, parse(values)?)
}

fn pl_strings(map: &IntervalPLMap) -> (Vec<String>, Vec<String>) {
    (
        map.breakpoints().iter().map(format_rational).collect(),
        map.values().iter().map(format_rational).collect(),
    )
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Config(format!("bad prefix symbol {c:?}"))),
        })
        .collect()
}

/// Precision override from the environment, if set.
pub fn precision_override() -> Result<Option<u32>> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{PRECISION_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(None),
    }
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Builds the system; `precision` overrides any `precision_bits` of rotations.
    pub fn build_with(&self, precision: Option<u32>) -> Result<System> {
        Ok(match self {
            SystemConfig::Shift => System::Shift,
            SystemConfig::Odometer => System::Odometer,
            SystemConfig::IntervalPl { breakpoints, values } => System::IntervalPL(pl_map(breakpoints, values)?),
            SystemConfig::Rotation { angle, precision_bits } => {
                let bits = precision.or(*precision_bits);
                let rational = parse_rational(angle).ok();
                match (bits, rational) {
                    (None, Some(r)) => System::Rotation(Rotation::rational(r)?),
                    (None, None) => {
                        return Err(Error::Config(format!(
                            "angle {angle:?} needs precision_bits for a fixed-point representation"
                        )))
                    }
                    (Some(b), _) => System::Rotation(Rotation::fixed(angle, b)?),
                }
            }
            SystemConfig::SkewProduct { base, fibers, default_fiber } => {
                let base = base.build_with(precision)?;
                let fibers = fibers
                    .iter()
                    .map(|f| {
                        Ok(FiberRule { prefix: parse_bits(&f.prefix)?, map: pl_map(&f.breakpoints, &f.values)? })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let default_fiber = pl_map(&default_fiber.breakpoints, &default_fiber.values)?;
                System::SkewProduct(SkewProduct::new(base, fibers, default_fiber)?)
            }
        })
    }

    /// Builds the system, honoring the precision environment override.
    pub fn build(&self) -> Result<System> {
        self.build_with(precision_override()?)
    }
}

impl System {
    /// Descriptor for this system; `None` for iterates, which have no JSON form.
    pub fn to_config(&self) -> Option<SystemConfig> {
        Some(match self {
            System::Shift => SystemConfig::Shift,
            System::Odometer => SystemConfig::Odometer,
            System::IntervalPL(f) => {
                let (breakpoints, values) = pl_strings(f);
                SystemConfig::IntervalPl { breakpoints, values }
            }
            System::Rotation(r) => SystemConfig::Rotation {
                angle: r.angle_text.clone(),
                precision_bits: r.precision_bits(),
            },
            System::SkewProduct(s) => {
                let (breakpoints, values) = pl_strings(&s.default_fiber);
                SystemConfig::SkewProduct {
                    base: Box::new(s.base.to_config()?),
                    fibers: s
                        .fibers
                        .iter()
                        .map(|f| {
                            let (breakpoints, values) = pl_strings(&f.map);
                            FiberConfig {
                                prefix: f.prefix.iter().map(|&b| char::from(b'0' + b)).collect(),
                                breakpoints,
                                values,
                            }
                        })
                        .collect(),
                    default_fiber: PlConfig { breakpoints, values },
                }
            }
            System::Power { .. } => return None,
        })
    }

    /// Parses a point of this system.
    ///
    /// * interval: a rational in `[0,1]`
    /// * rotation: a rational or decimal, reduced mod 1
    /// * shift: `u`, `u@OFFSET` (the constructed point, needs `program`), or `101(0)`
    /// * odometer: an integer (two's complement, least significant symbol first)
    /// * skew product: `BASE;Y`
    pub fn parse_point(&self, text: &str, program: Option<&Arc<BlockProgram>>) -> Result<State> {
        let text = text.trim();
        match self {
            System::Power { base, .. } => base.parse_point(text, program),
            System::IntervalPL(_) => {
                let x = parse_rational(text)?;
                if x.is_negative() || x > Rat::one() {
                    return Err(Error::InvalidState(format!("{text} is outside [0,1]")));
                }
                Ok(State::Real(x))
            }
            System::Rotation(r) => Ok(State::Circle(r.point(&parse_rational(text)?))),
            System::Odometer => text
                .parse::<BigInt>()
                .map(State::Odometer)
                .map_err(|_| Error::InvalidState(format!("odometer point must be an integer, got {text:?}"))),
            System::Shift => {
                if let Some(rest) = text.strip_prefix('u') {
                    let program = program
                        .ok_or_else(|| Error::invalid("point `u` needs a construction program"))?;
                    let word = Arc::new(SymbolicWord::Program(program.clone()));
                    let offset = match rest.strip_prefix('@') {
                        Some(o) => o
                            .parse()
                            .map_err(|_| Error::InvalidState(format!("bad offset in {text:?}")))?,
                        None if rest.is_empty() => Default::default(),
                        None => return Err(Error::InvalidState(format!("bad shift point {text:?}"))),
                    };
                    return Ok(State::Symbolic(ShiftPoint { word, offset }));
                }
                let word = SymbolicWord::parse(text)?;
                Ok(State::Symbolic(ShiftPoint::new(Arc::new(word))))
            }
            System::SkewProduct(s) => {
                let (b, y) = text
                    .split_once(';')
                    .ok_or_else(|| Error::InvalidState(format!("skew-product point must be BASE;Y, got {text:?}")))?;
                let base = s.base.parse_point(b, program)?;
                let y = parse_rational(y)?;
                if y.is_negative() || y > Rat::one() {
                    return Err(Error::InvalidState("fiber coordinate outside [0,1]".into()));
                }
                Ok(State::Pair(Box::new(base), y))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn tent_descriptor() {
        let cfg = SystemConfig::from_json(
            r#"{"kind":"interval-pl","breakpoints":["0","1/2","1"],"values":["0","1","0"]}"#,
        )
        .unwrap();
        let sys = cfg.build_with(None).unwrap();
        match &sys {
            System::IntervalPL(f) => assert_eq!(f, &IntervalPLMap::tent()),
            _ => panic!(),
        }
        assert_eq!(sys.to_config().unwrap(), cfg);
    }

    #[test]
    fn rotation_descriptors() {
        let r = SystemConfig::from_json(r#"{"kind":"rotation","angle":"1/3"}"#).unwrap();
        assert!(matches!(r.build_with(None).unwrap(), System::Rotation(_)));
        let g = SystemConfig::from_json(r#"{"kind":"rotation","angle":"golden","precision_bits":128}"#).unwrap();
        let sys = g.build_with(None).unwrap();
        match &sys {
            System::Rotation(r) => assert_eq!(r.precision_bits(), Some(128)),
            _ => panic!(),
        }
        match g.build_with(Some(200)).unwrap() {
            System::Rotation(r) => assert_eq!(r.precision_bits(), Some(200)),
            _ => panic!(),
        }
        let missing = SystemConfig::from_json(r#"{"kind":"rotation","angle":"golden"}"#).unwrap();
        assert!(missing.build_with(None).is_err());
    }

    #[test]
    fn bad_descriptors() {
        assert!(SystemConfig::from_json(r#"{"kind":"lorenz"}"#).is_err());
        let bad = SystemConfig::from_json(r#"{"kind":"interval-pl","breakpoints":["0","1"],"values":["0","3/2"]}"#)
            .unwrap();
        assert!(matches!(bad.build_with(None), Err(Error::Config(_))));
    }

    #[test]
    fn skew_round_trip() {
        let text = r#"{"kind":"skew-product","base":{"kind":"odometer"},
            "fibers":[{"prefix":"1","breakpoints":["0","1"],"values":["0","1/2"]}],
            "default_fiber":{"breakpoints":["0","1"],"values":["0","1"]}}"#;
        let cfg = SystemConfig::from_json(text).unwrap();
        let sys = cfg.build_with(None).unwrap();
        assert_eq!(sys.to_config().unwrap(), cfg);
        let p = sys.parse_point("3;1/2", None).unwrap();
        assert!(matches!(p, State::Pair(..)));
    }

    #[test]
    fn points() {
        let tent = System::IntervalPL(IntervalPLMap::tent());
        assert_eq!(tent.parse_point("2/5", None).unwrap().as_real(), Some(&rat(2, 5)));
        assert!(tent.parse_point("5/4", None).is_err());
        assert!(System::Shift.parse_point("u", None).is_err());
        let program = Arc::new(BlockProgram::build(2, 1).unwrap());
        match System::Shift.parse_point("u@19", Some(&program)).unwrap() {
            State::Symbolic(p) => assert_eq!(p.first_symbols(9).unwrap(), vec![1, 0, 1, 0, 0, 0, 0, 0, 0]),
            _ => panic!(),
        }
        assert!(System::Odometer.parse_point("x", None).is_err());
    }
}
