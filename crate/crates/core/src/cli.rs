//! Command line runner: subcommands, artifact writing and run manifests.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::classify::{classify_point, default_grid, ClassifyParams, DEFAULT_HORIZON};
use crate::construction::BlockProgram;
use crate::density::{density_profile_big, DensityOptions, Schedule};
use crate::entropy::{
    entropy_lower_bound, find_turbulence, ir_witness_pipeline, lap_entropy, li_yorke_scan, LiYorkeParams,
    PairSource, PipelineParams,
};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rat};
use crate::systems::{IntervalPLMap, System, SystemConfig};

#[derive(Debug, Parser)]
#[command(name = "recurlab", version, about = "Recurrence, density and entropy experiments on exact dynamical systems")]
struct Cli {
    /// Directory for payloads and the run manifest; payloads go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Checkpoint table and prefix of the constructed word.
    Construct(ConstructArgs),
    /// Lower/upper density estimates as CSV.
    Density(DensityArgs),
    /// Recurrence classification as JSON.
    Classify(ClassifyArgs),
    /// Lap growth table and turbulence witness.
    Entropy(EntropyArgs),
    /// Realize the constructed word in a turbulent interval map.
    Irpoint(IrpointArgs),
    /// Li-Yorke pair scan.
    Liyorke(LiyorkeArgs),
}

#[derive(Debug, Args)]
struct ProgramArgs {
    /// Construction level.
    #[arg(long, default_value_t = 2)]
    level: usize,
    /// Seed `k_{1,0}` of the construction.
    #[arg(long = "seed-k", default_value_t = 1)]
    seed_k: u64,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    #[command(flatten)]
    program: ProgramArgs,
    /// Symbols of the prefix dump.
    #[arg(long, default_value_t = 1024)]
    prefix: usize,
}

#[derive(Debug, Args)]
struct PointArgs {
    /// System descriptor (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    point: String,
    /// Comma-separated rationals.
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long = "n-min", default_value_t = 16)]
    n_min: u64,
    #[command(flatten)]
    program: ProgramArgs,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    point: PointArgs,
    /// `all` or `geometric:RATIO`.
    #[arg(long, default_value = "all")]
    schedule: String,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long = "theta-high")]
    theta_high: Option<String>,
    #[arg(long = "theta-low")]
    theta_low: Option<String>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    point: PointArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[arg(long = "k-gap-max", default_value_t = crate::classify::DEFAULT_K_GAP_MAX)]
    k_gap_max: u64,
    #[arg(long = "k-mult-max", default_value_t = crate::classify::DEFAULT_K_MULT_MAX)]
    k_mult_max: u64,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    /// Interval map descriptor; the tent map when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "n-max", default_value_t = 20)]
    n_max: usize,
    #[arg(long = "m-max", default_value_t = 4)]
    m_max: u32,
}

#[derive(Debug, Args)]
struct IrpointArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    program: ProgramArgs,
    #[arg(long = "m-max", default_value_t = 4)]
    m_max: u32,
    /// Realization depth; the level block length when omitted.
    #[arg(long)]
    depth: Option<u64>,
    #[command(flatten)]
    thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
struct LiyorkeArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    #[arg(long = "n-min", default_value_t = 16)]
    n_min: u64,
    #[arg(long = "delta-prox", default_value = "1/1000")]
    delta_prox: String,
    #[arg(long = "delta-sep", default_value = "1/10")]
    delta_sep: String,
}

/// A payload file and its contents.
struct Artifact {
    name: &'static str,
    body: String,
}

struct Outcome {
    artifacts: Vec<Artifact>,
    resolved: Value,
}

fn load_config(path: &Path) -> Result<(SystemConfig, System)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg = SystemConfig::from_json(&text)?;
    let system = cfg.build()?;
    Ok((cfg, system))
}

fn load_interval(path: Option<&Path>) -> Result<(SystemConfig, IntervalPLMap)> {
    let (cfg, system) = match path {
        Some(p) => load_config(p)?,
        None => {
            let system = System::IntervalPL(IntervalPLMap::tent());
            (system.to_config().expect("tent has a descriptor"), system)
        }
    };
    match system {
        System::IntervalPL(f) => Ok((cfg, f)),
        other => Err(Error::KindMismatch { system: other.kind(), state: "interval map" }),
    }
}

fn parse_radii(text: Option<&str>) -> Result<Vec<Rat>> {
    match text {
        None => Ok(default_grid()),
        Some(s) => s.split(',').map(|r| parse_rational(r.trim())).collect(),
    }
}

fn parse_schedule(text: &str) -> Result<Schedule> {
    match text.trim() {
        "all" => Ok(Schedule::All),
        other => match other.strip_prefix("geometric:") {
            Some(r) => Ok(Schedule::Geometric(parse_rational(r)?)),
            None => Err(Error::Config(format!("unknown schedule {other:?}"))),
        },
    }
}

fn parse_big(text: &str, what: &str) -> Result<BigUint> {
    text.trim().parse().map_err(|_| Error::Config(format!("{what} must be a non-negative integer, got {text:?}")))
}

fn thresholds(args: &ThresholdArgs, base: ClassifyParams) -> Result<ClassifyParams> {
    let mut p = base;
    if let Some(t) = &args.theta_high {
        p.theta_high = parse_rational(t)?;
    }
    if let Some(t) = &args.theta_low {
        p.theta_low = parse_rational(t)?;
    }
    Ok(p)
}

fn rat_list(v: &[Rat]) -> Value {
    Value::from(v.iter().map(format_rational).collect::<Vec<_>>())
}

fn program_if_needed(system: &System, point: &str, args: &ProgramArgs) -> Result<Option<Arc<BlockProgram>>> {
    let wants = matches!(system, System::Shift | System::SkewProduct(_)) && point.trim_start().starts_with('u');
    Ok(if wants { Some(Arc::new(BlockProgram::build(args.level, args.seed_k)?)) } else { None })
}

fn construct(args: &ConstructArgs) -> Result<Outcome> {
    let program = BlockProgram::build(args.program.level, args.program.seed_k)?;
    let bound = num_traits::ToPrimitive::to_usize(&program.index_bound()).unwrap_or(usize::MAX);
    let shown = args.prefix.min(bound);
    let prefix: String = program.prefix(shown)?.iter().map(|&b| char::from(b'0' + b)).collect();
    Ok(Outcome {
        artifacts: vec![
            Artifact { name: "checkpoints.csv", body: program.checkpoints_csv() },
            Artifact { name: "prefix.txt", body: format!("{prefix}\n") },
        ],
        resolved: json!({"level": args.program.level, "seed_k": args.program.seed_k, "prefix": shown}),
    })
}

fn density(args: &DensityArgs) -> Result<Outcome> {
    let p = &args.point;
    let (cfg, system) = load_config(&p.config)?;
    let program = program_if_needed(&system, &p.point, &p.program)?;
    let x = system.parse_point(&p.point, program.as_ref())?;
    let radii = parse_radii(p.radii.as_deref())?;
    let horizon = parse_big(p.horizon.as_deref().unwrap_or("4096"), "horizon")?;
    let schedule = parse_schedule(&args.schedule)?;
    let opts = DensityOptions { n_min: p.n_min, schedule: schedule.clone(), method: None };
    let profile = density_profile_big(&system, &x, &radii, &horizon, &opts)?;
    Ok(Outcome {
        artifacts: vec![Artifact { name: "density.csv", body: profile.to_csv(&p.point) }],
        resolved: json!({
            "system": serde_json::to_value(&cfg)?,
            "point": p.point,
            "radii": rat_list(&radii),
            "horizon": horizon.to_string(),
            "n_min": p.n_min,
            "schedule": schedule.label(),
            "level": p.program.level,
            "seed_k": p.program.seed_k,
        }),
    })
}

fn classify(args: &ClassifyArgs) -> Result<Outcome> {
    let p = &args.point;
    let (cfg, system) = load_config(&p.config)?;
    let program = program_if_needed(&system, &p.point, &p.program)?;
    let x = system.parse_point(&p.point, program.as_ref())?;
    let radii = parse_radii(p.radii.as_deref())?;
    let horizon = match &p.horizon {
        Some(h) => h.trim().parse().map_err(|_| Error::Config(format!("horizon must be an integer, got {h:?}")))?,
        None => DEFAULT_HORIZON,
    };
    let base = ClassifyParams { n_min: p.n_min, k_gap_max: args.k_gap_max, k_mult_max: args.k_mult_max, ..Default::default() };
    let params = thresholds(&args.thresholds, base)?;
    let profile = classify_point(&system, &x, &p.point, &radii, horizon, &params)?;
    Ok(Outcome {
        artifacts: vec![Artifact { name: "profile.json", body: profile.to_json() + "\n" }],
        resolved: json!({
            "system": serde_json::to_value(&cfg)?,
            "point": p.point,
            "radii": rat_list(&radii),
            "horizon": horizon,
            "params": serde_json::to_value(&params)?,
            "level": p.program.level,
            "seed_k": p.program.seed_k,
        }),
    })
}

fn entropy(args: &EntropyArgs) -> Result<Outcome> {
    let (cfg, map) = load_interval(args.config.as_deref())?;
    let growth = lap_entropy(&map, args.n_max)?;
    let witness = find_turbulence(&map, args.m_max)?;
    let witness_json = match &witness {
        Some(w) => json!({
            "found": true,
            "witness": serde_json::to_value(w)?,
            "entropy_lower_bound": serde_json::to_value(entropy_lower_bound(w))?,
            "lap_estimate": growth.estimate,
        }),
        None => json!({"found": false, "searched_up_to_m": args.m_max, "lap_estimate": growth.estimate}),
    };
    Ok(Outcome {
        artifacts: vec![
            Artifact { name: "laps.csv", body: growth.to_csv() },
            Artifact { name: "witness.json", body: serde_json::to_string_pretty(&witness_json)? + "\n" },
        ],
        resolved: json!({
            "system": serde_json::to_value(&cfg)?,
            "n_max": args.n_max,
            "achieved": growth.achieved,
            "m_max": args.m_max,
        }),
    })
}

fn irpoint(args: &IrpointArgs) -> Result<Outcome> {
    let (cfg, map) = load_interval(args.config.as_deref())?;
    let defaults = PipelineParams::default();
    let params = PipelineParams {
        level: args.program.level,
        seed: args.program.seed_k,
        m_max: args.m_max,
        depth: args.depth,
        classify: thresholds(&args.thresholds, defaults.classify.clone())?,
        ..defaults
    };
    let report = ir_witness_pipeline(&map, &params)?;
    Ok(Outcome {
        artifacts: vec![Artifact { name: "irpoint.json", body: report.to_json() + "\n" }],
        resolved: json!({
            "system": serde_json::to_value(&cfg)?,
            "level": params.level,
            "seed_k": params.seed,
            "m_max": params.m_max,
            "depth": report.depth,
            "radius_levels": params.radius_levels,
            "params": serde_json::to_value(&params.classify)?,
        }),
    })
}

fn liyorke(args: &LiyorkeArgs) -> Result<Outcome> {
    let (cfg, system) = load_config(&args.config)?;
    let params = LiYorkeParams {
        horizon: args.horizon,
        n_min: args.n_min,
        delta_prox: parse_rational(&args.delta_prox)?,
        delta_sep: parse_rational(&args.delta_sep)?,
    };
    let reports = li_yorke_scan(&system, &PairSource::Sampled { count: args.pairs, seed: args.seed }, &params)?;
    let flagged = reports.iter().filter(|r| r.scrambled).count();
    let body = json!({"flagged": flagged, "pairs": serde_json::to_value(&reports)?});
    Ok(Outcome {
        artifacts: vec![Artifact { name: "liyorke.json", body: serde_json::to_string_pretty(&body)? + "\n" }],
        resolved: json!({
            "system": serde_json::to_value(&cfg)?,
            "pairs": args.pairs,
            "seed": args.seed,
            "params": serde_json::to_value(&params)?,
        }),
    })
}

fn dispatch(command: &Command) -> Result<(&'static str, Outcome)> {
    Ok(match command {
        Command::Construct(a) => ("construct", construct(a)?),
        Command::Density(a) => ("density", density(a)?),
        Command::Classify(a) => ("classify", classify(a)?),
        Command::Entropy(a) => ("entropy", entropy(a)?),
        Command::Irpoint(a) => ("irpoint", irpoint(a)?),
        Command::Liyorke(a) => ("liyorke", liyorke(a)?),
    })
}

fn write_outputs(dir: &Path, name: &str, argv: &[String], outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    for a in &outcome.artifacts {
        fs::write(dir.join(a.name), &a.body)?;
    }
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "tool": "recurlab",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": name,
        "argv": argv,
        "resolved": outcome.resolved,
        "precision_override": std::env::var(crate::systems::config::PRECISION_ENV).ok(),
        "outputs": outcome.artifacts.iter().map(|a| a.name).collect::<Vec<_>>(),
        "timestamp_unix": timestamp,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Runs the command line `argv` (program name first) and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let text_argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let result = dispatch(&cli.command).and_then(|(name, outcome)| match &cli.out {
        Some(dir) => write_outputs(dir, name, &text_argv, &outcome),
        None => {
            for a in &outcome.artifacts {
                print!("{}", a.body);
            }
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["recurlab", "construct", "--bogus"]), 2);
        assert_eq!(run(["recurlab", "frobnicate"]), 2);
    }

    #[test]
    fn level_guard() {
        assert_eq!(run(["recurlab", "construct", "--level", "99"]), 3);
    }

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("all").unwrap(), Schedule::All);
        assert!(matches!(parse_schedule("geometric:3/2").unwrap(), Schedule::Geometric(_)));
        assert!(parse_schedule("weekly").is_err());
    }
}
