//! Command-line harness: config handling, dispatch, artifacts and exit codes.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage or configuration
//! error, 3 resource budget exceeded. Errors are also written to stderr as a
//! single JSON object.

mod output;
mod specs;

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use output::fmt_f64;
use output::{to_value, Artifacts, Cell, RunSummary};
pub use specs::{parse_contraction, parse_map, parse_potential, parse_weights, MapChoice};

use crate::contractions::{tail_sum, validate_contraction, Verdict};
use crate::dynamics::{covering_time, BranchedMap, Cover, DynamicalSystem, DEFAULT_NODE_BUDGET};
use crate::ergodic::{
    default_centering, estimate_ergodic_value, holder_seminorm_estimate, lax_oleinik_fixed_point,
    mane_subaction, subaction_holder_bound, two_sided_sandwich, verify_subcohomology, CircleGrid, Direction,
    HolderPotential, SubactionGrid,
};
use crate::error::{Error, Result};
use crate::families::{collet_eckmann_check, ExpandingCircle, VianaMap};
use crate::symbolic::{random_cylinder_batch, validate_weights};
use crate::zooming::{
    check_bounded_distortion, detect_hyperbolic_times, hyperbolic_frequency, verify_preball_contraction,
    HyperbolicParams, DEFAULT_SEED,
};

/// Environment variable that overrides the preimage-tree node budget.
pub const BUDGET_ENV: &str = "ZOOMAX_BUDGET_NODES";

#[derive(Debug, Parser)]
#[command(
    name = "zoomax",
    version,
    about = "Subactions, zooming times and related checks"
)]
pub struct Cli {
    /// JSON file of knob values; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for summary.json and CSV tables.
    #[arg(long, global = true, default_value = "zoomax-out")]
    out: PathBuf,

    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Zooming contraction sequences.
    Contract {
        #[command(subcommand)]
        sub: ContractCmd,
    },
    /// Ergodic values, subactions and their verification.
    Ergopt {
        #[command(subcommand)]
        sub: ErgoptCmd,
    },
    /// Hyperbolic times, frequencies and distortion.
    Zoom {
        #[command(subcommand)]
        sub: ZoomCmd,
    },
    /// Weighted shift-space certificates.
    Shift {
        #[command(subcommand)]
        sub: ShiftCmd,
    },
    /// Map-family checks.
    Family {
        #[command(subcommand)]
        sub: FamilyCmd,
    },
    /// Orbit-level utilities.
    Core {
        #[command(subcommand)]
        sub: CoreCmd,
    },
}

#[derive(Debug, Subcommand)]
enum ContractCmd {
    /// Check the four axioms and the Hölder tail sum.
    Validate(Knobs),
}

#[derive(Debug, Subcommand)]
enum ErgoptCmd {
    /// Extremal periodic average.
    Value(Knobs),
    /// Build a subaction and verify it.
    Subaction(Knobs),
    /// Verify a subaction read from CSV (grid_x, lambda).
    Verify(Knobs),
    /// Subactions for phi and -phi.
    Sandwich(Knobs),
}

#[derive(Debug, Subcommand)]
enum ZoomCmd {
    /// Hyperbolic times along one orbit.
    Times(Knobs),
    /// Frequency of hyperbolic times over random points.
    Freq(Knobs),
    /// Pre-ball contraction and distortion at a hyperbolic time.
    Distortion(Knobs),
}

#[derive(Debug, Subcommand)]
enum ShiftCmd {
    /// Weight axioms and random cylinder contraction certificates.
    Check(Knobs),
}

#[derive(Debug, Subcommand)]
enum FamilyCmd {
    /// Collet-Eckmann growth along the critical orbit.
    CeCheck(Knobs),
    /// Hyperbolic-time frequency for the skew product.
    VianaFreq(Knobs),
}

#[derive(Debug, Subcommand)]
enum CoreCmd {
    /// Covering time of an interval.
    Cover(Knobs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Mane,
    LaxOleinik,
}

/// Every tunable value. The same names are accepted in the `--config` file.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Knobs {
    /// doubling | expanding:d=N | quadratic:a=A | viana:a0=..,alpha=..,d=..
    #[arg(long)]
    map: Option<String>,
    /// zero | cos | sin | one-minus-cos | cob-sin | mixed | table:<path>
    #[arg(long)]
    potential: Option<String>,
    /// exp:lambda=.. | power:a=..,b=.. | table:<path>
    #[arg(long)]
    seq: Option<String>,
    /// geom:q=..[,c=..] | power:a=..,b=..
    #[arg(long)]
    weights: Option<String>,
    /// Preimage-tree depth N.
    #[arg(long)]
    depth: Option<usize>,
    /// Grid level: the grid has degree^level points.
    #[arg(long)]
    grid: Option<u32>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Defect tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_period: Option<usize>,
    #[arg(long)]
    direction: Option<Direction>,
    /// inf (default) | sup | a number.
    #[arg(long, allow_hyphen_values = true)]
    centering: Option<String>,
    #[arg(long)]
    method: Option<Method>,
    /// Lax-Oleinik stopping tolerance.
    #[arg(long)]
    iter_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// CSV with columns grid_x, lambda.
    #[arg(long)]
    subaction: Option<PathBuf>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Starting point (theta for the skew product).
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Fibre coordinate for the skew product.
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    /// Time index for pre-ball checks.
    #[arg(long)]
    n: Option<usize>,
    /// Number of random starting points.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    pairs: Option<usize>,
    /// Ball radius.
    #[arg(long)]
    delta: Option<f64>,
    /// Collet-Eckmann exponent.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Hölder exponent.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hi: Option<f64>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Word length for shift points.
    #[arg(long)]
    len: Option<usize>,
}

fn merge(file: Option<&Path>, flags: &Knobs) -> Result<Knobs> {
    let Some(path) = file else {
        return Ok(flags.clone());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
    let base: Knobs = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
    let (Value::Object(mut merged), Value::Object(over)) = (to_value(&base), to_value(flags)) else {
        unreachable!("knobs serialize to objects");
    };
    for (k, v) in over {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn knob<T: PartialOrd + Display + Copy>(name: &str, value: Option<T>, default: T, lo: T, hi: T) -> Result<T> {
    let v = value.unwrap_or(default);
    if !(v >= lo && v <= hi) {
        return Err(Error::InvalidInput(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

fn positive(name: &str, value: Option<f64>, default: f64) -> Result<f64> {
    let v = value.unwrap_or(default);
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
    }
    Ok(v)
}

fn node_budget() -> Result<u128> {
    match std::env::var(BUDGET_ENV) {
        Ok(s) => s
            .trim()
            .parse::<u128>()
            .map_err(|_| Error::InvalidInput(format!("{BUDGET_ENV}='{s}' is not an integer"))),
        Err(_) => Ok(DEFAULT_NODE_BUDGET),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } => 3,
        Error::InvalidInput(_) | Error::Capability(_) | Error::OutsideDomain { .. } => 2,
        _ => 1,
    }
}

fn emit_error(kind: &str, message: &str, code: i32) {
    eprintln!(
        "{}",
        json!({ "error": kind, "message": message, "exit_code": code })
    );
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let start = Instant::now();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    emit_error("usage", &e.to_string(), 2);
                    2
                }
            };
        }
    };
    match execute(&cli, start) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let code = exit_code(&e);
            emit_error(e.kind(), &e.to_string(), code);
            code
        }
    }
}

struct Outcome {
    pass: bool,
    results: Value,
    seed: Option<u64>,
}

fn execute(cli: &Cli, start: Instant) -> Result<bool> {
    let (verb, flags): (&str, &Knobs) = match &cli.verb {
        Verb::Contract {
            sub: ContractCmd::Validate(k),
        } => ("contract validate", k),
        Verb::Ergopt { sub } => match sub {
            ErgoptCmd::Value(k) => ("ergopt value", k),
            ErgoptCmd::Subaction(k) => ("ergopt subaction", k),
            ErgoptCmd::Verify(k) => ("ergopt verify", k),
            ErgoptCmd::Sandwich(k) => ("ergopt sandwich", k),
        },
        Verb::Zoom { sub } => match sub {
            ZoomCmd::Times(k) => ("zoom times", k),
            ZoomCmd::Freq(k) => ("zoom freq", k),
            ZoomCmd::Distortion(k) => ("zoom distortion", k),
        },
        Verb::Shift {
            sub: ShiftCmd::Check(k),
        } => ("shift check", k),
        Verb::Family { sub } => match sub {
            FamilyCmd::CeCheck(k) => ("family ce-check", k),
            FamilyCmd::VianaFreq(k) => ("family viana-freq", k),
        },
        Verb::Core {
            sub: CoreCmd::Cover(k),
        } => ("core cover", k),
    };
    let k = merge(cli.config.as_deref(), flags)?;
    let budget = node_budget()?;
    let mut art = Artifacts::new(&cli.out)?;
    let outcome = match verb {
        "contract validate" => contract_validate(&k, &mut art)?,
        "ergopt value" => ergopt_value(&k, budget, &mut art)?,
        "ergopt subaction" => ergopt_subaction(&k, budget, &mut art)?,
        "ergopt verify" => ergopt_verify(&k, budget, &mut art)?,
        "ergopt sandwich" => ergopt_sandwich(&k, budget, &mut art)?,
        "zoom times" => zoom_times(&k, &mut art)?,
        "zoom freq" => zoom_freq(&k, &mut art)?,
        "zoom distortion" => zoom_distortion(&k, &mut art)?,
        "shift check" => shift_check(&k, &mut art)?,
        "family ce-check" => family_ce(&k, &mut art)?,
        "family viana-freq" => family_viana(&k, &mut art)?,
        "core cover" => core_cover(&k, &mut art)?,
        _ => unreachable!("every verb is dispatched"),
    };
    let mut artifacts = art.files.clone();
    artifacts.push("summary.json".to_string());
    let summary = RunSummary {
        verb: verb.to_string(),
        inputs: to_value(&k),
        pass: outcome.pass,
        results: outcome.results,
        artifacts,
        seed: outcome.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    art.json("summary.json", &summary)?;
    Ok(outcome.pass)
}

fn circle_map(k: &Knobs) -> Result<ExpandingCircle> {
    match parse_map(k.map.as_deref().unwrap_or("doubling"))? {
        MapChoice::Circle(t) => Ok(t),
        _ => Err(Error::Capability(
            "ergodic optimization is implemented for expanding circle maps only".into(),
        )),
    }
}

fn potential(k: &Knobs, map: ExpandingCircle) -> Result<HolderPotential> {
    parse_potential(k.potential.as_deref().unwrap_or("mixed"), map)
}

fn grid_for(k: &Knobs, map: &ExpandingCircle, default_level: u32) -> Result<CircleGrid> {
    let level = knob("grid", k.grid, default_level, 1, 26)?;
    CircleGrid::power(map.degree_u32(), level)
}

fn contract_validate(k: &Knobs, art: &mut Artifacts) -> Result<Outcome> {
    let seq = parse_contraction(k.seq.as_deref().unwrap_or("exp:lambda=0.6931471805599453"))?;
    let n_max = knob("n_max", k.n_max, 50, 2, 100_000)?;
    let alpha = knob("alpha", k.alpha, 1.0, f64::MIN_POSITIVE, 1.0)?;
    let radii: Vec<f64> = (0..24)
        .map(|i| 1e-6 * (0.9f64 / 1e-6).powf(i as f64 / 23.0))
        .collect();
    let report = validate_contraction(&seq, &radii, n_max)?;
    let tail = match tail_sum(&seq, alpha) {
        Ok(t) => to_value(&t),
        Err(Error::Capability(msg)) => json!({ "status": "unavailable", "reason": msg }),
        Err(e) => return Err(e),
    };
    art.csv(
        "contract.csv",
        &["n", "a_n"],
        (1..=n_max).map(|n| {
            vec![
                Cell::U(n),
                seq.coefficient(n).map_or(Cell::S(String::new()), Cell::F),
            ]
        }),
    )?;
    Ok(Outcome {
        pass: report.verdict == Verdict::Valid,
        results: json!({
            "sequence": seq.describe(),
            "n_max": n_max,
            "report": report,
            "alpha": alpha,
            "tail_sum": tail,
        }),
        seed: None,
    })
}

fn ergopt_value(k: &Knobs, budget: u128, art: &mut Artifacts) -> Result<Outcome> {
    let map = circle_map(k)?;
    let phi = potential(k, map)?;
    let max_period = knob("max_period", k.max_period, 12, 1, 24)?;
    let direction = k.direction.unwrap_or(Direction::Sup);
    let est = estimate_ergodic_value(&map, &phi, max_period, direction, budget)?;
    art.csv(
        "value.csv",
        &["max_period", "value"],
        est.running
            .iter()
            .enumerate()
            .map(|(i, v)| vec![Cell::U(i + 1), Cell::F(*v)]),
    )?;
    Ok(Outcome {
        pass: true,
        results: json!({
            "map": map.name(),
            "potential": phi.name,
            "value": est.value,
            "direction": est.direction,
            "witness_period": est.witness.period,
            "witness_points": est.witness.points,
            "max_period": est.max_period,
            "orbits_searched": est.orbits_searched,
        }),
        seed: None,
    })
}

fn centering(k: &Knobs, map: &ExpandingCircle, phi: &HolderPotential, budget: u128) -> Result<(f64, String)> {
    let max_period = knob("max_period", k.max_period, 12, 1, 24)?;
    match k.centering.as_deref().unwrap_or("inf") {
        "inf" => Ok((default_centering(map, phi, max_period, budget)?, "inf".into())),
        "sup" => Ok((
            estimate_ergodic_value(map, phi, max_period, Direction::Sup, budget)?.value,
            "sup".into(),
        )),
        s => s
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite())
            .map(|c| (c, "fixed".into()))
            .ok_or_else(|| Error::InvalidInput(format!("centering must be inf, sup or a number, got '{s}'"))),
    }
}

/// `‖phi‖_alpha` bound from the declared Lipschitz hint, using `d <= 1/2`.
fn phi_seminorm_bound(phi: &HolderPotential, alpha: f64) -> Option<f64> {
    phi.seminorm_hint.map(|l| l * 0.5f64.powf(1.0 - alpha))
}

fn subaction_rows(sub: &SubactionGrid, defects: &[f64]) -> Vec<Vec<Cell>> {
    (0..sub.grid.size)
        .map(|i| {
            vec![
                Cell::F(sub.grid.point(i)),
                Cell::F(sub.values[i]),
                Cell::F(defects[i]),
            ]
        })
        .collect()
}

fn ergopt_subaction(k: &Knobs, budget: u128, art: &mut Artifacts) -> Result<Outcome> {
    let map = circle_map(k)?;
    let phi = potential(k, map)?;
    let grid = grid_for(k, &map, 10)?;
    let tol = positive("tol", k.tol, 1e-2)?;
    let (c, mode) = centering(k, &map, &phi, budget)?;
    let method = k.method.unwrap_or(Method::Mane);
    let sub = match method {
        Method::Mane => {
            let depth = knob("depth", k.depth, 12, 1, 64)?;
            mane_subaction(&map, &phi, c, grid, depth, budget)?
        }
        Method::LaxOleinik => {
            let iter_tol = positive("iter_tol", k.iter_tol, 1e-8)?;
            let max_iter = knob("max_iter", k.max_iter, 100_000, 1, 10_000_000)?;
            lax_oleinik_fixed_point(&map, &phi, c, grid, iter_tol, max_iter)?
        }
    };
    let report = verify_subcohomology(&map, &phi, &sub, tol)?;
    let alpha = knob("alpha", k.alpha, phi.alpha, f64::MIN_POSITIVE, 1.0)?;
    let seminorm = holder_seminorm_estimate(&grid.points(), &sub.values, alpha)?;
    let bound =
        phi_seminorm_bound(&phi, alpha).map(|s| subaction_holder_bound(s, 2usize.max(map.degree()), alpha));
    art.csv(
        "subaction.csv",
        &["grid_x", "lambda", "defect"],
        subaction_rows(&sub, &report.defects),
    )?;
    Ok(Outcome {
        pass: report.pass && !sub.divergent,
        results: json!({
            "map": map.name(),
            "potential": phi.name,
            "grid_size": grid.size,
            "centering": c,
            "centering_mode": mode,
            "construction": sub.construction,
            "divergent": sub.divergent,
            "offset": sub.offset,
            "depth_minima": sub.depth_minima,
            "defect": report,
            "holder_alpha": alpha,
            "seminorm": seminorm,
            "seminorm_bound": bound,
        }),
        seed: None,
    })
}

fn read_subaction(path: &Path, centering: f64) -> Result<SubactionGrid> {
    let bad = |e: &dyn Display| Error::InvalidInput(format!("{}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let headers = rdr.headers().map_err(|e| bad(&e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(&format!("missing column '{name}'")))
    };
    let (xi, li) = (col("grid_x")?, col("lambda")?);
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(&e))?;
        let num = |i: usize| {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(&format!("unreadable value in row {}", row + 1)))
        };
        xs.push(num(xi)?);
        vals.push(num(li)?);
    }
    let grid = CircleGrid::new(xs.len())?;
    if let Some(i) = (0..xs.len()).find(|&i| (xs[i] - grid.point(i)).abs() > 1e-12) {
        return Err(Error::InvalidInput(format!(
            "grid is not forward-closed: row {} has x = {} instead of {}",
            i + 1,
            xs[i],
            grid.point(i)
        )));
    }
    SubactionGrid::supplied(grid, vals, centering)
}

fn ergopt_verify(k: &Knobs, budget: u128, art: &mut Artifacts) -> Result<Outcome> {
    let map = circle_map(k)?;
    let phi = potential(k, map)?;
    let tol = positive("tol", k.tol, 1e-2)?;
    let path = k
        .subaction
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("ergopt verify needs --subaction <csv>".into()))?;
    let c = match k.centering.as_deref() {
        None => 0.0,
        Some(_) => centering(k, &map, &phi, budget)?.0,
    };
    let sub = read_subaction(path, c)?;
    let report = verify_subcohomology(&map, &phi, &sub, tol)?;
    art.csv(
        "verify.csv",
        &["grid_x", "lambda", "defect"],
        subaction_rows(&sub, &report.defects),
    )?;
    Ok(Outcome {
        pass: report.pass,
        results: json!({
            "map": map.name(),
            "potential": phi.name,
            "grid_size": sub.grid.size,
            "centering": c,
            "defect": report,
        }),
        seed: None,
    })
}

fn ergopt_sandwich(k: &Knobs, budget: u128, art: &mut Artifacts) -> Result<Outcome> {
    let map = circle_map(k)?;
    let phi = potential(k, map)?;
    let grid = grid_for(k, &map, 10)?;
    let depth = knob("depth", k.depth, 14, 1, 64)?;
    let tol = positive("tol", k.tol, 5e-3)?;
    let s = two_sided_sandwich(&map, &phi, grid, depth, tol, budget)?;
    art.csv(
        "sandwich.csv",
        &["grid_x", "lambda1", "lambda2", "defect_lower", "defect_upper"],
        (0..grid.size).map(|i| {
            vec![
                Cell::F(grid.point(i)),
                Cell::F(-s.lower.values[i]),
                Cell::F(s.upper.values[i]),
                Cell::F(s.lower_report.defects[i]),
                Cell::F(s.upper_report.defects[i]),
            ]
        }),
    )?;
    Ok(Outcome {
        pass: s.lower_report.pass && s.upper_report.pass,
        results: json!({
            "map": map.name(),
            "potential": phi.name,
            "grid_size": grid.size,
            "depth": depth,
            "lower": s.lower_report,
            "upper": s.upper_report,
        }),
        seed: None,
    })
}

fn hyperbolic_params(k: &Knobs, map: &MapChoice) -> Result<HyperbolicParams> {
    // the fibre orbit of the skew product returns near x = 0 too often for
    // epsilon = 0.1 to leave any hyperbolic times
    let (sigma, epsilon, beta) = match map {
        MapChoice::Circle(t) => (1.0 / t.degree() as f64, 0.1, 0.0),
        MapChoice::Quadratic(_) => (0.9, 0.1, 1.0),
        MapChoice::Viana(_) => (0.9, 0.01, 1.0),
    };
    let sigma = k.sigma.unwrap_or(sigma);
    let epsilon = k.epsilon.unwrap_or(epsilon);
    let beta = k.beta.unwrap_or(beta);
    HyperbolicParams::new(sigma, epsilon, beta)
}

const DEFAULT_X: f64 = 0.1234567;

fn zoom_times(k: &Knobs, art: &mut Artifacts) -> Result<Outcome> {
    let map = parse_map(k.map.as_deref().unwrap_or("doubling"))?;
    let params = hyperbolic_params(k, &map)?;
    let horizon = knob("horizon", k.horizon, 200, 1, 10_000_000)?;
    let x = k.x.unwrap_or(DEFAULT_X);
    let rec = match map {
        MapChoice::Circle(t) => detect_hyperbolic_times(&t, x, &params, horizon)?,
        MapChoice::Quadratic(q) => detect_hyperbolic_times(&q, x, &params, horizon)?,
        MapChoice::Viana(v) => detect_hyperbolic_times(&v, (x, k.y.unwrap_or(0.3)), &params, horizon)?,
    };
    art.csv("times.csv", &["n"], rec.indices.iter().map(|&n| vec![Cell::U(n)]))?;
    Ok(Outcome {
        pass: true,
        results: json!({
            "params": params,
            "horizon": horizon,
            "count": rec.indices.len(),
            "frequency": rec.frequency,
        }),
        seed: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn frequency_table<M: DynamicalSystem>(
    map: &M,
    sample: Vec<M::Point>,
    params: &HyperbolicParams,
    horizon: usize,
    header: &[&str],
    coords: impl Fn(&M::Point) -> Vec<f64>,
    art: &mut Artifacts,
    file: &str,
) -> Result<Value> {
    let stats = hyperbolic_frequency(map, &sample, params, horizon)?;
    art.csv(
        file,
        header,
        sample.iter().zip(&stats.per_point).map(|(p, f)| {
            let mut row: Vec<Cell> = coords(p).into_iter().map(Cell::F).collect();
            row.push(Cell::F(*f));
            row
        }),
    )?;
    Ok(json!({
        "params": params,
        "horizon": horizon,
        "points": sample.len(),
        "min": stats.min,
        "mean": stats.mean,
        "max": stats.max,
    }))
}

fn viana_sample(v: &VianaMap, n: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let (lo, hi) = v.params.strip;
    (0..n)
        .map(|_| (rng.random::<f64>(), rng.random_range(lo..hi)))
        .collect()
}

fn zoom_freq(k: &Knobs, art: &mut Artifacts) -> Result<Outcome> {
    let map = parse_map(k.map.as_deref().unwrap_or("doubling"))?;
    let params = hyperbolic_params(k, &map)?;
    let horizon = knob("horizon", k.horizon, 1000, 1, 10_000_000)?;
    let points = knob("points", k.points, 100, 1, 1_000_000)?;
    let seed = k.seed.unwrap_or(DEFAULT_SEED);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let results = match map {
        MapChoice::Circle(t) => {
            let sample = (0..points).map(|_| rng.random::<f64>()).collect();
            frequency_table(
                &t,
                sample,
                &params,
                horizon,
                &["x", "frequency"],
                |p| vec![*p],
                art,
                "freq.csv",
            )?
        }
        MapChoice::Quadratic(q) => {
            let r = q.radius();
            let sample = (0..points).map(|_| rng.random_range(-r..r)).collect();
            frequency_table(
                &q,
                sample,
                &params,
                horizon,
                &["x", "frequency"],
                |p| vec![*p],
                art,
                "freq.csv",
            )?
        }
        MapChoice::Viana(v) => {
            let sample = viana_sample(&v, points, &mut rng);
            frequency_table(
                &v,
                sample,
                &params,
                horizon,
                &["theta", "x", "frequency"],
                |p| vec![p.0, p.1],
                art,
                "freq.csv",
            )?
        }
    };
    Ok(Outcome {
        pass: true,
        results,
        seed: Some(seed),
    })
}

fn distortion_at<M: BranchedMap>(
    map: &M,
    x: f64,
    params: &HyperbolicParams,
    k: &Knobs,
    seed: u64,
    art: &mut Artifacts,
) -> Result<Outcome> {
    let horizon = knob("horizon", k.horizon, 200, 1, 100_000)?;
    let pairs = knob("pairs", k.pairs, 1000, 1, 10_000_000)?;
    let delta = positive("delta", k.delta, 1e-4)?;
    let rec = detect_hyperbolic_times(map, x, params, horizon)?;
    let n = match k.n {
        Some(n) => n,
        None => *rec
            .indices
            .last()
            .ok_or_else(|| Error::Hypothesis(format!("no hyperbolic time for x = {x} up to {horizon}")))?,
    };
    let seq = crate::contractions::ContractionSeq::exponential(-0.5 * params.sigma.ln());
    let pre = verify_preball_contraction(map, x, n, &seq, pairs, delta, seed)?;
    let dist = check_bounded_distortion(map, x, n, pairs, delta, seed)?;
    art.csv(
        "distortion.csv",
        &["n", "rho_hat", "preball_worst_ratio", "samples"],
        [vec![
            Cell::U(n),
            Cell::F(dist.rho_hat),
            Cell::F(pre.worst_ratio),
            Cell::U(dist.samples),
        ]],
    )?;
    Ok(Outcome {
        pass: pre.pass,
        results: json!({
            "map": map.name(),
            "x": x,
            "n": n,
            "is_hyperbolic_time": rec.indices.contains(&n),
            "delta": delta,
            "preball": pre,
            "distortion": dist,
        }),
        seed: Some(seed),
    })
}

fn zoom_distortion(k: &Knobs, art: &mut Artifacts) -> Result<Outcome> {
    let map = parse_map(k.map.as_deref().unwrap_or("doubling"))?;
    let params = hyperbolic_params(k, &map)?;
    let seed = k.seed.unwrap_or(DEFAULT_SEED);
    let x = k.x.unwrap_or(DEFAULT_X);
    match map {
        MapChoice::Circle(t) => distortion_at(&t, x, &params, k, seed, art),
        MapChoice::Quadratic(q) => distortion_at(&q, x, &params, k, seed, art),
        MapChoice::Viana(_) => Err(Error::Capability(
            "pre-ball sampling needs one-dimensional inverse branches".into(),
        )),
    }
}

fn shift_check(k: &Knobs, art: &mut Artifacts) -> Result<Outcome> {
    let metric = parse_weights(k.weights.as_deref().unwrap_or("geom:q=0.25"))?;
    let seq = parse_contraction(k.seq.as_deref().unwrap_or("power:a=2,b=1"))?;
    let pairs = knob("pairs", k.pairs, 10_000, 1, 10_000_000)?;
    let depth = knob("depth", k.depth, 20, 0, 1000)?;
    let len = knob(
        "len",
        k.len,
        crate::symbolic::DEFAULT_WORD_LEN.max(depth + 1),
        depth + 1,
        100_000,
    )?;
    let n_max = knob("n_max", k.n_max, 64, 2, 100_000)?;
    let seed = k.seed.unwrap_or(DEFAULT_SEED);
    let weights = validate_weights(&metric, n_max, seq.coefficient(1))?;
    let batch = random_cylinder_batch(&metric, &seq, pairs, depth, len, seed)?;
    art.csv(
        "shift.csv",
        &["depth", "pairs", "worst_ratio", "failures"],
        batch.per_depth.iter().map(|d| {
            vec![
                Cell::U(d.depth),
                Cell::U(d.pairs),
                Cell::F(d.worst_ratio),
                Cell::U(d.failures),
            ]
        }),
    )?;
    Ok(Outcome {
        pass: weights.valid && batch.pass,
        results: json!({
            "weights": metric.describe(),
            "sequence": seq.describe(),
            "weight_report": weights,
            "batch": {
                "pass": batch.pass,
                "pairs": batch.pairs,
                "failures": batch.failures,
                "worst_ratio": batch.worst_ratio,
                "domination": batch.domination,
            },
        }),
        seed: Some(seed),
    })
}

fn family_ce(k: &Knobs, art: &mut Artifacts) -> Result<Outcome> {
    let fam = match parse_map(k.map.as_deref().unwrap_or("quadratic:a=2"))? {
        MapChoice::Quadratic(q) => q,
        _ => return Err(Error::Capability("ce-check needs a quadratic map".into())),
    };
    let lambda = k.lambda.unwrap_or(4f64.ln());
    let horizon = knob("horizon", k.horizon, 50, 1, 10_000_000)?;
    let report = collet_eckmann_check(&fam, lambda, horizon)?;
    art.csv(
        "ce.csv",
        &["n", "margin"],
        report
            .margins
            .iter()
            .enumerate()
            .map(|(i, m)| vec![Cell::U(i + 1), Cell::F(*m)]),
    )?;
    Ok(Outcome {
        pass: report.pass,
        results: json!({
            "map": fam.name(),
            "lambda": lambda,
            "horizon": horizon,
            "pass": report.pass,
            "first_failure": report.first_failure,
            "min_margin": report.min_margin,
            "min_margin_at": report.min_margin_at,
        }),
        seed: None,
    })
}

fn family_viana(k: &Knobs, art: &mut Artifacts) -> Result<Outcome> {
    let map = parse_map(k.map.as_deref().unwrap_or("viana:a0=1.8,alpha=0.01,d=16"))?;
    let MapChoice::Viana(v) = map else {
        return Err(Error::Capability("viana-freq needs a viana map".into()));
    };
    let params = hyperbolic_params(k, &map)?;
    let horizon = knob("horizon", k.horizon, 10_000, 1, 10_000_000)?;
    let points = knob("points", k.points, 100, 1, 1_000_000)?;
    let seed = k.seed.unwrap_or(DEFAULT_SEED);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = viana_sample(&v, points, &mut rng);
    let results = frequency_table(
        &v,
        sample,
        &params,
        horizon,
        &["theta", "x", "frequency"],
        |p| vec![p.0, p.1],
        art,
        "viana.csv",
    )?;
    let pass = results["min"].as_f64().is_some_and(|m| m > 0.0);
    Ok(Outcome {
        pass,
        results,
        seed: Some(seed),
    })
}

fn core_cover(k: &Knobs, art: &mut Artifacts) -> Result<Outcome> {
    let map = parse_map(k.map.as_deref().unwrap_or("doubling"))?;
    let resolution = knob("resolution", k.resolution, 1024, 1, 1 << 24)?;
    let k_max = knob("k_max", k.k_max, 64, 0, 10_000)?;
    let lo = k.lo.unwrap_or(0.0);
    let hi = k.hi.unwrap_or(0.01);
    let cover = match map {
        MapChoice::Circle(t) => covering_time(&t, (lo, hi), resolution, k_max)?,
        MapChoice::Quadratic(q) => covering_time(&q, (lo, hi), resolution, k_max)?,
        MapChoice::Viana(v) => covering_time_2d(&v)?,
    };
    let time = match cover {
        Cover::Covered(n) => Some(n),
        Cover::Exceeded { .. } => None,
    };
    art.csv(
        "cover.csv",
        &["lo", "hi", "resolution", "covering_time"],
        [vec![
            Cell::F(lo),
            Cell::F(hi),
            Cell::U(resolution),
            time.map_or(Cell::S(String::new()), Cell::U),
        ]],
    )?;
    Ok(Outcome {
        pass: time.is_some(),
        results: json!({ "covering_time": time, "k_max": k_max, "resolution": resolution }),
        seed: None,
    })
}

fn covering_time_2d(_v: &VianaMap) -> Result<Cover> {
    Err(Error::Capability(
        "covering time is only defined for one-dimensional maps".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knob_ranges() {
        assert_eq!(knob("d", None, 3, 1, 5).unwrap(), 3);
        assert!(knob("d", Some(9), 3, 1, 5).is_err());
        assert!(positive("tol", Some(0.0), 1.0).is_err());
        assert!(positive("tol", Some(f64::NAN), 1.0).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            exit_code(&Error::Budget {
                what: String::new(),
                needed: 2,
                budget: 1
            }),
            3
        );
        assert_eq!(exit_code(&Error::InvalidInput(String::new())), 2);
        assert_eq!(exit_code(&Error::Capability(String::new())), 2);
        assert_eq!(exit_code(&Error::Hypothesis(String::new())), 1);
    }

    #[test]
    fn config_unknown_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"map": "doubling", "bogus": 1}"#).unwrap();
        assert!(merge(Some(&path), &Knobs::default()).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"map": "expanding:d=3", "depth": 5}"#).unwrap();
        let flags = Knobs {
            depth: Some(7),
            ..Knobs::default()
        };
        let k = merge(Some(&path), &flags).unwrap();
        assert_eq!(k.depth, Some(7));
        assert_eq!(k.map.as_deref(), Some("expanding:d=3"));
    }
}
