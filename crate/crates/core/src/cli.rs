//! `pwalloc` command-line interface.
//!
//! Single solves print JSON, sweeps print CSV. Every float is rounded to
//! nine significant digits, and output depends only on the arguments.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::benefit::{
    min_r_certain, solve_benefit_heterogeneous, solve_benefit_homogeneous, uniformity_threshold,
};
use crate::error::{Error, Result};
use crate::harm::{solve_harm_heterogeneous, solve_harm_homogeneous, sweep_k};
use crate::model::{AllocationProblem, PriorityProfile, Sense, SolveResult};
use crate::oracle::{brute_force, GridSpec};
use crate::weighting::WeightingParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pwalloc",
    version,
    about = "Perceived-welfare-optimal allocation under Prelec weighting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the weighting curve; CSV `p,w`.
    Curve {
        #[command(flatten)]
        weighting: WeightingArgs,
        #[arg(long, value_parser = parse_samples)]
        samples: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one allocation problem; JSON.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Accepted for compatibility; output is always JSON.
        #[arg(long)]
        json: bool,
    },
    /// Number of at-risk individuals against the harm budget; CSV.
    SweepK {
        #[arg(long, value_parser = parse_n)]
        n: usize,
        #[command(flatten)]
        weighting: WeightingArgs,
        #[arg(long, allow_negative_numbers = true)]
        r_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        r_max: f64,
        #[arg(long, value_parser = parse_positive)]
        r_step: f64,
    },
    /// Smallest benefit budget that makes someone certain; CSV.
    MinR {
        #[command(flatten)]
        weighting: WeightingArgs,
        #[arg(long, value_delimiter = ',', value_parser = parse_n_certain, required = true)]
        n_list: Vec<usize>,
    },
    /// Weighting landmarks and the uniformity threshold; JSON.
    Threshold {
        #[command(flatten)]
        weighting: WeightingArgs,
    },
    /// Structured solver against the grid oracle; JSON.
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_parser = parse_step)]
        step: f64,
    },
}

#[derive(Debug, Args)]
struct WeightingArgs {
    /// Curvature, in (0, 1).
    #[arg(long, value_parser = parse_alpha)]
    alpha: f64,
    /// Elevation, in (0, inf).
    #[arg(long, value_parser = parse_positive)]
    beta: f64,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    #[arg(long)]
    sense: Sense,
    #[arg(long, value_parser = parse_n)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[command(flatten)]
    weighting: WeightingArgs,
    /// One positive priority per line, exactly N lines.
    #[arg(long)]
    priorities: Option<PathBuf>,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside the valid range (0, 1)"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside the valid range (0, inf)"))
    }
}

fn parse_step(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    GridSpec::with_step(v)
        .map(|g| g.step())
        .map_err(|_| format!("{v} must lie in (0, 0.1] and divide 1 exactly"))
}

fn parse_count(s: &str, min: usize) -> std::result::Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))?;
    if v >= min {
        Ok(v)
    } else {
        Err(format!("{v} is outside the valid range [{min}, inf)"))
    }
}

fn parse_n(s: &str) -> std::result::Result<usize, String> {
    parse_count(s, 1)
}

fn parse_n_certain(s: &str) -> std::result::Result<usize, String> {
    parse_count(s, 2)
}

fn parse_samples(s: &str) -> std::result::Result<usize, String> {
    parse_count(s, 2)
}

/// Round to nine significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Nine-significant-digit text for CSV cells. `-0` prints as `0`.
pub fn fmt9(x: f64) -> String {
    let v = sig9(x);
    if v == 0.0 {
        "0".to_owned()
    } else if v.is_nan() {
        "nan".to_owned()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{v}")
    }
}

fn round_json(value: &mut Value) {
    match value {
        Value::Number(num) if !num.is_u64() && !num.is_i64() => {
            if let Some(x) = num.as_f64() {
                let r = sig9(x);
                *value = serde_json::Number::from_f64(if r == 0.0 { 0.0 } else { r })
                    .map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)
        .map_err(|e| Error::InvalidProblem(format!("serialization failed: {e}")))?;
    round_json(&mut v);
    Ok(serde_json::to_string_pretty(&v).expect("a json value always serializes") + "\n")
}

/// Read a priorities file: one positive real per line, exactly `n` lines.
pub fn read_priorities(path: &Path, n: usize) -> Result<PriorityProfile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidProblem(format!("cannot read {}: {e}", path.display())))?;
    let mut raw = Vec::with_capacity(n);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        let v: f64 = line.parse().map_err(|_| {
            Error::InvalidProblem(format!(
                "{} line {}: `{line}` is not a number",
                path.display(),
                i + 1
            ))
        })?;
        raw.push(v);
    }
    if raw.len() != n {
        return Err(Error::InvalidProblem(format!(
            "{} has {} priorities, expected {n}",
            path.display(),
            raw.len()
        )));
    }
    PriorityProfile::normalize(&raw)
}

fn build_problem(args: &ProblemArgs) -> Result<AllocationProblem> {
    let weighting = WeightingParams::new(args.weighting.alpha, args.weighting.beta)?;
    let problem = AllocationProblem::new(args.n, args.r, args.sense, weighting)?;
    match &args.priorities {
        Some(path) => problem.with_priorities(read_priorities(path, args.n)?),
        None => Ok(problem),
    }
}

/// Dispatch to the structured solver that fits the problem.
pub fn solve(problem: &AllocationProblem) -> Result<SolveResult> {
    match (problem.sense(), problem.is_homogeneous()) {
        (Sense::Harm, true) => solve_harm_homogeneous(problem),
        (Sense::Harm, false) => solve_harm_heterogeneous(problem),
        (Sense::Benefit, true) => solve_benefit_homogeneous(problem),
        (Sense::Benefit, false) => solve_benefit_heterogeneous(problem),
    }
}

fn curve(w: &WeightingParams, samples: usize) -> String {
    let mut out = String::from("p,w\n");
    for i in 0..samples {
        let p = if i + 1 == samples {
            1.0
        } else {
            i as f64 / (samples - 1) as f64
        };
        let _ = writeln!(out, "{},{}", fmt9(p), fmt9(w.value(p)));
    }
    out
}

fn budgets(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi < lo {
        return Vec::new();
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| lo + i as f64 * step).collect()
}

fn execute(command: Command) -> Result<String> {
    match command {
        Command::Curve {
            weighting,
            samples,
            out,
        } => {
            let w = WeightingParams::new(weighting.alpha, weighting.beta)?;
            let csv = curve(&w, samples);
            match out {
                Some(path) => {
                    std::fs::write(&path, csv).map_err(|e| {
                        Error::InvalidProblem(format!("cannot write {}: {e}", path.display()))
                    })?;
                    Ok(String::new())
                }
                None => Ok(csv),
            }
        }
        Command::Solve { problem, json: _ } => to_json(&solve(&build_problem(&problem)?)?),
        Command::SweepK {
            n,
            weighting,
            r_min,
            r_max,
            r_step,
        } => {
            let w = WeightingParams::new(weighting.alpha, weighting.beta)?;
            let sweep = sweep_k(&w, n, &budgets(r_min, r_max, r_step))?;
            let mut out = String::from("r,k,delta,objective\n");
            for row in &sweep.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt9(row.r),
                    row.k,
                    fmt9(row.delta),
                    fmt9(row.objective)
                );
            }
            let _ = writeln!(out, "slope_fit,{},,", fmt9(sweep.slope_fit));
            let note = if sweep.theory_applicable {
                ""
            } else {
                "inapplicable"
            };
            let _ = writeln!(out, "slope_theory,{},{note},", fmt9(sweep.slope_theory));
            let _ = writeln!(out, "slope_stationary,{},,", fmt9(sweep.slope_stationary));
            Ok(out)
        }
        Command::MinR { weighting, n_list } => {
            let w = WeightingParams::new(weighting.alpha, weighting.beta)?;
            let mut out = String::from("n,r_min,lower_qn,upper_bound\n");
            for n in n_list {
                let th = min_r_certain(&w, n)?;
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    n,
                    fmt9(th.r_min),
                    fmt9(th.lower),
                    fmt9(th.upper)
                );
            }
            Ok(out)
        }
        Command::Threshold { weighting } => {
            let w = WeightingParams::new(weighting.alpha, weighting.beta)?;
            let lm = w.landmarks()?;
            let th = uniformity_threshold(&w)?;
            to_json(&json!({
                "uniformity_n": th.n,
                "unit_slope_q": lm.unit_slope,
                "inflection": lm.inflection,
                "fixed_point": lm.fixed_point,
                "bound": "sufficient",
                "regime": if th.heuristic { "heuristic" } else { "proven" },
            }))
        }
        Command::Compare { problem, step } => {
            let problem = build_problem(&problem)?;
            let grid = GridSpec::with_step(step)?;
            let oracle = brute_force(&problem, &grid)?;
            // score the solver on the oracle's budget so the gap is like for like
            let problem = match oracle.snapped_budget {
                Some(r) => problem.with_budget(r)?,
                None => problem,
            };
            let solver = solve(&problem)?;
            let gap = match problem.sense() {
                Sense::Harm => oracle.result.objective - solver.objective,
                Sense::Benefit => solver.objective - oracle.result.objective,
            };
            to_json(&json!({
                "solver": solver,
                "oracle": oracle,
                "gap": gap,
            }))
        }
    }
}

/// Run the CLI, writing results to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            if out
                .write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return EXIT_SOLVER;
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_SOLVER
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(
        args,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
