//! nodim: moduli tables, intersection radius sequences, witness/certificate
//! searches, fractional coverage, centerpoints and greedy Caratheodory runs
//! behind one seeded, file-oriented command surface.
//!
//! Exit contract: 0 verified witness / completed run, 1 verified certificate,
//! 2 usage or schema violation, 3 indeterminate or solver failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use nodim_core::caratheodory::{self, CaratheodoryRun};
use nodim_core::geometry::{intersects_ball, nearest_point, BallStatus, ConvexSet, SolveOptions};
use nodim_core::helly::{
    centerpoint, colorful_search, fractional_verify, fractional_verify_colorful, helly_search,
    ColorfulOutcome, FractionalOptions, FractionalReport, HellyOutcome,
};
use nodim_core::moduli::{self, ModulusTable, SearchBudget};
use nodim_core::sequences::{
    caratheodory_radii, euclidean_zeta, helly_radii, PowerTypeBoundParams, RadiusSequence,
    ZetaSource,
};
use nodim_core::space::Mode;
use nodim_core::verifier;
use nodim_core::{fmt_f64, Error, SpaceSpec, Vector, DEFAULT_SEED};

const ENV_SEED: &str = "NODIM_SEED";

#[derive(Parser)]
#[command(
    name = "nodim",
    version,
    about = "dimension-free intersection radii, moduli and greedy engines",
    propagate_version = true
)]
struct Cli {
    /// Base RNG seed; the NODIM_SEED environment variable overrides it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads for the parallel engines (0 keeps the library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate delta, zeta- and zeta+ over an eps grid
    Modulus(ModulusArgs),
    /// Emit the shrinking r_k sequence (or R_k with --caratheodory)
    Rk(RkArgs),
    /// Greedy witness / certificate search over one family of convex sets
    Helly(SearchArgs),
    /// Rainbow witness / certificate search over colored families
    Colorful(SearchArgs),
    /// Measure tuple coverage and hunt for a fractional center
    Fractional(FractionalArgs),
    /// Construct and verify a centerpoint for a small point set
    Centerpoint(CenterpointArgs),
    /// Run the greedy Caratheodory walk against its bound sequence
    Caratheodory(CaratheodoryArgs),
    /// Re-derive the supporting lemmas numerically and report margins
    Selfcheck(SelfcheckArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Euclidean,
    Lp,
}

#[derive(Copy, Clone, ValueEnum)]
enum BudgetArg {
    Quick,
    Default,
}

impl BudgetArg {
    fn to_budget(self, seed: u64) -> SearchBudget {
        match self {
            BudgetArg::Quick => SearchBudget::quick().with_seed(seed),
            BudgetArg::Default => SearchBudget::default().with_seed(seed),
        }
    }

    fn name(self) -> &'static str {
        match self {
            BudgetArg::Quick => "quick",
            BudgetArg::Default => "default",
        }
    }

    fn from_name(name: &str) -> Result<Self> {
        match name {
            "quick" => Ok(BudgetArg::Quick),
            "default" => Ok(BudgetArg::Default),
            other => bail!("unknown budget {other:?} (expected quick or default)"),
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SpaceArgs {
    /// Norm exponent; uniform convexity and smoothness need p > 1
    #[arg(long)]
    p: f64,
    /// Ambient dimension
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// euclidean unlocks closed forms (p must be 2); defaults by p
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

impl SpaceArgs {
    fn space(&self) -> Result<SpaceSpec> {
        let mode = self
            .mode
            .unwrap_or(if self.p == 2.0 { ModeArg::Euclidean } else { ModeArg::Lp });
        let spec = match mode {
            ModeArg::Euclidean => {
                if self.p != 2.0 {
                    bail!("euclidean mode fixes p = 2, got --p {}", self.p);
                }
                SpaceSpec::euclidean(self.dim)
            }
            ModeArg::Lp => SpaceSpec { p: self.p, dim: self.dim, mode: Mode::Lp },
        };
        spec.validate()?;
        if !spec.is_smooth() {
            bail!(
                "p = {} is not uniformly convex/smooth; the moduli and radius \
                 recursions need 1 < p < infinity",
                spec.p
            );
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct ModulusArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Eps grid as start:end:step
    #[arg(long, default_value = "0:2:0.1")]
    eps: String,
    #[arg(long, value_enum, default_value_t = BudgetArg::Quick)]
    budget: BudgetArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RkArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Number of radii to emit (1-based k up to this value)
    #[arg(long)]
    k_max: usize,
    /// Emit the growing Caratheodory sequence R_k instead of r_k
    #[arg(long)]
    caratheodory: bool,
    #[arg(long, value_enum, default_value_t = BudgetArg::Quick)]
    budget: BudgetArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// Instance JSON; omitted with --verify-only
    #[arg(required_unless_present = "verify_only", conflicts_with = "verify_only")]
    instance: Option<PathBuf>,
    /// Slack on scaled distances when picking violators
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = BudgetArg::Quick)]
    budget: BudgetArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-verify a previous outcome file instead of running
    #[arg(long, value_name = "OUTCOME")]
    verify_only: Option<PathBuf>,
}

#[derive(Args)]
struct FractionalArgs {
    #[arg(required_unless_present = "verify_only", conflicts_with = "verify_only")]
    instance: Option<PathBuf>,
    /// Claimed lower bound on the fraction of tuples meeting the unit ball
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Exhaustive enumeration cap; larger tuple counts get sampled
    #[arg(long, default_value_t = 20_000)]
    tuple_budget: usize,
    /// Cap on center candidates harvested from tuple witnesses
    #[arg(long, default_value_t = 64)]
    candidates: usize,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = BudgetArg::Quick)]
    budget: BudgetArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_name = "OUTCOME")]
    verify_only: Option<PathBuf>,
}

#[derive(Args)]
struct CenterpointArgs {
    #[arg(required_unless_present = "verify_only", conflicts_with = "verify_only")]
    instance: Option<PathBuf>,
    /// Random verification directions on top of all pairwise differences
    #[arg(long, default_value_t = 64)]
    dir_samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_name = "OUTCOME")]
    verify_only: Option<PathBuf>,
}

#[derive(Args)]
struct CaratheodoryArgs {
    #[arg(required_unless_present = "verify_only", conflicts_with = "verify_only")]
    instance: Option<PathBuf>,
    /// Overrides the step count from the instance file
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = BudgetArg::Quick)]
    budget: BudgetArg,
    /// Also write the per-step error curve as CSV
    #[arg(long, value_name = "PATH")]
    curve: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_name = "OUTCOME")]
    verify_only: Option<PathBuf>,
}

#[derive(Args)]
struct SelfcheckArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_name = "OUTCOME", conflicts_with = "out")]
    verify_only: Option<PathBuf>,
}

// --- instance schemas ---

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HellyInstance {
    space: SpaceSpec,
    k: usize,
    sets: Vec<ConvexSet>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ColorfulInstance {
    space: SpaceSpec,
    families: Vec<Vec<ConvexSet>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CenterpointInstance {
    space: SpaceSpec,
    k: usize,
    points: Vec<Vector>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CaratheodoryInstance {
    space: SpaceSpec,
    points: Vec<Vector>,
    #[serde(default)]
    steps: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Usage and schema problems exit 2; solver failures and violated internal
/// bounds exit 3.
fn classify(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. }) | Some(Error::BoundViolation(_)) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<u8> {
    let seed = match std::env::var(ENV_SEED) {
        Ok(raw) if !raw.trim().is_empty() => raw
            .trim()
            .parse::<u64>()
            .map_err(|_| anyhow!("{ENV_SEED} must hold an unsigned integer, got {raw:?}"))?,
        _ => cli.seed,
    };
    if cli.threads > 0 {
        // Repeat configuration in one process is harmless; ignore the error.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match &cli.command {
        Cmd::Modulus(a) => cmd_modulus(a, seed),
        Cmd::Rk(a) => cmd_rk(a, seed),
        Cmd::Helly(a) => cmd_helly(a, seed),
        Cmd::Colorful(a) => cmd_colorful(a, seed),
        Cmd::Fractional(a) => cmd_fractional(a, seed),
        Cmd::Centerpoint(a) => cmd_centerpoint(a, seed),
        Cmd::Caratheodory(a) => cmd_caratheodory(a, seed),
        Cmd::Selfcheck(a) => cmd_selfcheck(a, seed),
    }
}

// --- shared plumbing ---

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

/// JSON writer with every float at 17 significant digits, so equal runs give
/// byte-identical files and parsing restores the exact bits.
fn json_17(v: &Value) -> String {
    let mut s = String::new();
    write_json(&mut s, v, 0);
    s.push('\n');
    s
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_json(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().expect("f64 number")));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string escapes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(is_scalar) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_json(out, item, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    write_json(out, item, indent + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                pad(out, indent);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (key, val)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("key escapes"));
                out.push_str(": ");
                write_json(out, val, indent + 1);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, n: usize) {
    for _ in 0..n {
        out.push_str("  ");
    }
}

/// start:end:step, inclusive of both ends when step lands on them.
fn parse_grid(spec: &str, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be start:end:step, got {spec:?}");
    }
    let parse = |s: &str, what: &str| -> Result<f64> {
        s.parse::<f64>().with_context(|| format!("bad grid {what} {s:?}"))
    };
    let start = parse(parts[0], "start")?;
    let end = parse(parts[1], "end")?;
    let step = parse(parts[2], "step")?;
    if !(start.is_finite() && end.is_finite() && step.is_finite() && step > 0.0 && end >= start) {
        bail!("grid needs finite bounds, end >= start and step > 0, got {spec:?}");
    }
    if start < lo - 1e-12 || end > hi + 1e-12 {
        bail!("grid [{start}, {end}] leaves the supported range [{lo}, {hi}]");
    }
    let mut vals = Vec::new();
    let mut i = 0usize;
    loop {
        let v = start + i as f64 * step;
        if v > end + step * 1e-9 {
            break;
        }
        let v = v.clamp(lo, end.min(hi));
        if vals.last().map_or(true, |&prev| v > prev) {
            vals.push(v);
        }
        i += 1;
    }
    Ok(vals)
}

/// r_j recursion: Euclidean closed form, otherwise a rectified interpolant
/// of the estimated lower hypotenuse modulus on [0, 1].
fn helly_rseq(
    space: &SpaceSpec,
    k_max: usize,
    budget: &SearchBudget,
) -> Result<RadiusSequence, Error> {
    match space.mode {
        Mode::Euclidean => {
            helly_radii(euclidean_zeta, k_max, 1e-12, ZetaSource::EuclideanClosedForm)
        }
        Mode::Lp => {
            let ts: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
            let interp = moduli::zeta_minus_interpolant(space, &ts, budget)?;
            helly_radii(move |t| interp.eval(t), k_max, 1e-9, ZetaSource::EstimatedTable)
        }
    }
}

/// R_j recursion; the upper modulus gets a wider grid because the recursion
/// probes arguments above 1.
fn cara_rseq(
    space: &SpaceSpec,
    k_max: usize,
    budget: &SearchBudget,
) -> Result<RadiusSequence, Error> {
    match space.mode {
        Mode::Euclidean => {
            caratheodory_radii(euclidean_zeta, k_max, 1e-12, ZetaSource::EuclideanClosedForm)
        }
        Mode::Lp => {
            let ts: Vec<f64> = (1..=16).map(|i| i as f64 * 0.25).collect();
            let interp = moduli::zeta_plus_interpolant(space, &ts, budget)?;
            caratheodory_radii(move |t| interp.eval(t), k_max, 1e-10, ZetaSource::EstimatedTable)
        }
    }
}

// --- outcome verification ---

enum Verdict {
    Pass,
    Fail(String),
    Unresolved(String),
}

impl Verdict {
    fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    fn from_flag(ok: bool, why: &str) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail(why.to_string())
        }
    }
}

/// Re-projection slack: distances are recomputed with fresh solves, so the
/// witness test allows ten solver tolerances (at least 1e-6).
fn witness_slack(solve: &SolveOptions) -> f64 {
    (10.0 * solve.tol).max(1e-6)
}

fn check_witness_dists(
    space: &SpaceSpec,
    sets: &[ConvexSet],
    x: &Vector,
    rk: f64,
) -> Result<Verdict> {
    let solve = SolveOptions::for_space(space);
    let slack = witness_slack(&solve);
    for (i, set) in sets.iter().enumerate() {
        let r = nearest_point(space, set, x, &solve)?;
        if !r.converged {
            return Ok(Verdict::Unresolved(format!(
                "projection onto set {i} did not settle (residual {:.3e})",
                r.residual
            )));
        }
        if r.dist > rk + slack {
            return Ok(Verdict::Fail(format!(
                "set {i} lies {} from the witness, above r_k + {slack:.1e}",
                fmt_f64(r.dist)
            )));
        }
    }
    Ok(Verdict::Pass)
}

fn check_certificate(space: &SpaceSpec, subset: &[ConvexSet]) -> Result<Verdict> {
    let solve = SolveOptions::for_space(space);
    let check = intersects_ball(space, subset, &Vector::zeros(space.dim), 1.0, &solve)?;
    Ok(match check.status {
        BallStatus::Misses => Verdict::Pass,
        BallStatus::Intersects => Verdict::Fail(format!(
            "certified tuple meets the unit ball (dist {})",
            fmt_f64(check.dist)
        )),
        BallStatus::Indeterminate => Verdict::Unresolved(format!(
            "ball check inconclusive (margin {})",
            fmt_f64(check.margin)
        )),
    })
}

fn check_helly(
    space: &SpaceSpec,
    sets: &[ConvexSet],
    outcome: &HellyOutcome,
    rk: f64,
) -> Result<Verdict> {
    match outcome {
        HellyOutcome::Witness { x, .. } => check_witness_dists(space, sets, x, rk),
        HellyOutcome::Certificate { indices, .. } => {
            let mut subset = Vec::with_capacity(indices.len());
            for &i in indices {
                subset.push(
                    sets.get(i)
                        .cloned()
                        .ok_or_else(|| anyhow!("certificate index {i} out of range"))?,
                );
            }
            check_certificate(space, &subset)
        }
    }
}

fn check_colorful(
    space: &SpaceSpec,
    families: &[Vec<ConvexSet>],
    outcome: &ColorfulOutcome,
    rk: f64,
) -> Result<Verdict> {
    match outcome {
        ColorfulOutcome::Witness { x, color, .. } => {
            let fam = families
                .get(*color)
                .ok_or_else(|| anyhow!("witness color {color} out of range"))?;
            check_witness_dists(space, fam, x, rk)
        }
        ColorfulOutcome::Certificate { indices, .. } => {
            let mut subset = Vec::with_capacity(indices.len());
            for ci in indices {
                let set = families
                    .get(ci.color)
                    .and_then(|f| f.get(ci.index))
                    .ok_or_else(|| {
                        anyhow!("certificate index ({}, {}) out of range", ci.color, ci.index)
                    })?;
                subset.push(set.clone());
            }
            check_certificate(space, &subset)
        }
    }
}

/// Exit code for a fresh run: 0 verified positive, 1 verified certificate,
/// 3 anything unresolved or refuted.
fn finish(verdict: &Verdict, positive: bool) -> Result<u8> {
    match verdict {
        Verdict::Pass => Ok(if positive { 0 } else { 1 }),
        Verdict::Fail(why) => {
            eprintln!("verification failed: {why}");
            Ok(3)
        }
        Verdict::Unresolved(why) => {
            eprintln!("verification unresolved: {why}");
            Ok(3)
        }
    }
}

/// Exit code for --verify-only: the recomputed flag must reproduce the
/// stored one, then the usual contract applies.
fn conclude_verify(verdict: &Verdict, stored: bool, positive: bool) -> Result<u8> {
    if let Verdict::Unresolved(why) = verdict {
        eprintln!("verification unresolved: {why}");
        return Ok(3);
    }
    let recomputed = verdict.is_pass();
    if recomputed != stored {
        eprintln!("stored verified flag {stored} does not match recomputed {recomputed}");
        return Ok(3);
    }
    if !recomputed {
        eprintln!("outcome is consistently unverified");
        return Ok(3);
    }
    Ok(if positive { 0 } else { 1 })
}

// --- outcome document accessors ---

fn doc_field<'a>(doc: &'a Value, key: &str) -> Result<&'a Value> {
    doc.get(key)
        .ok_or_else(|| anyhow!("outcome file misses the {key:?} field"))
}

fn doc_str<'a>(doc: &'a Value, key: &str) -> Result<&'a str> {
    doc_field(doc, key)?
        .as_str()
        .ok_or_else(|| anyhow!("field {key:?} must be a string"))
}

fn doc_u64(doc: &Value, key: &str) -> Result<u64> {
    doc_field(doc, key)?
        .as_u64()
        .ok_or_else(|| anyhow!("field {key:?} must be an unsigned integer"))
}

fn doc_f64(doc: &Value, key: &str) -> Result<f64> {
    doc_field(doc, key)?
        .as_f64()
        .ok_or_else(|| anyhow!("field {key:?} must be a number"))
}

fn doc_bool(doc: &Value, key: &str) -> Result<bool> {
    doc_field(doc, key)?
        .as_bool()
        .ok_or_else(|| anyhow!("field {key:?} must be a boolean"))
}

fn doc_as<T: serde::de::DeserializeOwned>(doc: &Value, key: &str) -> Result<T> {
    serde_json::from_value(doc_field(doc, key)?.clone())
        .with_context(|| format!("field {key:?}"))
}

fn require_command(doc: &Value, expect: &str) -> Result<()> {
    let got = doc_str(doc, "command")?;
    if got != expect {
        bail!("outcome file holds a {got:?} run, expected {expect:?}");
    }
    Ok(())
}

// --- commands ---

fn cmd_modulus(args: &ModulusArgs, seed: u64) -> Result<u8> {
    let space = args.space.space()?;
    let grid = parse_grid(&args.eps, 0.0, 2.0)?;
    let budget = args.budget.to_budget(seed);
    let table = ModulusTable::build(&space, &grid, &budget)?;
    let content = match args.format {
        FormatArg::Csv => table.to_csv(),
        FormatArg::Json => json_17(&serde_json::to_value(&table)?),
    };
    emit(&args.out, &content)?;
    Ok(0)
}

fn cmd_rk(args: &RkArgs, seed: u64) -> Result<u8> {
    let space = args.space.space()?;
    if args.k_max == 0 {
        bail!("--k-max must be at least 1");
    }
    let budget = args.budget.to_budget(seed);
    let rseq = if args.caratheodory {
        cara_rseq(&space, args.k_max, &budget)?
    } else {
        helly_rseq(&space, args.k_max, &budget)?
    };
    let content = match args.format {
        FormatArg::Csv => {
            let params = (!args.caratheodory && space.mode == Mode::Euclidean)
                .then(PowerTypeBoundParams::euclidean);
            rseq.to_csv(params.as_ref())
        }
        FormatArg::Json => json_17(&serde_json::to_value(&rseq)?),
    };
    emit(&args.out, &content)?;
    Ok(0)
}

fn cmd_helly(args: &SearchArgs, seed: u64) -> Result<u8> {
    if let Some(path) = &args.verify_only {
        return verify_helly_doc(&read_json::<Value>(path)?);
    }
    let inst: HellyInstance = read_json(args.instance.as_ref().expect("clap requires"))?;
    let budget = args.budget.to_budget(seed);
    let rseq = helly_rseq(&inst.space, inst.k, &budget)?;
    let rk = rseq.value(inst.k).expect("sequence built to k");
    let outcome = helly_search(&inst.space, &inst.sets, inst.k, &rseq, args.tol)?;
    let verdict = check_helly(&inst.space, &inst.sets, &outcome, rk)?;
    let positive = matches!(outcome, HellyOutcome::Witness { .. });
    let doc = json!({
        "command": "helly",
        "space": inst.space,
        "seed": seed,
        "budget": args.budget.name(),
        "tol": args.tol,
        "k": inst.k,
        "r_k": rk,
        "sets": &inst.sets,
        "result": &outcome,
        "verified": verdict.is_pass(),
    });
    emit(&args.out, &json_17(&doc))?;
    finish(&verdict, positive)
}

fn verify_helly_doc(doc: &Value) -> Result<u8> {
    require_command(doc, "helly")?;
    let space: SpaceSpec = doc_as(doc, "space")?;
    let sets: Vec<ConvexSet> = doc_as(doc, "sets")?;
    let k: usize = doc_u64(doc, "k")? as usize;
    let outcome: HellyOutcome = doc_as(doc, "result")?;
    let seed = doc_u64(doc, "seed")?;
    let budget = BudgetArg::from_name(doc_str(doc, "budget")?)?.to_budget(seed);
    let rseq = helly_rseq(&space, k, &budget)?;
    let rk = rseq
        .value(k)
        .ok_or_else(|| anyhow!("radius sequence does not reach k = {k}"))?;
    let stored_rk = doc_f64(doc, "r_k")?;
    if (rk - stored_rk).abs() > 1e-12 {
        eprintln!(
            "stored r_k {} differs from recomputed {}",
            fmt_f64(stored_rk),
            fmt_f64(rk)
        );
        return Ok(3);
    }
    let verdict = check_helly(&space, &sets, &outcome, rk)?;
    let positive = matches!(outcome, HellyOutcome::Witness { .. });
    conclude_verify(&verdict, doc_bool(doc, "verified")?, positive)
}

fn cmd_colorful(args: &SearchArgs, seed: u64) -> Result<u8> {
    if let Some(path) = &args.verify_only {
        return verify_colorful_doc(&read_json::<Value>(path)?);
    }
    let inst: ColorfulInstance = read_json(args.instance.as_ref().expect("clap requires"))?;
    let k = inst.families.len();
    if k == 0 {
        bail!("instance needs at least one family");
    }
    let budget = args.budget.to_budget(seed);
    let rseq = helly_rseq(&inst.space, k, &budget)?;
    let rk = rseq.value(k).expect("sequence built to k");
    let outcome = colorful_search(&inst.space, &inst.families, &rseq, args.tol)?;
    let verdict = check_colorful(&inst.space, &inst.families, &outcome, rk)?;
    let positive = matches!(outcome, ColorfulOutcome::Witness { .. });
    let doc = json!({
        "command": "colorful",
        "space": inst.space,
        "seed": seed,
        "budget": args.budget.name(),
        "tol": args.tol,
        "k": k,
        "r_k": rk,
        "families": &inst.families,
        "result": &outcome,
        "verified": verdict.is_pass(),
    });
    emit(&args.out, &json_17(&doc))?;
    finish(&verdict, positive)
}

fn verify_colorful_doc(doc: &Value) -> Result<u8> {
    require_command(doc, "colorful")?;
    let space: SpaceSpec = doc_as(doc, "space")?;
    let families: Vec<Vec<ConvexSet>> = doc_as(doc, "families")?;
    let k: usize = doc_u64(doc, "k")? as usize;
    if k != families.len() {
        bail!("field \"k\" = {k} does not match {} families", families.len());
    }
    let outcome: ColorfulOutcome = doc_as(doc, "result")?;
    let seed = doc_u64(doc, "seed")?;
    let budget = BudgetArg::from_name(doc_str(doc, "budget")?)?.to_budget(seed);
    let rseq = helly_rseq(&space, k, &budget)?;
    let rk = rseq
        .value(k)
        .ok_or_else(|| anyhow!("radius sequence does not reach k = {k}"))?;
    let stored_rk = doc_f64(doc, "r_k")?;
    if (rk - stored_rk).abs() > 1e-12 {
        eprintln!(
            "stored r_k {} differs from recomputed {}",
            fmt_f64(stored_rk),
            fmt_f64(rk)
        );
        return Ok(3);
    }
    let verdict = check_colorful(&space, &families, &outcome, rk)?;
    let positive = matches!(outcome, ColorfulOutcome::Witness { .. });
    conclude_verify(&verdict, doc_bool(doc, "verified")?, positive)
}

fn cmd_fractional(args: &FractionalArgs, seed: u64) -> Result<u8> {
    if let Some(path) = &args.verify_only {
        return verify_fractional_doc(&read_json::<Value>(path)?);
    }
    let raw: Value = read_json(args.instance.as_ref().expect("clap requires"))?;
    let colorful = raw.get("families").is_some();
    let opts = FractionalOptions {
        alpha: args.alpha,
        tuple_budget: args.tuple_budget,
        center_candidates: args.candidates,
        tol: args.tol,
        seed,
    };
    let budget = args.budget.to_budget(seed);
    let (doc, report) = if colorful {
        let inst: ColorfulInstance = serde_json::from_value(raw).context("colorful instance")?;
        let k = inst.families.len();
        if k == 0 {
            bail!("instance needs at least one family");
        }
        let rseq = helly_rseq(&inst.space, k, &budget)?;
        let rk = rseq.value(k).expect("sequence built to k");
        let report = fractional_verify_colorful(&inst.space, &inst.families, &rseq, &opts)?;
        let doc = json!({
            "command": "fractional",
            "space": inst.space,
            "seed": seed,
            "budget": args.budget.name(),
            "k": k,
            "r_k": rk,
            "options": {
                "alpha": args.alpha,
                "tuple_budget": args.tuple_budget,
                "candidates": args.candidates,
                "tol": args.tol,
            },
            "families": &inst.families,
            "report": &report,
            "verified": report.clears_target(),
        });
        (doc, report)
    } else {
        let inst: HellyInstance = serde_json::from_value(raw).context("fractional instance")?;
        let rseq = helly_rseq(&inst.space, inst.k, &budget)?;
        let rk = rseq.value(inst.k).expect("sequence built to k");
        let report = fractional_verify(&inst.space, &inst.sets, inst.k, &rseq, &opts)?;
        let doc = json!({
            "command": "fractional",
            "space": inst.space,
            "seed": seed,
            "budget": args.budget.name(),
            "k": inst.k,
            "r_k": rk,
            "options": {
                "alpha": args.alpha,
                "tuple_budget": args.tuple_budget,
                "candidates": args.candidates,
                "tol": args.tol,
            },
            "sets": &inst.sets,
            "report": &report,
            "verified": report.clears_target(),
        });
        (doc, report)
    };
    emit(&args.out, &json_17(&doc))?;
    let verdict = Verdict::from_flag(
        report.clears_target(),
        &format!(
            "covered fraction {} falls short of the target {}",
            fmt_f64(report.covered_fraction),
            fmt_f64(report.beta_target)
        ),
    );
    finish(&verdict, true)
}

fn verify_fractional_doc(doc: &Value) -> Result<u8> {
    require_command(doc, "fractional")?;
    let space: SpaceSpec = doc_as(doc, "space")?;
    let report: FractionalReport = doc_as(doc, "report")?;
    let rk = doc_f64(doc, "r_k")?;
    let tol = doc_f64(doc_field(doc, "options")?, "tol")?;
    let family: Vec<ConvexSet> = if doc.get("families").is_some() {
        let families: Vec<Vec<ConvexSet>> = doc_as(doc, "families")?;
        let color = report
            .best_color
            .ok_or_else(|| anyhow!("colorful report misses best_color"))?;
        families
            .get(color)
            .cloned()
            .ok_or_else(|| anyhow!("best_color {color} out of range"))?
    } else {
        doc_as(doc, "sets")?
    };
    if family.is_empty() {
        bail!("covered family is empty");
    }
    let solve = SolveOptions::for_space(&space);
    let mut covered = 0usize;
    for (i, set) in family.iter().enumerate() {
        let r = nearest_point(&space, set, &report.best_center, &solve)?;
        if !r.converged {
            eprintln!("verification unresolved: projection onto set {i} did not settle");
            return Ok(3);
        }
        if r.dist <= rk + tol {
            covered += 1;
        }
    }
    let frac = covered as f64 / family.len() as f64;
    if (frac - report.covered_fraction).abs() > 1e-9 {
        eprintln!(
            "stored covered_fraction {} does not match recomputed {}",
            fmt_f64(report.covered_fraction),
            fmt_f64(frac)
        );
        return Ok(3);
    }
    let verdict = Verdict::from_flag(
        frac + 1e-12 >= report.beta_target,
        &format!(
            "covered fraction {} falls short of the target {}",
            fmt_f64(frac),
            fmt_f64(report.beta_target)
        ),
    );
    conclude_verify(&verdict, doc_bool(doc, "verified")?, true)
}

fn cmd_centerpoint(args: &CenterpointArgs, seed: u64) -> Result<u8> {
    if let Some(path) = &args.verify_only {
        return verify_centerpoint_doc(&read_json::<Value>(path)?);
    }
    let inst: CenterpointInstance = read_json(args.instance.as_ref().expect("clap requires"))?;
    let rseq = helly_rseq(&inst.space, inst.k, &SearchBudget::quick().with_seed(seed))?;
    let rk = rseq.value(inst.k).expect("sequence built to k");
    let result = centerpoint(&inst.space, &inst.points, inst.k, &rseq, args.dir_samples, seed)?;
    let verified = result.passed();
    let doc = json!({
        "command": "centerpoint",
        "space": inst.space,
        "seed": seed,
        "k": inst.k,
        "r_k": rk,
        "dir_samples": args.dir_samples,
        "points": &inst.points,
        "result": &result,
        "verified": verified,
    });
    emit(&args.out, &json_17(&doc))?;
    let verdict = Verdict::from_flag(
        verified,
        &format!(
            "min halfspace count {} falls below the required {}",
            result.min_halfspace_count,
            result.required()
        ),
    );
    finish(&verdict, true)
}

fn verify_centerpoint_doc(doc: &Value) -> Result<u8> {
    require_command(doc, "centerpoint")?;
    let space: SpaceSpec = doc_as(doc, "space")?;
    let points: Vec<Vector> = doc_as(doc, "points")?;
    let k: usize = doc_u64(doc, "k")? as usize;
    let dir_samples: usize = doc_u64(doc, "dir_samples")? as usize;
    let seed = doc_u64(doc, "seed")?;
    let rseq = helly_rseq(&space, k, &SearchBudget::quick().with_seed(seed))?;
    let result = centerpoint(&space, &points, k, &rseq, dir_samples, seed)?;
    if serde_json::to_value(&result)? != *doc_field(doc, "result")? {
        eprintln!("stored result differs from the deterministic re-run");
        return Ok(3);
    }
    let verdict = Verdict::from_flag(
        result.passed(),
        &format!(
            "min halfspace count {} falls below the required {}",
            result.min_halfspace_count,
            result.required()
        ),
    );
    conclude_verify(&verdict, doc_bool(doc, "verified")?, true)
}

fn cara_verified(run: &CaratheodoryRun, tol: f64) -> bool {
    let slack = tol.max(1e-8);
    run.partial_norms
        .iter()
        .zip(&run.bound.values)
        .all(|(&n, &b)| n <= b + slack)
}

fn cmd_caratheodory(args: &CaratheodoryArgs, seed: u64) -> Result<u8> {
    if let Some(path) = &args.verify_only {
        return verify_caratheodory_doc(&read_json::<Value>(path)?);
    }
    let inst: CaratheodoryInstance = read_json(args.instance.as_ref().expect("clap requires"))?;
    let steps = args
        .steps
        .or(inst.steps)
        .ok_or_else(|| anyhow!("step count missing: pass --steps or a \"steps\" field"))?;
    let budget = args.budget.to_budget(seed);
    let bound = cara_rseq(&inst.space, steps, &budget)?;
    let run = caratheodory::greedy_caratheodory(&inst.space, &inst.points, steps, &bound, args.tol)?;
    let verified = cara_verified(&run, args.tol);
    if let Some(curve_path) = &args.curve {
        fs::write(curve_path, caratheodory::error_curve_csv(&run))
            .with_context(|| format!("writing {}", curve_path.display()))?;
    }
    let doc = json!({
        "command": "caratheodory",
        "space": inst.space,
        "seed": seed,
        "budget": args.budget.name(),
        "steps": steps,
        "tol": args.tol,
        "points": &inst.points,
        "run": &run,
        "verified": verified,
    });
    emit(&args.out, &json_17(&doc))?;
    let verdict = Verdict::from_flag(verified, "a partial sum exceeds its bound");
    finish(&verdict, true)
}

fn verify_caratheodory_doc(doc: &Value) -> Result<u8> {
    require_command(doc, "caratheodory")?;
    let space: SpaceSpec = doc_as(doc, "space")?;
    let points: Vec<Vector> = doc_as(doc, "points")?;
    let steps: usize = doc_u64(doc, "steps")? as usize;
    let tol = doc_f64(doc, "tol")?;
    let seed = doc_u64(doc, "seed")?;
    let budget = BudgetArg::from_name(doc_str(doc, "budget")?)?.to_budget(seed);
    let bound = cara_rseq(&space, steps, &budget)?;
    let run = caratheodory::greedy_caratheodory(&space, &points, steps, &bound, tol)?;
    if serde_json::to_value(&run)? != *doc_field(doc, "run")? {
        eprintln!("stored run differs from the deterministic re-run");
        return Ok(3);
    }
    let verdict = Verdict::from_flag(cara_verified(&run, tol), "a partial sum exceeds its bound");
    conclude_verify(&verdict, doc_bool(doc, "verified")?, true)
}

fn cmd_selfcheck(args: &SelfcheckArgs, seed: u64) -> Result<u8> {
    if let Some(path) = &args.verify_only {
        return verify_selfcheck_doc(&read_json::<Value>(path)?);
    }
    let reports = verifier::run_suite(seed)?;
    let verified = reports.iter().all(|r| r.passed());
    for r in &reports {
        eprintln!(
            "{} {} (trials {}, worst margin {})",
            if r.passed() { "ok  " } else { "FAIL" },
            r.name,
            r.trials,
            fmt_f64(r.worst_margin)
        );
    }
    let doc = json!({
        "command": "selfcheck",
        "seed": seed,
        "reports": &reports,
        "verified": verified,
    });
    emit(&args.out, &json_17(&doc))?;
    let verdict = Verdict::from_flag(verified, "a lemma check reported failures");
    finish(&verdict, true)
}

fn verify_selfcheck_doc(doc: &Value) -> Result<u8> {
    require_command(doc, "selfcheck")?;
    let seed = doc_u64(doc, "seed")?;
    let reports = verifier::run_suite(seed)?;
    if serde_json::to_value(&reports)? != *doc_field(doc, "reports")? {
        eprintln!("stored reports differ from the deterministic re-run");
        return Ok(3);
    }
    let verified = reports.iter().all(|r| r.passed());
    let verdict = Verdict::from_flag(verified, "a lemma check reported failures");
    conclude_verify(&verdict, doc_bool(doc, "verified")?, true)
}
