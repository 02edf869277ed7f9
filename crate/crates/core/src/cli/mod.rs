//! Command-line harness: catalog listing, seeded verification runs with JSON
//! reports, and worked examples.
//!
//! Exit codes: 0 when every case passes, 1 when any case fails or errors,
//! 2 for usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::cocycles::CaseResult;
use crate::error::{Error, Result};
use crate::maps::{catalog_get, catalog_listing, sample_params, MapRef};
use crate::numkernel::{Rational, Scalar, DEFAULT_ORDER};
use crate::operators::{build_l_flat, LocalDiffOp};

mod suites;

use suites::{Ctx, NamedMap};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "lift")]
    Lift,
    #[serde(rename = "cocycle_C")]
    CocycleC,
    #[serde(rename = "operator_L")]
    OperatorL,
    #[serde(rename = "degree_lowering")]
    DegreeLowering,
    #[serde(rename = "classical_cocycles")]
    ClassicalCocycles,
    #[serde(rename = "algebra_cocycles")]
    AlgebraCocycles,
    #[serde(rename = "moyal")]
    Moyal,
    #[serde(rename = "consistency")]
    Consistency,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Lift,
        Suite::CocycleC,
        Suite::OperatorL,
        Suite::DegreeLowering,
        Suite::ClassicalCocycles,
        Suite::AlgebraCocycles,
        Suite::Moyal,
        Suite::Consistency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lift => "lift",
            Suite::CocycleC => "cocycle_C",
            Suite::OperatorL => "operator_L",
            Suite::DegreeLowering => "degree_lowering",
            Suite::ClassicalCocycles => "classical_cocycles",
            Suite::AlgebraCocycles => "algebra_cocycles",
            Suite::Moyal => "moyal",
            Suite::Consistency => "consistency",
        }
    }

    fn stream(self) -> u64 {
        1 + Suite::ALL.iter().position(|s| *s == self).expect("listed suite") as u64
    }
}

fn parse_suites(text: &str) -> std::result::Result<Vec<Suite>, String> {
    if text == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    Suite::ALL
        .into_iter()
        .find(|s| s.name() == text)
        .map(|s| vec![s])
        .ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
            format!("unknown suite `{text}` (expected one of: all, {})", names.join(", "))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub name: String,
    #[serde(default = "empty_object")]
    pub params: Json,
}

fn empty_object() -> Json {
    json!({})
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dim: usize,
    pub jet_order: usize,
    pub backend: Backend,
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub maps: Vec<MapSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            dim: 1,
            jet_order: DEFAULT_ORDER,
            backend: Backend::Exact,
            tol: 1e-8,
            samples: 5,
            seed: 0,
            suites: Vec::new(),
            maps: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(1..=3).contains(&self.dim) {
            return Err(format!("dim must be 1, 2 or 3 (got {})", self.dim));
        }
        if self.jet_order < 4 {
            return Err(format!("jet order must be at least 4 (got {})", self.jet_order));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(format!("tol must be positive (got {})", self.tol));
        }
        if self.samples == 0 {
            return Err("samples must be positive".into());
        }
        if self.suites.is_empty() {
            return Err("no suites selected (use --suite NAME, repeatable, or --suite all)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "jetcocycle", version, about = "Jet-level verification of cocycles on diffeomorphism groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the map catalog with parameter schemas and singular loci.
    List,
    /// Run verification suites and report residuals.
    Verify(VerifyArgs),
    /// Print the coefficient table of L(f) for a worked example.
    Demo {
        #[arg(value_enum)]
        name: Demo,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Scenario file (JSON); fields present in it override the flags.
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Jet order used where a suite has a free truncation order.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    /// Relative tolerance on the float backend.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Sample points per case family.
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Suite to run (repeatable); `all` selects every suite.
    #[arg(long = "suite", value_parser = parse_suites)]
    suites: Vec<Vec<Suite>>,
    /// Write the full JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    FlatCubic,
    Affine,
    Moebius,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::List => {
            print!("{}", list_text());
            0
        }
        Command::Demo { name } => match demo_text(name) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Command::Verify(args) => verify(args),
    }
}

pub fn list_text() -> String {
    let mut out = String::new();
    for info in catalog_listing() {
        let _ = writeln!(out, "{}", info.name);
        let _ = writeln!(out, "  params:   {}", info.params);
        let _ = writeln!(out, "  singular: {}", info.singular_locus);
        let _ = writeln!(out, "  backends: {}", if info.exact { "exact, float" } else { "float" });
    }
    out
}

fn config_from(args: &VerifyArgs) -> std::result::Result<ScenarioConfig, String> {
    let flags = ScenarioConfig {
        dim: args.dim,
        jet_order: args.order,
        backend: args.backend,
        tol: args.tol,
        samples: args.samples,
        seed: args.seed,
        suites: dedup(args.suites.iter().flatten().copied()),
        maps: Vec::new(),
    };
    let Some(path) = &args.scenario else {
        return Ok(flags);
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: Json = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let Json::Object(overrides) = file else {
        return Err(format!("{}: scenario must be a JSON object", path.display()));
    };
    let mut merged = serde_json::to_value(&flags).map_err(|e| e.to_string())?;
    let obj = merged.as_object_mut().expect("config serializes to an object");
    for (k, v) in overrides {
        obj.insert(k, v);
    }
    let mut config: ScenarioConfig = serde_json::from_value(merged).map_err(|e| format!("{}: {e}", path.display()))?;
    config.suites = dedup(config.suites.iter().copied());
    Ok(config)
}

fn dedup(it: impl Iterator<Item = Suite>) -> Vec<Suite> {
    let mut out: Vec<Suite> = Vec::new();
    for s in it {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn verify(args: VerifyArgs) -> i32 {
    let config = match config_from(&args).and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let outcome = match config.backend {
        Backend::Exact => execute::<Rational>(&config),
        Backend::Float => execute::<f64>(&config),
    };
    let run = match outcome {
        Ok(run) => run,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    print!("{}", summary_text(&run));
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&run.report).expect("report serializes") + "\n";
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 2;
        }
    }
    if run.all_pass {
        0
    } else {
        1
    }
}

/// One verification run: the JSON report plus what the text summary needs.
pub struct Run {
    pub report: Json,
    pub all_pass: bool,
    per_suite: Vec<(Suite, usize, usize, f64)>,
    failures: Vec<SuiteCase>,
}

#[derive(Debug, Clone, Serialize)]
struct SuiteCase {
    suite: Suite,
    #[serde(flatten)]
    case: CaseResult,
}

fn resolve_maps<S: Scalar>(config: &ScenarioConfig) -> Result<Vec<NamedMap<S>>> {
    let specs: Vec<MapSpec> = if config.maps.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        catalog_listing()
            .into_iter()
            .filter(|info| info.exact || !S::EXACT)
            .filter(|info| info.name != "moebius" || config.dim == 1)
            .map(|info| Ok(MapSpec { name: info.name.to_string(), params: sample_params(&mut rng, info.name, config.dim)? }))
            .collect::<Result<_>>()?
    } else {
        config.maps.clone()
    };
    specs
        .into_iter()
        .map(|spec| {
            let map: MapRef<S> = catalog_get(&spec.name, &spec.params, config.dim)?;
            Ok(NamedMap { name: spec.name, params: spec.params, map })
        })
        .collect()
}

/// Runs every configured suite; fails only on configuration problems
/// (unknown or invalid maps). Case-level failures are recorded in the report.
pub fn execute<S: Scalar>(config: &ScenarioConfig) -> Result<Run> {
    let maps = resolve_maps::<S>(config)?;
    let started = Instant::now();
    let mut records: Vec<SuiteCase> = Vec::new();
    let mut timing = serde_json::Map::new();
    for &suite in &config.suites {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(suite.stream());
        let mut ctx = Ctx { dim: config.dim, order: config.jet_order, tol: config.tol, samples: config.samples, maps: &maps, rng };
        let cases = suites::build(suite, &mut ctx);
        let results: Vec<SuiteCase> = cases
            .into_par_iter()
            .map(|c| {
                let outcome = (c.run)();
                SuiteCase { suite: c.suite, case: CaseResult::from_outcome(c.case_id, c.maps, c.point, outcome) }
            })
            .collect();
        records.extend(results);
        timing.insert(suite.name().to_string(), json!(t0.elapsed().as_secs_f64() * 1e3));
    }
    timing.insert("total".into(), json!(started.elapsed().as_secs_f64() * 1e3));

    let mut per_suite = Vec::new();
    let mut summary_suites = serde_json::Map::new();
    for &suite in &config.suites {
        let mine: Vec<&SuiteCase> = records.iter().filter(|r| r.suite == suite).collect();
        let passed = mine.iter().filter(|r| r.case.pass).count();
        let max_res = mine.iter().filter_map(|r| r.case.residual).fold(0.0, f64::max);
        summary_suites.insert(
            suite.name().into(),
            json!({ "cases": mine.len(), "passed": passed, "failed": mine.len() - passed, "max_residual": max_res }),
        );
        per_suite.push((suite, mine.len(), passed, max_res));
    }
    let passed = records.iter().filter(|r| r.case.pass).count();
    let all_pass = passed == records.len();
    let mut echo = config.clone();
    echo.maps = maps.iter().map(|m| MapSpec { name: m.name.clone(), params: m.params.clone() }).collect();
    let failures: Vec<SuiteCase> = records.iter().filter(|r| !r.case.pass).cloned().collect();
    let report = json!({
        "schema": SCHEMA_VERSION,
        "config": echo,
        "cases": records,
        "summary": {
            "cases": records.len(),
            "passed": passed,
            "failed": records.len() - passed,
            "pass": all_pass,
            "suites": summary_suites,
        },
        "timing": { "milliseconds": timing },
    });
    Ok(Run { report, all_pass, per_suite, failures })
}

fn summary_text(run: &Run) -> String {
    let mut out = String::new();
    for (suite, total, passed, max_res) in &run.per_suite {
        let _ = writeln!(out, "{:<20} {passed:>5}/{total:<5} max residual {max_res:.3e}", suite.name());
    }
    for f in run.failures.iter().take(10) {
        let detail = f.case.error.clone().unwrap_or_else(|| format!("residual {:.3e}", f.case.residual.unwrap_or(f64::NAN)));
        let _ = writeln!(out, "  FAIL {}/{} [{}] at ({}): {detail}", f.suite.name(), f.case.case_id, f.case.maps.join(", "), f.case.point.join(", "));
    }
    if run.failures.len() > 10 {
        let _ = writeln!(out, "  ... {} more failures", run.failures.len() - 10);
    }
    let _ = writeln!(out, "{}", if run.all_pass { "PASS" } else { "FAIL" });
    out
}

fn axis_name(axis: usize, n: usize) -> String {
    let (base, i) = if axis < n { ("x", axis) } else { ("xi", axis - n) };
    if n == 1 {
        base.to_string()
    } else {
        format!("{base}{}", i + 1)
    }
}

fn monomial_name(exps: &[u8], n: usize) -> String {
    let parts: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(a, &e)| if e == 1 { format!("d_{}", axis_name(a, n)) } else { format!("d_{}^{e}", axis_name(a, n)) })
        .collect();
    parts.join(" ")
}

/// Coefficient table of `L(f)` over a base point, each coefficient written as
/// `a + b*xi` (coefficients are affine in the fiber for `n = 1`).
fn fiber_table(f: &MapRef<Rational>, x: Rational) -> Result<Vec<(String, String)>> {
    let at = |xi: i64| -> Result<LocalDiffOp<Rational>> { build_l_flat(f, &[x.clone(), Rational::from_i64(xi)]) };
    let (l0, l1, l2) = (at(0)?, at(1)?, at(2)?);
    let mut keys: Vec<Vec<u8>> = l0.terms().chain(l1.terms()).map(|(k, _)| k.to_vec()).collect();
    keys.sort();
    keys.dedup();
    let mut rows = Vec::new();
    for k in keys {
        let (c0, c1, c2) = (l0.coeff(&k), l1.coeff(&k), l2.coeff(&k));
        let slope = c1.clone() - c0.clone();
        if c2 != c0.clone() + slope.clone() * Rational::from_i64(2) {
            return Err(Error::Domain("coefficient is not affine in the fiber".into()));
        }
        let text = match (num::Zero::is_zero(&c0), num::Zero::is_zero(&slope)) {
            (true, true) => continue,
            (false, true) => format!("{c0}"),
            (true, false) => format!("{slope}*xi"),
            (false, false) => format!("{c0} + {slope}*xi"),
        };
        rows.push((monomial_name(&k, 1), text));
    }
    Ok(rows)
}

pub fn demo_text(demo: Demo) -> Result<String> {
    let (title, name, params, x) = match demo {
        Demo::FlatCubic => ("f(x) = x + x^3", "polynomial_perturbation", json!({"eps": 1}), Rational::from_i64(0)),
        Demo::Affine => ("f(x) = 3x - 2", "affine", json!({"a": 3, "b": -2}), Rational::from_i64(1)),
        Demo::Moebius => ("f(x) = x / (x + 1)", "moebius", json!({"a": 1, "b": 0, "c": 1, "d": 1}), Rational::from_i64(1)),
    };
    let f: MapRef<Rational> = catalog_get(name, &params, 1)?;
    let rows = fiber_table(&f, x.clone())?;
    let mut out = String::new();
    let _ = writeln!(out, "L(f) for {title} at x = {x} (flat connection, exact arithmetic)");
    if rows.is_empty() {
        let _ = writeln!(out, "  zero operator");
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        let _ = writeln!(out, "  {k:<width$}  {v}");
    }
    Ok(out)
}

/// Case counts per suite keyed by name, for callers that only need totals.
pub fn suite_counts(report: &Json) -> BTreeMap<String, (u64, u64)> {
    let mut out = BTreeMap::new();
    if let Some(Json::Object(m)) = report.pointer("/summary/suites") {
        for (k, v) in m {
            let total = v["cases"].as_u64().unwrap_or(0);
            let passed = v["passed"].as_u64().unwrap_or(0);
            out.insert(k.clone(), (total, passed));
        }
    }
    out
}
