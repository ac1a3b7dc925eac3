//! Logic behind the `coopcrib` binary: spec files in, artifacts out.
//!
//! Every numeric setting lives in the JSON spec given by `--input`; only the
//! seed and the output format can be overridden from the command line.
//! Exit codes: 0 success, 1 a verification check failed, 2 bad input,
//! 3 a resource cap was hit.

use crate::checks;
use crate::fixtures;
use crate::gaussian::{self, gaussian_frontier, inner_polytope, outer_bound, GaussianConfig, GaussianError, SweepGrid};
use crate::geometry::{Frontier, RatePoint};
use crate::info::{InfoError, JointPmf};
use crate::regions::{
    self, bounds_to_polytope, check_duality_corners, eval_state_cribbing_no_action, eval_theorem1, eval_theorem2,
    eval_theorem3, eval_theorem4, eval_theorem5, theorem1_via_common_message, Causality, CribCase, LinkCapacities,
    RegionError, SrSpec,
};
use crate::search::{achievable_frontier, Channel, FactorizedDist, Pattern, Problem, SearchConfig, SearchError};
use crate::sim::{estimate_error, SimConfig, SimError};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("{0}")]
    Io(String),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::ResourceCap(_) => 3,
            _ => 2,
        }
    }
}

impl From<InfoError> for CliError {
    fn from(e: InfoError) -> Self {
        match e {
            InfoError::TooLarge(..) => CliError::ResourceCap(e.to_string()),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<RegionError> for CliError {
    fn from(e: RegionError) -> Self {
        match e {
            RegionError::Info(i) => i.into(),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::CapExceeded(_) => CliError::ResourceCap(e.to_string()),
            SearchError::Info(i) => i.into(),
            SearchError::Region(r) => r.into(),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::SizeOverflow(_) => CliError::ResourceCap(e.to_string()),
            SimError::Search(s) => s.into(),
            SimError::Info(i) => i.into(),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<GaussianError> for CliError {
    fn from(e: GaussianError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Parser)]
#[command(
    name = "coopcrib",
    version,
    about = "Rate regions for multiple-access channels with cooperation and cribbing"
)]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// JSON spec file
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory (created if missing)
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Overrides every seed in the spec
    #[arg(long)]
    pub seed: Option<u64>,
    /// Leaves the generation timestamp out of SVG output
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inequality system of one region at one distribution
    Region(Common),
    /// Achievable frontier over a factorized family
    Frontier(Common),
    /// Gaussian sweep with inner and outer bounds
    Gaussian(Common),
    /// Block error rate of the random coding scheme
    Simulate(Common),
    /// Corner points of a channel distribution and its source-coding dual
    Duality(Common),
    /// Runs the built-in consistency checks
    Verify(Common),
}

/// Region family selected in a region spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    CribA,
    CribB,
    CommonMessage,
    OneSided,
    SourceCoding,
    StateStrictlyCausal,
    StateCausal,
    ActionStrictlyCausal,
    ActionCausal,
    StateNoAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub region: RegionKind,
    pub joint: JointPmf,
    #[serde(default)]
    pub links: LinkCapacities,
    /// Source and distortion targets, for `source_coding` only.
    #[serde(default)]
    pub source_coding: Option<SrSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSpec {
    pub pattern: Pattern,
    pub problem: Problem,
    #[serde(default)]
    pub links: LinkCapacities,
    #[serde(default)]
    pub search: SearchConfig,
}

fn default_rho_steps() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    /// Sweep parameters (β1, β2, ρ) in `base` are ignored.
    pub base: GaussianConfig,
    pub grid: SweepGrid,
    /// Number of ρ steps for the outer bound hull.
    #[serde(default = "default_rho_steps")]
    pub outer_rho_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSpec {
    pub distribution: FactorizedDist,
    pub channel: Channel,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualitySpec {
    pub mac: JointPmf,
    pub source_coding: JointPmf,
    #[serde(default)]
    pub c12: f64,
}

fn read_spec<T: serde::de::DeserializeOwned>(path: &Option<PathBuf>) -> Result<T> {
    let path = path.as_ref().ok_or_else(|| CliError::Invalid("--input is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn write(out: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let p = out.join(name);
    fs::write(&p, contents).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    Ok(p)
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn timestamp(c: &Common) -> Option<String> {
    if c.reproducible {
        return None;
    }
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Some(format!("unix time {secs}"))
}

/// Evaluates the region named in `spec`.
pub fn region_json(spec: &RegionSpec) -> Result<String> {
    let p = &spec.joint;
    let l = spec.links;
    let b = match spec.region {
        RegionKind::CribA => eval_theorem1(p, l, CribCase::A)?,
        RegionKind::CribB => eval_theorem1(p, l, CribCase::B)?,
        RegionKind::CommonMessage => theorem1_via_common_message(p, l)?,
        RegionKind::OneSided => eval_theorem2(p, l.c12)?,
        RegionKind::SourceCoding => {
            let sr = spec
                .source_coding
                .as_ref()
                .ok_or_else(|| CliError::Invalid("field `source_coding` is required for this region".into()))?;
            return Ok(json(&eval_theorem3(sr, p, l.c12)?));
        }
        RegionKind::StateStrictlyCausal => eval_theorem4(p, l, Causality::StrictlyCausal)?,
        RegionKind::StateCausal => eval_theorem4(p, l, Causality::Causal)?,
        RegionKind::ActionStrictlyCausal => eval_theorem5(p, l.c12, Causality::StrictlyCausal)?,
        RegionKind::ActionCausal => eval_theorem5(p, l.c12, Causality::Causal)?,
        RegionKind::StateNoAction => eval_state_cribbing_no_action(p)?,
    };
    Ok(json(&b))
}

fn region(c: &Common) -> Result<Vec<PathBuf>> {
    let spec: RegionSpec = read_spec(&c.input)?;
    let text = region_json(&spec)?;
    let out = match c.format {
        Format::Json => write(&c.out, "region.json", &text)?,
        Format::Csv | Format::Svg => {
            let b: regions::RegionBounds = serde_json::from_str(&text)
                .map_err(|_| CliError::Invalid("only upper-bound regions have a polytope".into()))?;
            let poly = bounds_to_polytope(&b)?;
            if c.format == Format::Csv {
                write(&c.out, "region.csv", &poly.to_csv_string())?
            } else {
                let svg = gaussian::frontier_svg(&[("region", &poly.vertices)], timestamp(c).as_deref());
                write(&c.out, "region.svg", &svg)?
            }
        }
    };
    Ok(vec![out])
}

/// Frontier vertices with the distribution behind each of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierReport {
    pub frontier: Frontier<FactorizedDist>,
    pub max_sum_rate: f64,
}

fn frontier(c: &Common) -> Result<Vec<PathBuf>> {
    let mut spec: FrontierSpec = read_spec(&c.input)?;
    if let Some(s) = c.seed {
        spec.search.seed = s;
    }
    let f = achievable_frontier(spec.pattern, &spec.problem, spec.links, &spec.search)?;
    let out = match c.format {
        Format::Json => {
            write(&c.out, "frontier.json", &json(&FrontierReport { max_sum_rate: f.max_sum(), frontier: f }))?
        }
        Format::Csv => write(&c.out, "frontier.csv", &f.to_csv_string())?,
        Format::Svg => write(
            &c.out,
            "frontier.svg",
            &gaussian::frontier_svg(&[("achievable", &f.vertices)], timestamp(c).as_deref()),
        )?,
    };
    Ok(vec![out])
}

/// Sweep summary written next to the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianReport {
    pub achievable: Frontier<usize>,
    pub inner: Vec<RatePoint>,
    pub outer: Vec<RatePoint>,
    pub max_sum_rate: f64,
    pub outer_max_sum_rate: f64,
    pub max_std_error: f64,
    pub skipped: Vec<(f64, f64, f64)>,
}

fn gaussian_cmd(c: &Common) -> Result<Vec<PathBuf>> {
    let mut spec: GaussianSpec = read_spec(&c.input)?;
    if let Some(s) = c.seed {
        spec.base.seed = s;
    }
    let b = &spec.base;
    let g = gaussian_frontier(b, &spec.grid)?;
    let steps = spec.outer_rho_steps.max(1);
    let rho: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let outer = outer_bound(b.p1, b.p2, b.noise_n, &rho)?;
    let inner = inner_polytope(b.p1, b.p2, b.noise_n)?;
    let mut table = Vec::new();
    g.write_sweep_csv(&mut table).map_err(|e| CliError::Io(e.to_string()))?;
    let mut paths = vec![write(&c.out, "sweep.csv", &String::from_utf8(table).expect("utf-8"))?];
    let svg = gaussian::frontier_svg(
        &[("inner", &inner.vertices), ("achievable", &g.frontier.vertices), ("outer", &outer.vertices)],
        timestamp(c).as_deref(),
    );
    paths.push(write(&c.out, "frontier.svg", &svg)?);
    match c.format {
        Format::Json => {
            let r = GaussianReport {
                max_sum_rate: g.max_sum_rate(),
                outer_max_sum_rate: outer.max_sum(),
                max_std_error: g.max_std_error(),
                inner: inner.vertices,
                outer: outer.vertices,
                skipped: g.skipped,
                achievable: g.frontier,
            };
            paths.push(write(&c.out, "gaussian.json", &json(&r))?);
        }
        Format::Csv => paths.push(write(&c.out, "frontier.csv", &g.frontier.to_csv_string())?),
        Format::Svg => {}
    }
    Ok(paths)
}

fn simulate(c: &Common) -> Result<Vec<PathBuf>> {
    let mut spec: SimulateSpec = read_spec(&c.input)?;
    if let Some(s) = c.seed {
        spec.config.seed = s;
    }
    let e = estimate_error(&spec.distribution, &spec.channel, &spec.config)?;
    Ok(vec![write(&c.out, "simulation.json", &json(&e))?])
}

fn duality(c: &Common) -> Result<Vec<PathBuf>> {
    let spec: DualitySpec = read_spec(&c.input)?;
    let r = check_duality_corners(&spec.mac, &spec.source_coding, spec.c12)?;
    Ok(vec![write(&c.out, "duality.json", &json(&r))?])
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, r: std::result::Result<(bool, String), String>) -> CheckResult {
    match r {
        Ok((passed, detail)) => CheckResult { name: name.into(), passed, detail },
        Err(e) => CheckResult { name: name.into(), passed: false, detail: e },
    }
}

fn gap_check(
    name: &str,
    tol: f64,
    f: impl FnOnce() -> std::result::Result<f64, Box<dyn std::error::Error + Send + Sync>>,
) -> CheckResult {
    check(name, f().map(|g| (g < tol, format!("max gap {g:.3e}"))).map_err(|e| e.to_string()))
}

/// Runs the built-in consistency checks on the shipped fixtures.
pub fn run_checks(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(check("clean-parallel region", {
        let problem = fixtures::two_sided(fixtures::clean_parallel());
        let cfg = SearchConfig::default().with_card("U", 1);
        FactorizedDist::template(Pattern::Thm1A, &problem, &cfg)
            .map_err(|e| e.to_string())
            .and_then(|fd| crate::search::assemble(&fd).map_err(|e| e.to_string()))
            .and_then(|p| eval_theorem1(&p, LinkCapacities::default(), CribCase::A).map_err(|e| e.to_string()))
            .map(|b| {
                let r = b.rhs();
                let ok = r.iter().zip([1.0, 1.0, 2.0, 2.0]).all(|(a, e)| (a - e).abs() < 1e-12);
                (ok, format!("{r:?}"))
            })
    }));
    out.push(gap_check("common-message form, independent inputs", 1e-12, || {
        checks::common_message_gap(CribCase::A, 25, seed)
    }));
    out.push(gap_check("common-message form, crib-dependent input", 1e-12, || {
        checks::common_message_gap(CribCase::B, 25, seed ^ 1)
    }));
    out.push(gap_check("single state letter", 1e-12, || checks::single_state_gap(25, seed ^ 2)));
    out.push(gap_check("single action letter", 1e-12, || checks::single_action_gap(25, seed ^ 3)));
    out.push(gap_check("source-coding duality", 1e-12, || checks::duality_gap(25, seed ^ 4)));
    out.push(check("link monotonicity", {
        let problem = fixtures::two_sided(fixtures::and_multiplier());
        let cfg = SearchConfig { grid_steps: 2, ..Default::default() }.with_card("U", 2);
        let lo = achievable_frontier(Pattern::Thm1A, &problem, LinkCapacities::default(), &cfg);
        let hi = achievable_frontier(Pattern::Thm1A, &problem, LinkCapacities { c12: 0.2, c21: 0.2 }, &cfg);
        match (lo, hi) {
            (Ok(lo), Ok(hi)) => Ok((hi.contains_frontier(&lo, 1e-9), format!("excess {:.3e}", hi.max_excess(&lo)))),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        }
    }));
    out.push(check("gaussian inner inside outer", {
        let rho: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
        match (inner_polytope(1.0, 1.0, 0.5), outer_bound(1.0, 1.0, 0.5, &rho)) {
            (Ok(i), Ok(o)) => Ok((o.contains_frontier(&i, 1e-12), format!("outer max sum {:.5}", o.max_sum()))),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        }
    }));
    out.push(check("zero rates are error-free", {
        let (fd, ch) = fixtures::parallel_scheme();
        let cfg = SimConfig { n: 64, b_blocks: 3, trials: 20, epsilon: 0.1, rates: Default::default(), seed };
        estimate_error(&fd, &ch, &cfg)
            .map(|e| (e.block_errors == 0, format!("{} errors", e.block_errors)))
            .map_err(|e| e.to_string())
    }));
    out
}

fn verify(c: &Common) -> Result<Vec<PathBuf>> {
    let results = run_checks(c.seed.unwrap_or(0));
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let path = match c.format {
        Format::Json => write(&c.out, "verify.json", &json(&results))?,
        _ => {
            let mut s = String::from("check,passed,detail\n");
            for r in &results {
                s.push_str(&format!("\"{}\",{},\"{}\"\n", r.name, r.passed, r.detail.replace('"', "'")));
            }
            write(&c.out, "verify.csv", &s)?
        }
    };
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(vec![path])
}

/// Executes one parsed command and returns the files it wrote.
pub fn run(args: &Args) -> Result<Vec<PathBuf>> {
    match &args.command {
        Command::Region(c) => region(c),
        Command::Frontier(c) => frontier(c),
        Command::Gaussian(c) => gaussian_cmd(c),
        Command::Simulate(c) => simulate(c),
        Command::Duality(c) => duality(c),
        Command::Verify(c) => verify(c),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
