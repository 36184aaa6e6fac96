//! Command-line front end. Data goes to stdout (or `--out`), diagnostics to
//! stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bellstate::BellDiagonalState;
use crate::engine::{self, Tolerances};
use crate::error::Error;
use crate::maps::{apply_map, MapKind};
use crate::oracle::{self, CrossCheckReport};
use crate::protocols::{self, ProtocolSchedule, UnitaryParams};
use crate::report::{self, fmt_num, BASIN_HEADER};
use crate::sampler::{self, SweepConfig, DEFAULT_GRID, DEFAULT_SAMPLES};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const DEGENERATE: i32 = 3;
    pub const IO: i32 = 4;
}

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "PURIFY_THREADS";

/// Residual above which `oracle-check` fails.
pub const ORACLE_RESIDUAL_TOL: f64 = 1e-10;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 check failure, 2 input error, 3 degenerate round, 4 I/O error.
Set PURIFY_THREADS to override the number of worker threads used by sweep and basin.
Any verb accepts --config PATH: a plain-text file of key=value lines (# comments allowed)
whose keys are long flag names; flags given on the command line win.";

#[derive(Debug, Parser)]
#[command(name = "purify", version, about = "Recurrence entanglement purification on Bell-diagonal states", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply one closed-form round and print the new state and p.
    Step(StepArgs),
    /// Print a trajectory as CSV.
    Run(RunArgs),
    /// Monte Carlo sweep over initial fidelity.
    Sweep(SweepArgs),
    /// Classify a simplex grid by attractor.
    Basin(BasinArgs),
    /// Compare the closed-form maps with the circuit simulation.
    #[command(name = "oracle-check")]
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// key=value file supplying defaults for the other flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StepArgs {
    #[arg(long, value_parser = parse_map)]
    map: MapKind,
    /// Bell weights a,b,c,d.
    #[arg(long, allow_hyphen_values = true)]
    state: String,
    #[command(flatten)]
    _config: ConfigArg,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// ibm, oxford, qpa, xh, tm1, tm2 or custom.
    #[arg(long)]
    protocol: String,
    #[arg(long, allow_hyphen_values = true)]
    state: String,
    #[arg(long)]
    rounds: usize,
    /// Angles for `custom`: theta:phi pairs separated by commas (e.g. pi/2:pi/2,pi/2:0).
    #[arg(long, allow_hyphen_values = true)]
    theta_phi: Option<String>,
    #[command(flatten)]
    _config: ConfigArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated protocol names.
    #[arg(long)]
    protocols: String,
    /// Inclusive START:STOP:STEP grid of initial fidelities.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit every round rather than only the last.
    #[arg(long)]
    all_rounds: bool,
    /// Angles when `custom` is among the protocols.
    #[arg(long, allow_hyphen_values = true)]
    theta_phi: Option<String>,
    #[command(flatten)]
    _config: ConfigArg,
}

#[derive(Debug, Args)]
struct BasinArgs {
    #[arg(long, value_parser = parse_map)]
    map: MapKind,
    /// Simplex grid resolution K (points are multiples of 1/K).
    #[arg(long, default_value_t = 20)]
    resolution: usize,
    /// Tolerance for every class (defaults: 1e-6 fixed points, 1e-3 period 2).
    #[arg(long)]
    tol: Option<f64>,
    /// Period-2 tolerance; overrides --tol for that class.
    #[arg(long)]
    cycle_tol: Option<f64>,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    _config: ConfigArg,
}

#[derive(Debug, Args)]
struct OracleCheckArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    _config: ConfigArg,
}

fn parse_map(s: &str) -> Result<MapKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of one CLI invocation, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: exit::INPUT, message: message.into() }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Self { code: exit::IO, message: format!("cannot write {}: {e}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DegenerateRound { .. } => exit::DEGENERATE,
            _ => exit::INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self { code: exit::IO, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name), runs the verb and returns
/// the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(f) => return report_failure(f, err),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::SUCCESS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Step(a) => step(a, out),
        Command::Run(a) => run(a, out, err),
        Command::Sweep(a) => sweep(a, out, err),
        Command::Basin(a) => basin(a, out),
        Command::OracleCheck(a) => oracle_check(a, out, err),
    });
    match result {
        Ok(code) => code,
        Err(f) => report_failure(f, err),
    }
}

fn report_failure(f: Failure, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "error: {}", f.message);
    f.code
}

/// Applies the thread-count override to rayon's global pool. A pool that
/// is already running (e.g. inside tests) keeps its size.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::input(format!("{THREADS_ENV}={raw} is not a thread count")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Splices `--config PATH` contents into the argument list as flags, keeping
/// any flag already given explicitly.
fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let Some(pos) = strs.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = match strs[pos].strip_prefix("--config=") {
        Some(p) => p.to_owned(),
        None => strs.get(pos + 1).cloned().ok_or_else(|| Failure::input("--config needs a path"))?,
    };
    let text = fs::read_to_string(&path).map_err(|e| Failure::input(format!("cannot read config {path}: {e}")))?;
    let given = |key: &str| {
        let flag = format!("--{key}");
        strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("{path}:{}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" || given(&key) {
            continue;
        }
        match value {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            _ => extra.push(format!("--{key}={value}")),
        }
    }
    let mut out = args;
    out.extend(extra.into_iter().map(OsString::from));
    Ok(out)
}

fn parse_state(raw: &str) -> CliResult<BellDiagonalState> {
    raw.parse().map_err(|e: Error| Failure::input(format!("--state: {e}")))
}

fn parse_angle(raw: &str) -> CliResult<f64> {
    let raw = raw.trim();
    let bad = || Failure::input(format!("--theta-phi: cannot parse angle `{raw}`"));
    let lower = raw.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("pi") {
        let pi = std::f64::consts::PI;
        return match rest.strip_prefix('/') {
            None if rest.is_empty() => Ok(pi),
            Some(den) => den.parse::<f64>().map(|d| pi / d).map_err(|_| bad()),
            None => Err(bad()),
        };
    }
    if let Some(rest) = lower.strip_prefix("-pi") {
        return parse_angle(&format!("pi{rest}")).map(|x| -x);
    }
    raw.parse().map_err(|_| bad())
}

fn parse_theta_phi(raw: &str) -> CliResult<Vec<UnitaryParams>> {
    raw.split(',')
        .map(|pair| {
            let (t, p) = pair
                .split_once(':')
                .ok_or_else(|| Failure::input(format!("--theta-phi: expected theta:phi, got `{pair}`")))?;
            Ok(UnitaryParams::new(parse_angle(t)?, parse_angle(p)?)?)
        })
        .collect()
}

fn resolve_protocol(name: &str, theta_phi: Option<&str>) -> CliResult<ProtocolSchedule> {
    if name.eq_ignore_ascii_case("custom") {
        let raw = theta_phi.ok_or_else(|| Failure::input("protocol custom needs --theta-phi"))?;
        Ok(protocols::custom(parse_theta_phi(raw)?)?)
    } else {
        Ok(ProtocolSchedule::named(name)?)
    }
}

/// Writes `bytes` to `path`, or to `out` when no path is given.
fn emit(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::io(p, e)),
        None => out.write_all(bytes).map_err(Failure::from),
    }
}

fn step(a: StepArgs, out: &mut dyn Write) -> CliResult<i32> {
    let s = parse_state(&a.state)?;
    let r = apply_map(a.map, &s);
    writeln!(out, "a,b,c,d,p")?;
    writeln!(out, "{},{}", r.state, fmt_num(r.p))?;
    Ok(exit::SUCCESS)
}

fn run(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let schedule = resolve_protocol(&a.protocol, a.theta_phi.as_deref())?;
    if a.theta_phi.is_some() && schedule.name() != "custom" {
        return Err(Failure::input("--theta-phi only applies to the custom protocol"));
    }
    let s0 = parse_state(&a.state)?;
    if a.rounds == 0 {
        return Err(Failure::input("--rounds must be at least 1"));
    }
    let traj = engine::run(&schedule, s0, a.rounds)?;
    for rec in &traj {
        if let Some(op) = rec.relabel {
            writeln!(err, "# round {}: relabel {op} (not charged in yield)", rec.r)?;
        }
        if schedule.name() == "custom" && rec.r > 0 {
            writeln!(err, "# round {}: max_offdiag {}", rec.r, fmt_num(rec.max_offdiag))?;
        }
    }
    let mut buf = Vec::new();
    report::write_trajectory(&mut buf, &traj)?;
    out.write_all(&buf)?;
    Ok(exit::SUCCESS)
}

fn sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let (start, stop, step) = match &a.grid {
        Some(g) => {
            let parts: Vec<&str> = g.split(':').collect();
            let nums: Vec<f64> = parts
                .iter()
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::input(format!("--grid: cannot parse `{g}`")))?;
            match nums[..] {
                [start, stop, step] => (start, stop, step),
                _ => return Err(Failure::input("--grid expects START:STOP:STEP")),
            }
        }
        None => DEFAULT_GRID,
    };
    let grid = sampler::fidelity_grid(start, stop, step)?;
    let protocols = a
        .protocols
        .split(',')
        .map(|name| resolve_protocol(name.trim(), a.theta_phi.as_deref()))
        .collect::<CliResult<Vec<_>>>()?;
    let cfg = SweepConfig {
        protocols,
        fidelity_grid: grid,
        samples_per_point: a.samples,
        rounds: a.rounds,
        seed: a.seed,
        all_rounds: a.all_rounds,
    };
    cfg.validate()?;
    let rows = sampler::sweep(&cfg)?;

    let mut buf = Vec::new();
    writeln!(
        buf,
        "# purify sweep protocols={} grid={}:{}:{} samples={} rounds={} seed={} all_rounds={} sampling=a0-fixed,bcd-flat-simplex{}",
        a.protocols,
        fmt_num(start),
        fmt_num(stop),
        fmt_num(step),
        a.samples,
        a.rounds,
        a.seed,
        a.all_rounds,
        a.theta_phi.as_deref().map(|t| format!(" theta_phi={t}")).unwrap_or_default()
    )?;
    report::write_sweep(&mut buf, &rows)?;
    emit(a.out.as_deref(), &buf, out)?;
    writeln!(err, "# sweep seed {}: {} rows", a.seed, rows.len())?;
    Ok(exit::SUCCESS)
}

fn basin(a: BasinArgs, out: &mut dyn Write) -> CliResult<i32> {
    if a.resolution < 2 {
        return Err(Failure::input("--resolution must be at least 2"));
    }
    if a.max_iter < 4 {
        return Err(Failure::input("--max-iter must be at least 4"));
    }
    let defaults = Tolerances::default();
    let fixed = a.tol.unwrap_or(defaults.fixed);
    let cycle = a.cycle_tol.or(a.tol).unwrap_or(defaults.cycle);
    if !(fixed > 0.0) || !(cycle > 0.0) {
        return Err(Failure::input("tolerances must be positive"));
    }
    let tols = Tolerances { fixed, cycle };
    let points = engine::basin_scan(a.map, a.resolution, tols, a.max_iter);

    let mut buf = Vec::new();
    writeln!(
        buf,
        "# purify basin map={} resolution={} tol={} cycle_tol={} max_iter={}",
        a.map.name(),
        a.resolution,
        fmt_num(fixed),
        fmt_num(cycle),
        a.max_iter
    )?;
    writeln!(buf, "{BASIN_HEADER}")?;
    for p in &points {
        writeln!(buf, "{},{}", p.state, p.class)?;
    }
    emit(a.out.as_deref(), &buf, out)?;
    Ok(exit::SUCCESS)
}

fn oracle_check(a: OracleCheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    if a.trials == 0 {
        return Err(Failure::input("--trials must be at least 1"));
    }
    let report = oracle::cross_check(a.trials, a.seed, apply_map)?;
    Ok(report_cross_check(&report, a.seed, out, err))
}

/// Prints a cross-check summary and returns 0 when the residual is within
/// [`ORACLE_RESIDUAL_TOL`], 1 otherwise.
pub fn report_cross_check(report: &CrossCheckReport, seed: u64, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let _ = writeln!(
        out,
        "trials={} seed={} max_residual={:e}",
        report.trials, seed, report.max_residual
    );
    if report.max_residual < ORACLE_RESIDUAL_TOL {
        exit::SUCCESS
    } else {
        let _ = writeln!(
            err,
            "residual {:e} exceeds {:e} for map {} at state {}",
            report.max_residual, ORACLE_RESIDUAL_TOL, report.worst_kind, report.worst_state
        );
        exit::CHECK_FAILED
    }
}
