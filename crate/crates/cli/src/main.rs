//! Command-line front end for the NOMA underlay toolkit.
//!
//! Three subcommands:
//!
//! * `sweep` — evaluate a metric over an interference-limit grid and emit a
//!   deterministic CSV (closed-form/quadrature value, optionally a Monte
//!   Carlo estimate per row);
//! * `validate` — cross-check the closed forms against quadrature and
//!   simulation over a grid, exiting non-zero on disagreement;
//! * `optimize-an` — report the outage-minimizing near-user power fraction
//!   (closed form where it exists, numerical search always).
//!
//! Every long flag can also be given in a `key=value` defaults file passed
//! via `--config`; explicit flags take precedence.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use noma_underlay::analytic::{self, Method, MetricRequest};
use noma_underlay::channel::{AntennaConfig, LinkParams};
use noma_underlay::montecarlo::{simulate, McConfig, Metric, Scheme};
use noma_underlay::oracle::{self, QuadratureSpec};
use noma_underlay::policy::{PowerSplit, Scenario, Thresholds};
use noma_underlay::powalloc;

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "noma-underlay",
    version,
    about = "Sum-rate, outage and power allocation for a two-user downlink \
             NOMA network under underlay spectrum sharing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate metrics over an interference-limit grid and emit CSV.
    Sweep(SweepArgs),
    /// Cross-check closed forms against quadrature and simulation.
    Validate(ValidateArgs),
    /// Find the outage-minimizing near-user power fraction.
    OptimizeAn(OptimizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    IntIcsi,
    IntScsi,
    PowIntIcsi,
    PowIntScsi,
    PowIntOneBit,
}

impl ScenarioArg {
    fn token(self) -> &'static str {
        match self {
            ScenarioArg::IntIcsi => "int-icsi",
            ScenarioArg::IntScsi => "int-scsi",
            ScenarioArg::PowIntIcsi => "pow-int-icsi",
            ScenarioArg::PowIntScsi => "pow-int-scsi",
            ScenarioArg::PowIntOneBit => "pow-int-one-bit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    SumRate,
    Outage,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Noma,
    Oma,
    Both,
}

/// System model flags shared by all subcommands. Everything is optional at
/// the clap layer so that a `--config` file can fill the gaps; hard defaults
/// apply last.
#[derive(Args, Debug, Clone)]
struct SystemArgs {
    /// Power-control regime.
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Near-user antenna count.
    #[arg(long)]
    nn: Option<u32>,
    /// Far-user antenna count.
    #[arg(long)]
    nf: Option<u32>,
    /// Near-user power fraction in (0, 1), or "optimal" to minimize the
    /// NOMA outage at each grid point.
    #[arg(long)]
    an: Option<String>,
    /// Per-user target rate in bits/s/Hz.
    #[arg(long)]
    rate: Option<f64>,
    /// Interference-limit grid in dB, as start:stop:step or a single value.
    #[arg(long = "i-db")]
    i_db: Option<String>,
    /// Peak transmit power in dB (peak-limited regimes).
    #[arg(long = "ppeak-db")]
    ppeak_db: Option<f64>,
    /// Interference-outage tolerance in (0, 1) (statistical-CSI regimes).
    #[arg(long)]
    delta: Option<f64>,
    /// Transmitter-to-near-user distance.
    #[arg(long)]
    dn: Option<f64>,
    /// Transmitter-to-far-user distance.
    #[arg(long)]
    df: Option<f64>,
    /// Transmitter-to-primary-receiver distance.
    #[arg(long)]
    dp: Option<f64>,
    /// Path-loss exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// key=value defaults file; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved settings and exit.
    #[arg(long, hide = true)]
    dump_config: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Metric(s) to evaluate.
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Multiple-access scheme(s) to evaluate.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Monte Carlo trials per row (0 disables the simulation columns).
    #[arg(long)]
    trials: Option<u64>,
    /// Simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path ("-" for stdout).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Monte Carlo trials per check.
    #[arg(long)]
    trials: Option<u64>,
    /// Simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative perturbation applied to the far-user mean gain in the
    /// closed-form route only; a self-test that validation catches model
    /// disagreement.
    #[arg(long, hide = true)]
    perturb_omega_f: Option<f64>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[command(flatten)]
    system: SystemArgs,
}

// ---------------------------------------------------------------------------
// Error plumbing
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    /// Bad invocation: exit code 2.
    Usage(String),
    /// Evaluation failure or failed validation: exit code 1.
    Runtime(String),
}

impl From<noma_underlay::Error> for CliError {
    fn from(e: noma_underlay::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sweep(args) => run_sweep(args),
        Command::Validate(args) => run_validate(args),
        Command::OptimizeAn(args) => run_optimize(args),
    }
}

// ---------------------------------------------------------------------------
// Configuration resolution
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum NearFraction {
    Fixed(f64),
    Optimal,
}

/// Fully resolved system settings (flag > config file > default).
#[derive(Debug, Clone)]
struct Resolved {
    scenario: ScenarioArg,
    nn: u32,
    nf: u32,
    an: NearFraction,
    rate: f64,
    grid_db: Vec<f64>,
    ppeak_db: f64,
    delta: f64,
    dn: f64,
    df: f64,
    dp: f64,
    alpha: f64,
}

fn parse_config_file(path: &PathBuf) -> CliResult<HashMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config {}:{}: expected key=value, got {line:?}",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_ascii_lowercase(), value.trim().to_string());
    }
    Ok(map)
}

fn config_value<T>(
    map: &HashMap<String, String>,
    key: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> CliResult<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => parse(raw)
            .map(Some)
            .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
    }
}

fn parse_f64(raw: &str) -> Result<f64, String> {
    raw.parse::<f64>().map_err(|e| e.to_string())
}

fn parse_u64(raw: &str) -> Result<u64, String> {
    raw.parse::<u64>().map_err(|e| e.to_string())
}

fn parse_u32(raw: &str) -> Result<u32, String> {
    raw.parse::<u32>().map_err(|e| e.to_string())
}

fn parse_enum<T: ValueEnum>(raw: &str) -> Result<T, String> {
    T::from_str(raw, true)
}

fn parse_near_fraction(raw: &str) -> Result<NearFraction, String> {
    if raw.eq_ignore_ascii_case("optimal") {
        return Ok(NearFraction::Optimal);
    }
    let value = parse_f64(raw)?;
    if value > 0.0 && value < 1.0 {
        Ok(NearFraction::Fixed(value))
    } else {
        Err(format!("near-user fraction must lie in (0, 1), got {value}"))
    }
}

/// Parse "start:stop:step" (or a single value) into an inclusive dB grid.
fn parse_grid(raw: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    let (start, stop, step) = match parts.as_slice() {
        [single] => {
            let v = parse_f64(single)?;
            return Ok(vec![v]);
        }
        [start, stop, step] => (parse_f64(start)?, parse_f64(stop)?, parse_f64(step)?),
        _ => return Err(format!("expected start:stop:step or a single value, got {raw:?}")),
    };
    if !step.is_finite() || step <= 0.0 {
        return Err(format!("grid step must be positive, got {step}"));
    }
    if start > stop {
        return Err(format!("empty grid: start {start} exceeds stop {stop}"));
    }
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let value = start + f64::from(k) * step;
        if value > stop + 1e-9 {
            break;
        }
        grid.push(value);
        k += 1;
    }
    Ok(grid)
}

impl SystemArgs {
    fn resolve(&self) -> CliResult<Resolved> {
        let cfg = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => HashMap::new(),
        };
        let scenario = match self.scenario {
            Some(v) => v,
            None => config_value(&cfg, "scenario", parse_enum::<ScenarioArg>)?
                .unwrap_or(ScenarioArg::IntIcsi),
        };
        let nn = match self.nn {
            Some(v) => v,
            None => config_value(&cfg, "nn", parse_u32)?.unwrap_or(1),
        };
        let nf = match self.nf {
            Some(v) => v,
            None => config_value(&cfg, "nf", parse_u32)?.unwrap_or(1),
        };
        let an = match &self.an {
            Some(raw) => parse_near_fraction(raw).map_err(CliError::Usage)?,
            None => config_value(&cfg, "an", parse_near_fraction)?
                .unwrap_or(NearFraction::Fixed(0.2)),
        };
        let rate = match self.rate {
            Some(v) => v,
            None => config_value(&cfg, "rate", parse_f64)?.unwrap_or(1.0),
        };
        let grid_db = match &self.i_db {
            Some(raw) => parse_grid(raw).map_err(CliError::Usage)?,
            None => config_value(&cfg, "i-db", parse_grid)?
                .unwrap_or_else(|| parse_grid("0:30:5").unwrap()),
        };
        let ppeak_db = match self.ppeak_db {
            Some(v) => v,
            None => config_value(&cfg, "ppeak-db", parse_f64)?.unwrap_or(50.0),
        };
        let delta = match self.delta {
            Some(v) => v,
            None => config_value(&cfg, "delta", parse_f64)?.unwrap_or(0.1),
        };
        let dn = match self.dn {
            Some(v) => v,
            None => config_value(&cfg, "dn", parse_f64)?.unwrap_or(30.0),
        };
        let df = match self.df {
            Some(v) => v,
            None => config_value(&cfg, "df", parse_f64)?.unwrap_or(100.0),
        };
        let dp = match self.dp {
            Some(v) => v,
            None => config_value(&cfg, "dp", parse_f64)?.unwrap_or(200.0),
        };
        let alpha = match self.alpha {
            Some(v) => v,
            None => config_value(&cfg, "alpha", parse_f64)?.unwrap_or(2.0),
        };
        Ok(Resolved {
            scenario,
            nn,
            nf,
            an,
            rate,
            grid_db,
            ppeak_db,
            delta,
            dn,
            df,
            dp,
            alpha,
        })
    }

    /// Config value for a subcommand-specific key (the flag itself is
    /// handled by the caller).
    fn config_override<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> CliResult<Option<T>> {
        match &self.config {
            Some(path) => config_value(&parse_config_file(path)?, key, parse),
            None => Ok(None),
        }
    }
}

impl Resolved {
    fn params(&self) -> CliResult<LinkParams> {
        Ok(LinkParams::from_distances(self.dn, self.df, self.dp, self.alpha)?)
    }

    fn antennas(&self) -> CliResult<AntennaConfig> {
        Ok(AntennaConfig::new(self.nn, self.nf)?)
    }

    fn scenario_at(&self, i_db: f64) -> CliResult<Scenario> {
        let i = 10f64.powf(i_db / 10.0);
        let p_peak = 10f64.powf(self.ppeak_db / 10.0);
        Ok(match self.scenario {
            ScenarioArg::IntIcsi => Scenario::int_icsi(i)?,
            ScenarioArg::IntScsi => Scenario::int_scsi(i, self.delta)?,
            ScenarioArg::PowIntIcsi => Scenario::pow_int_icsi(i, p_peak)?,
            ScenarioArg::PowIntScsi => Scenario::pow_int_scsi(i, self.delta, p_peak)?,
            ScenarioArg::PowIntOneBit => Scenario::pow_int_one_bit(i, p_peak)?,
        })
    }

    /// Build the request for one grid point, resolving `an = optimal` by
    /// numerical search against the NOMA outage at that point.
    fn request_at(&self, i_db: f64, params: &LinkParams) -> CliResult<MetricRequest> {
        let scenario = self.scenario_at(i_db)?;
        let antennas = self.antennas()?;
        let a_n = match self.an {
            NearFraction::Fixed(v) => v,
            NearFraction::Optimal => {
                powalloc::optimal_near_fraction_numeric(&scenario, params, &antennas, self.rate)?
                    .a_n_star
            }
        };
        let split = PowerSplit::from_near_fraction(a_n)?;
        let thresholds = Thresholds::from_rate_target(self.rate, &split)?;
        Ok(MetricRequest {
            scenario,
            params: params.clone(),
            antennas,
            split,
            thresholds,
        })
    }

    fn dump(&self, extra: &[(&str, String)]) {
        println!("scenario={}", self.scenario.token());
        println!("nn={}", self.nn);
        println!("nf={}", self.nf);
        match self.an {
            NearFraction::Fixed(v) => println!("an={v}"),
            NearFraction::Optimal => println!("an=optimal"),
        }
        println!("rate={}", self.rate);
        let grid: Vec<String> = self.grid_db.iter().map(|v| v.to_string()).collect();
        println!("i-db={}", grid.join(","));
        println!("ppeak-db={}", self.ppeak_db);
        println!("delta={}", self.delta);
        println!("dn={}", self.dn);
        println!("df={}", self.df);
        println!("dp={}", self.dp);
        println!("alpha={}", self.alpha);
        for (key, value) in extra {
            println!("{key}={value}");
        }
    }
}

fn warn_on_unusual_geometry(params: &LinkParams) {
    if let Some(warning) = params.ordering_warning() {
        eprintln!("warning: {warning}");
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn metric_list(arg: MetricArg) -> Vec<Metric> {
    match arg {
        MetricArg::SumRate => vec![Metric::SumRate],
        MetricArg::Outage => vec![Metric::Outage],
        MetricArg::Both => vec![Metric::SumRate, Metric::Outage],
    }
}

fn scheme_list(arg: SchemeArg) -> Vec<Scheme> {
    match arg {
        SchemeArg::Noma => vec![Scheme::Noma],
        SchemeArg::Oma => vec![Scheme::Oma],
        SchemeArg::Both => vec![Scheme::Noma, Scheme::Oma],
    }
}

fn metric_token(metric: Metric) -> &'static str {
    match metric {
        Metric::SumRate => "sum-rate",
        Metric::Outage => "outage",
    }
}

fn scheme_token(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Noma => "noma",
        Scheme::Oma => "oma",
    }
}

fn method_token(method: Method) -> &'static str {
    match method {
        Method::ClosedForm => "closed-form",
        Method::Quadrature => "quadrature",
    }
}

/// Analytic value and evaluation route for one (metric, scheme) cell.
fn evaluate(req: &MetricRequest, metric: Metric, scheme: Scheme) -> CliResult<(f64, Method)> {
    Ok(match (metric, scheme) {
        (Metric::SumRate, Scheme::Noma) => {
            let eval = analytic::sumrate_noma(req)?;
            (eval.value, eval.method)
        }
        (Metric::SumRate, Scheme::Oma) => {
            let eval = analytic::sumrate_oma(req)?;
            (eval.value, eval.method)
        }
        (Metric::Outage, Scheme::Noma) => (analytic::outage_noma(req)?, Method::ClosedForm),
        (Metric::Outage, Scheme::Oma) => (analytic::outage_oma(req)?, Method::ClosedForm),
    })
}

fn run_sweep(args: SweepArgs) -> CliResult<()> {
    let resolved = args.system.resolve()?;
    let metric_arg = match args.metric {
        Some(v) => v,
        None => args
            .system
            .config_override("metric", parse_enum::<MetricArg>)?
            .unwrap_or(MetricArg::Both),
    };
    let scheme_arg = match args.scheme {
        Some(v) => v,
        None => args
            .system
            .config_override("scheme", parse_enum::<SchemeArg>)?
            .unwrap_or(SchemeArg::Noma),
    };
    let trials = match args.trials {
        Some(v) => v,
        None => args.system.config_override("trials", parse_u64)?.unwrap_or(0),
    };
    let seed = match args.seed {
        Some(v) => v,
        None => args.system.config_override("seed", parse_u64)?.unwrap_or(12_345),
    };
    let out = match args.out {
        Some(v) => v,
        None => args
            .system
            .config_override("out", |s| Ok::<_, String>(s.to_string()))?
            .unwrap_or_else(|| "-".to_string()),
    };

    if args.system.dump_config {
        resolved.dump(&[
            ("metric", format!("{metric_arg:?}").to_ascii_lowercase()),
            ("scheme", format!("{scheme_arg:?}").to_ascii_lowercase()),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
            ("out", out.clone()),
        ]);
        return Ok(());
    }

    let params = resolved.params()?;
    warn_on_unusual_geometry(&params);

    let mut csv = String::new();
    csv.push_str("i_db,scenario,scheme,metric,method,analytic_value,mc_mean,mc_stderr,trials,seed\n");
    for &i_db in &resolved.grid_db {
        let req = resolved.request_at(i_db, &params)?;
        for &scheme in &scheme_list(scheme_arg) {
            for &metric in &metric_list(metric_arg) {
                let (value, method) = evaluate(&req, metric, scheme)?;
                let (mc_mean, mc_stderr) = if trials > 0 {
                    let estimate = simulate(&req, metric, scheme, &McConfig::new(trials, seed))?;
                    (format!("{:e}", estimate.mean), format!("{:e}", estimate.std_error))
                } else {
                    (String::new(), String::new())
                };
                csv.push_str(&format!(
                    "{i_db:e},{},{},{},{},{value:e},{mc_mean},{mc_stderr},{trials},{seed}\n",
                    resolved.scenario.token(),
                    scheme_token(scheme),
                    metric_token(metric),
                    method_token(method),
                ));
            }
        }
    }

    if out == "-" {
        io::stdout().write_all(csv.as_bytes())?;
    } else {
        fs::write(&out, csv)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

const VALIDATE_REL_TOL: f64 = 1e-6;
const VALIDATE_SIGMA: f64 = 4.0;

fn run_validate(args: ValidateArgs) -> CliResult<()> {
    let resolved = args.system.resolve()?;
    let trials = match args.trials {
        Some(v) => v,
        None => args
            .system
            .config_override("trials", parse_u64)?
            .unwrap_or(200_000),
    };
    let seed = match args.seed {
        Some(v) => v,
        None => args.system.config_override("seed", parse_u64)?.unwrap_or(12_345),
    };

    if args.system.dump_config {
        resolved.dump(&[("trials", trials.to_string()), ("seed", seed.to_string())]);
        return Ok(());
    }

    let params = resolved.params()?;
    warn_on_unusual_geometry(&params);
    // Optional self-test: evaluate the closed forms on a slightly different
    // model than quadrature/simulation to confirm mismatch is detected.
    let closed_params = match args.perturb_omega_f {
        Some(rel) => LinkParams::from_mean_gains(
            params.omega(noma_underlay::channel::User::Near),
            params.omega(noma_underlay::channel::User::Far) * (1.0 + rel),
            params.omega_p(),
        )?,
        None => params.clone(),
    };

    let spec = QuadratureSpec::default();
    let config = McConfig::new(trials.max(1), seed);
    let mut worst_rel: f64 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    let mut failures = 0u32;

    println!(
        "validating scenario {} over {} grid point(s), {} trial(s) per check",
        resolved.scenario.token(),
        resolved.grid_db.len(),
        trials
    );
    for &i_db in &resolved.grid_db {
        let req = resolved.request_at(i_db, &params)?;
        let closed_req = MetricRequest {
            params: closed_params.clone(),
            ..req.clone()
        };
        let mut point_rel: f64 = 0.0;
        let mut point_sigma: f64 = 0.0;
        for &scheme in &[Scheme::Noma, Scheme::Oma] {
            for &metric in &[Metric::SumRate, Metric::Outage] {
                let (closed, method) = evaluate(&closed_req, metric, scheme)?;
                let reference = match (metric, scheme) {
                    (Metric::SumRate, Scheme::Noma) => {
                        oracle::sumrate_noma_by_quadrature(&req, &spec)?
                    }
                    (Metric::SumRate, Scheme::Oma) => {
                        oracle::sumrate_oma_by_quadrature(&req, &spec)?
                    }
                    (Metric::Outage, Scheme::Noma) => {
                        oracle::outage_noma_by_quadrature(&req, &spec)?
                    }
                    (Metric::Outage, Scheme::Oma) => {
                        oracle::outage_oma_by_quadrature(&req, &spec)?
                    }
                };
                // The fallback route *is* quadrature; compare only genuine
                // closed forms against the oracle.
                if method == Method::ClosedForm && reference != 0.0 {
                    point_rel = point_rel.max(((closed - reference) / reference).abs());
                }
                if trials > 0 {
                    let estimate = simulate(&req, metric, scheme, &config)?;
                    if estimate.std_error > 0.0 {
                        point_sigma = point_sigma
                            .max((estimate.mean - reference).abs() / estimate.std_error);
                    }
                }
            }
        }
        let ok = point_rel <= VALIDATE_REL_TOL && point_sigma <= VALIDATE_SIGMA;
        if !ok {
            failures += 1;
        }
        println!(
            "I = {i_db:>6.1} dB: closed vs quadrature rel dev {point_rel:.3e}, \
             simulation dev {point_sigma:.2} sigma [{}]",
            if ok { "ok" } else { "MISMATCH" }
        );
        worst_rel = worst_rel.max(point_rel);
        worst_sigma = worst_sigma.max(point_sigma);
    }

    println!(
        "worst closed-form deviation {worst_rel:.3e} (tolerance {VALIDATE_REL_TOL:.0e}), \
         worst simulation deviation {worst_sigma:.2} sigma (tolerance {VALIDATE_SIGMA})"
    );
    if failures > 0 {
        Err(CliError::Runtime(format!(
            "validation failed at {failures} grid point(s)"
        )))
    } else {
        println!("validation passed");
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// optimize-an
// ---------------------------------------------------------------------------

fn run_optimize(args: OptimizeArgs) -> CliResult<()> {
    let resolved = args.system.resolve()?;
    if args.system.dump_config {
        resolved.dump(&[]);
        return Ok(());
    }
    let params = resolved.params()?;
    warn_on_unusual_geometry(&params);
    let antennas = resolved.antennas()?;

    for &i_db in &resolved.grid_db {
        let scenario = resolved.scenario_at(i_db)?;
        let closed = powalloc::optimal_near_fraction_closed(
            &scenario,
            &params,
            &antennas,
            resolved.rate,
        );
        let numeric = powalloc::optimal_near_fraction_numeric(
            &scenario,
            &params,
            &antennas,
            resolved.rate,
        )?;
        let closed_text = match closed {
            Ok(v) => format!("{v:.9}"),
            Err(_) => "n/a".to_string(),
        };
        println!(
            "I = {i_db:>6.1} dB  a_n*[closed] = {closed_text}  a_n*[numeric] = {:.9}  \
             outage at optimum = {:.6e}",
            numeric.a_n_star, numeric.outage_at_optimum
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
