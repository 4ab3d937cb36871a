//! The `fraxion` command line: `eval`, `verify`, `solve` and `simulate`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical failure. Errors go to stderr as one JSON line,
//! `{"error": "config"|"numerical", "message": …[, "at": …]}`.

mod config;
mod eval;
pub mod simulate;
mod solve;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use config::{RunConfig, TGrid};
use simulate::{raw_text, simulate_output, SimKind, SimulateRequest};
use verify::{Suite, VerifyOptions};

use crate::stochastic::WaitingMethod;
use crate::FraxionError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "FRAXION_THREADS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {message}")]
    Numerical { message: String, at: Option<f64> },
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    /// A library error at point `at`. Domain errors become config errors.
    pub fn numerical(e: FraxionError, at: f64) -> Self {
        if e.is_numerical() {
            CliError::Numerical {
                message: e.to_string(),
                at: Some(at),
            }
        } else {
            CliError::Config(e.to_string())
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
        }
    }

    /// The single-line JSON written to stderr.
    pub fn to_line(&self) -> String {
        let v = match self {
            CliError::Config(m) => json!({ "error": "config", "message": m }),
            CliError::Numerical { message, at } => json!({ "error": "numerical", "message": message, "at": at }),
        };
        v.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

const AFTER_HELP: &str = "\
CSV output: `.` decimal point, `,` separator, LF line endings, reals with 17 significant digits.
Headers:
  eval (ml, ml_deriv, mainardi)   z,value,abs_err
  eval (other functions)          t,value
  solve                           t,f
  solve --method both             t,f_resolvent,f_stepping,abs_diff
  simulate                        bin_left,bin_right,count,density_estimate,ci_low,ci_high[,analytic][,ks_statistic,ks_critical_1pct]
  verify --format csv             suite,criterion,name,pass,value,tol
JSON output follows schema/output.schema.json.
Exit codes: 0 success, 1 verification failure, 2 configuration error, 3 numerical failure.
FRAXION_THREADS caps the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "fraxion", version, about = "Fractional renewal processes: evaluate, verify, solve, simulate")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a special function or renewal quantity on a grid.
    Eval(EvalArgs),
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Solve the Abel-Volterra equation f = g − c·I^α f.
    Solve(SolveArgs),
    /// Seeded Monte Carlo with analytic comparison columns.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Default)]
struct Common {
    /// JSON file mirroring the run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EvalFn {
    Ml,
    #[value(name = "ml_deriv")]
    MlDeriv,
    Mainardi,
    Density,
    Survival,
    Failure,
    Erlang,
    Counting,
    #[value(name = "renewal_fn")]
    RenewalFn,
    #[value(name = "classic_fpp")]
    ClassicFpp,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long = "fn", value_enum)]
    function: EvalFn,
    #[arg(long)]
    alpha: Option<f64>,
    /// Second Mittag-Leffler parameter.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Third Mittag-Leffler parameter.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Derivative order for ml_deriv.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Index n for erlang, counting and classic_fpp.
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long)]
    fold: Option<u32>,
    /// Comma-separated points.
    #[arg(long, alias = "z", value_delimiter = ',', allow_hyphen_values = true)]
    t: Option<Vec<f64>>,
    /// start:stop:points, inclusive.
    #[arg(long)]
    t_grid: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Orders to sweep (comma-separated); default 0.3,0.5,0.8.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Seed of the Monte Carlo suites (default: the pinned fixture seed).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SolveMethod {
    Resolvent,
    Stepping,
    Both,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    c: f64,
    /// const:v | power:mu | exp | grid-file:path
    #[arg(long)]
    g: String,
    /// Horizon.
    #[arg(long = "T", default_value_t = 2.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, value_enum, default_value = "resolvent")]
    method: SolveMethod,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    kind: SimKind,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    fold: Option<u32>,
    /// Path horizon for --kind paths.
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Physical time for --kind operational.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "product")]
    method: WaitingMethod,
    /// Histogram edges as start:stop:points (default 0.1:5:41).
    #[arg(long)]
    t_grid: Option<String>,
    /// Largest count listed separately for --kind paths.
    #[arg(long, default_value_t = 10)]
    max_n: u64,
    /// Also write the raw variates here, one per line.
    #[arg(long)]
    raw: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

impl clap::ValueEnum for WaitingMethod {
    fn value_variants<'a>() -> &'a [Self] {
        &[WaitingMethod::Product, WaitingMethod::Direct]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            WaitingMethod::Product => "product",
            WaitingMethod::Direct => "direct",
        }))
    }
}

/// Runs the CLI with the given arguments (program name first). Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                // a closed pipe (e.g. `| head`) is not an error for help text
                let _ = std::io::stdout().lock().write_all(e.to_string().as_bytes());
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::Config(first.to_string()).to_line());
            return EXIT_CONFIG;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_line());
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // a second configuration in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    match &common.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn format_of(common: &Common, cfg: &RunConfig) -> Format {
    common
        .format
        .or(cfg.output.as_ref().and_then(|o| o.format))
        .unwrap_or_default()
}

fn output_path<'a>(common: &'a Common, cfg: &'a RunConfig) -> Option<&'a Path> {
    common
        .output
        .as_deref()
        .or(cfg.output.as_ref().and_then(|o| o.path.as_deref()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Config(format!("cannot write stdout: {e}")))
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Eval(a) => {
            let cfg = load_config(&a.common)?;
            let grid = match (&a.t, &a.t_grid, &cfg.t_grid) {
                (Some(t), None, _) => t.clone(),
                (None, Some(g), _) => TGrid::parse(g)?.points()?,
                (None, None, Some(g)) => g.points()?,
                (Some(_), Some(_), _) => return Err(CliError::Config("give either --t or --t-grid, not both".into())),
                (None, None, None) => return Err(CliError::Config("a grid is required: --t or --t-grid".into())),
            };
            let req = eval::EvalRequest {
                function: a.function,
                alpha: a.alpha.or(cfg.alpha).ok_or_else(|| CliError::Config("--alpha is required".into()))?,
                beta: a.beta,
                gamma: a.gamma,
                k: a.k,
                n: a.n,
                fold: a.fold.or(cfg.fold).unwrap_or(1),
                grid,
            };
            let text = eval::eval_output(&req, format_of(&a.common, &cfg))?;
            emit(output_path(&a.common, &cfg), &text)?;
            Ok(EXIT_OK)
        }
        Command::Verify(a) => {
            let cfg = load_config(&a.common)?;
            let alphas = a.alpha.clone().or(cfg.alpha.map(|x| vec![x]));
            if let Some(al) = &alphas {
                for &x in al {
                    crate::renewal::FracOrder::new(x).map_err(CliError::config)?;
                }
            }
            let opts = VerifyOptions {
                alphas,
                seed: a.seed.or(cfg.seed).unwrap_or(verify::DEFAULT_SEED),
                tol: cfg.tolerances()?,
            };
            let report = verify::run(a.suite, &opts);
            let text = match format_of(&a.common, &cfg) {
                Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
                Format::Csv => {
                    let mut s = String::from("suite,criterion,name,pass,value,tol\n");
                    for suite in &report.suites {
                        for c in &suite.checks {
                            s.push_str(&format!(
                                "{},{},\"{}\",{},{},{}\n",
                                suite.suite,
                                suite.criterion,
                                c.name.replace('"', "\"\""),
                                c.pass,
                                crate::stochastic::fmt_real(c.value),
                                crate::stochastic::fmt_real(c.tol)
                            ));
                        }
                    }
                    s
                }
            };
            emit(output_path(&a.common, &cfg), &text)?;
            for s in &report.suites {
                eprintln!("{}", s.summary_line());
            }
            Ok(if report.pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Solve(a) => {
            let cfg = load_config(&a.common)?;
            let req = solve::SolveRequest {
                alpha: a.alpha.or(cfg.alpha).ok_or_else(|| CliError::Config("--alpha is required".into()))?,
                c: a.c,
                g: solve::GSpec::parse(&a.g)?,
                horizon: a.horizon,
                dt: a.dt,
                method: a.method,
            };
            let text = solve::solve_output(&req, format_of(&a.common, &cfg))?;
            emit(output_path(&a.common, &cfg), &text.0)?;
            if let Some(d) = text.1 {
                eprintln!("{}", json!({ "sup_discrepancy": d }));
            }
            Ok(EXIT_OK)
        }
        Command::Simulate(a) => {
            let cfg = load_config(&a.common)?;
            let seed = a
                .seed
                .or(cfg.seed)
                .ok_or_else(|| CliError::Config("--seed is required; no wall-clock seeding".into()))?;
            let alpha = a.alpha.or(cfg.alpha).ok_or_else(|| CliError::Config("--alpha is required".into()))?;
            let n = a.n.or(cfg.n_samples).ok_or_else(|| CliError::Config("--n is required".into()))?;
            let edges = match (&a.t_grid, &cfg.t_grid) {
                (Some(g), _) => TGrid::parse(g)?.points()?,
                (None, Some(g)) => g.points()?,
                (None, None) => simulate::default_edges(),
            };
            if !(a.horizon > 0.0 && a.horizon.is_finite()) || !(a.t > 0.0 && a.t.is_finite()) {
                return Err(CliError::Config("--horizon and --t must be positive".into()));
            }
            let req = SimulateRequest {
                kind: a.kind,
                alpha,
                fold: a.fold.or(cfg.fold).unwrap_or(1),
                horizon: a.horizon,
                t: a.t,
                n,
                seed,
                method: a.method,
                edges,
                max_n: a.max_n,
                level: 0.95,
                format: format_of(&a.common, &cfg),
            };
            let out = simulate_output(&req)?;
            emit(output_path(&a.common, &cfg), &out.text)?;
            if let Some(p) = &a.raw {
                emit(Some(p), &raw_text(&out.raw))?;
            }
            Ok(EXIT_OK)
        }
    }
}
