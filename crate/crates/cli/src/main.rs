//! Command line front end: table reproduction, curve sweeps over builtin
//! or file-loaded vector sets, and the property-check suite.
//!
//! Exit codes: 0 success, 1 property violation (check), 2 usage or
//! configuration error, 3 input/output error.

use clap::{Args, Parser, Subcommand};
use gcomp::checks::{run_checks, CheckConfig};
use gcomp::montecarlo::default_workers;
use gcomp::report::{CsvReport, DEFAULT_SIG_DIGITS, SCHEMA_VERSION};
use gcomp::tables::{run_table, table_csv};
use gcomp::{
    estimate_curve, load_vector_set, ComparisonInstance, Error as CoreError, Functional,
    SamplerConfig, SetFormat, VectorSet,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gcomp",
    version,
    about = "Simulate interpolated bilinear Gaussian comparison functionals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit one of the six bundled benchmark tables as CSV.
    Table(TableArgs),
    /// Estimate functionals over a t grid and emit CSV.
    Sweep(SweepArgs),
    /// Run the property-check suite; nonzero exit on violations.
    Check(CheckArgs),
}

#[derive(Args)]
struct TableArgs {
    /// Table id, 1 through 6.
    id: u8,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads (wall time only; never changes the numbers).
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Significant digits in the CSV cells.
    #[arg(long, default_value_t = DEFAULT_SIG_DIGITS)]
    precision: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Use the bundled reference sets.
    #[arg(long, conflicts_with_all = ["x", "y"])]
    builtin: bool,
    /// Path of the x vector set (columns are vectors in CSV).
    #[arg(long, requires = "y")]
    x: Option<PathBuf>,
    /// Path of the y vector set.
    #[arg(long, requires = "x")]
    y: Option<PathBuf>,
    /// Input format; inferred from the file extension when absent.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Scale all loaded vectors to unit norm.
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    s: f64,
    /// Lifting exponent for the psistar family.
    #[arg(long)]
    c3: Option<f64>,
    /// Scaled exponent for the lifted_limit functional.
    #[arg(long)]
    c3s: Option<f64>,
    /// t grid: "a:b:step" or a comma list, inside [0,1].
    #[arg(long)]
    t: String,
    /// Comma list of: psi, psistar, dpsi_standard, dpsi_closed,
    /// dpsistar_standard, dpsistar_closed, limit, lifted_limit.
    #[arg(long, default_value = "psi")]
    functionals: String,
    #[arg(long, default_value_t = 50_000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// Draws per scheduled work unit (wall time only).
    #[arg(long, default_value_t = 1024)]
    batch: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SIG_DIGITS)]
    precision: usize,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// Samples for the Monte Carlo curve checks.
    #[arg(long, default_value_t = 50_000)]
    samples: usize,
    /// Draws per per-draw sign scan.
    #[arg(long, default_value_t = 100_000)]
    sign_draws: usize,
    /// Negative-control hook: negate the closed-form integrand so the
    /// sign checks must fail.
    #[arg(long, hide = true)]
    negate_closed_hook: bool,
}

enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if e.is_input_data() {
            CliError::Io(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

fn parse_t_spec(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::Config(format!("--t {spec:?}: {msg}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let grid: Vec<f64> = if parts.len() == 3 {
        let a: f64 = parts[0]
            .parse()
            .map_err(|_| bad(format!("bad start {:?}", parts[0])))?;
        let b: f64 = parts[1]
            .parse()
            .map_err(|_| bad(format!("bad end {:?}", parts[1])))?;
        let step: f64 = parts[2]
            .parse()
            .map_err(|_| bad(format!("bad step {:?}", parts[2])))?;
        if !(step > 0.0) || b < a {
            return Err(bad("need end >= start and step > 0".into()));
        }
        let count = ((b - a) / step).round() as usize;
        (0..=count)
            .map(|k| a + k as f64 * step)
            .filter(|&t| t <= b + 1e-12)
            .collect()
    } else if parts.len() == 1 {
        spec.split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad value {cell:?}")))
            })
            .collect::<Result<_, _>>()?
    } else {
        return Err(bad("expected a:b:step or a comma list".into()));
    };
    if grid.is_empty() {
        return Err(bad("empty grid".into()));
    }
    for &t in &grid {
        if !(0.0..=1.0).contains(&t) {
            return Err(bad(format!("t={t} outside [0,1]")));
        }
    }
    Ok(grid)
}

fn parse_functionals(
    spec: &str,
    c3s: Option<f64>,
) -> Result<Vec<Functional>, CliError> {
    spec.split(',')
        .map(|name| match name.trim() {
            "psi" => Ok(Functional::Psi),
            "psistar" => Ok(Functional::PsiStar),
            "dpsi_standard" => Ok(Functional::DpsiStandard),
            "dpsi_closed" => Ok(Functional::DpsiClosed),
            "dpsistar_standard" => Ok(Functional::DpsiStarStandard),
            "dpsistar_closed" => Ok(Functional::DpsiStarClosed),
            "limit" => Ok(Functional::Limit),
            "lifted_limit" => {
                let c3s = c3s.ok_or_else(|| {
                    CliError::Config("--functionals lifted_limit requires --c3s".into())
                })?;
                Ok(Functional::LiftedLimit { c3s })
            }
            other => Err(CliError::Config(format!(
                "--functionals: unknown functional {other:?}"
            ))),
        })
        .collect()
}

fn detect_format(path: &Path, flag: &Option<String>) -> SetFormat {
    match flag.as_deref() {
        Some("json") => SetFormat::Json,
        Some(_) => SetFormat::Csv,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("json") => SetFormat::Json,
            _ => SetFormat::Csv,
        },
    }
}

fn load_set(path: &Path, flag: &Option<String>) -> Result<VectorSet, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    load_vector_set(file, detect_format(path, flag))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_table(args: &TableArgs) -> Result<u8, CliError> {
    let data = run_table(args.id, args.seed, args.workers)?;
    let csv = table_csv(&data)?;
    let text = csv.render(args.precision)?;
    write_output(&args.out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8, CliError> {
    let (xset, yset) = match (&args.x, &args.y) {
        (Some(x), Some(y)) => (load_set(x, &args.format)?, load_set(y, &args.format)?),
        (None, None) if args.builtin => gcomp::builtin_sets(),
        _ => {
            return Err(CliError::Config(
                "choose exactly one input: --builtin or --x FILE --y FILE".into(),
            ))
        }
    };
    let (xset, yset) = if args.normalize {
        (xset.normalized(), yset.normalized())
    } else {
        (xset, yset)
    };
    let mut inst = ComparisonInstance::new(xset, yset, args.beta, args.s)?;
    if let Some(c3) = args.c3 {
        inst = inst.with_c3(c3)?;
    }
    let grid = parse_t_spec(&args.t)?;
    let functionals = parse_functionals(&args.functionals, args.c3s)?;
    let cfg = SamplerConfig {
        seed: args.seed,
        n_samples: args.samples,
        workers: args.workers,
        batch: args.batch,
    };
    let curve = estimate_curve(&inst, &functionals, &grid, &cfg)?;

    let mut columns = vec!["t".to_string()];
    for f in &functionals {
        columns.push(format!("{}_mean", f.label()));
        columns.push(format!("{}_se", f.label()));
    }
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let mut row = vec![t];
            for fi in 0..functionals.len() {
                row.push(curve.estimates[fi][ti].mean);
                row.push(curve.estimates[fi][ti].std_error);
            }
            row
        })
        .collect();
    let source = if args.builtin {
        "builtin".to_string()
    } else {
        format!(
            "x={} y={}",
            args.x.as_ref().unwrap().display(),
            args.y.as_ref().unwrap().display()
        )
    };
    let report = CsvReport {
        config_echo: format!(
            "gcomp sweep source={source} normalize={} beta={} s={} c3={} c3s={} t={} functionals={} samples={} seed={} schema={SCHEMA_VERSION}",
            args.normalize,
            args.beta,
            args.s,
            args.c3.map_or("none".into(), |v| v.to_string()),
            args.c3s.map_or("none".into(), |v| v.to_string()),
            args.t,
            args.functionals,
            args.samples,
            args.seed,
        ),
        columns,
        rows,
    };
    write_output(&args.out, &report.render(args.precision)?)?;
    Ok(EXIT_OK)
}

fn cmd_check(args: &CheckArgs) -> Result<u8, CliError> {
    let cfg = CheckConfig {
        seed: args.seed,
        workers: args.workers,
        sign_draws: args.sign_draws,
        curve_samples: args.samples,
        negate_closed: args.negate_closed_hook,
    };
    let report = run_checks(&cfg).map_err(|e| CliError::Io(format!("check infrastructure: {e}")))?;
    for o in &report.outcomes {
        println!(
            "{} {:<32} {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    let failed = report.outcomes.iter().filter(|o| !o.passed).count();
    if failed == 0 {
        println!("all {} checks passed", report.outcomes.len());
        Ok(EXIT_OK)
    } else {
        println!("{failed} of {} checks failed", report.outcomes.len());
        Ok(EXIT_VIOLATION)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Table(args) => cmd_table(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
