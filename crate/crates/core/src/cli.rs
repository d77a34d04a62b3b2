//! The `flat3` command line.
//!
//! Exit codes: 0 success or flat, 1 a definite negative (not flat, no proper
//! family), 2 usage or configuration errors, 3 numeric or domain errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::curvature::{ricci, riemann};
use crate::families::{
    load_metric, metric_file, proper_family_exists, FamilyError, FamilySpec, Kind, Params, CATALOG, SHAPES,
};
use crate::metric::{BoxDomain, DiagonalMetric, MetricError, MetricFile};
use crate::verify::{
    flatness_report, sample_grid, write_csv, FlatnessReport, GridSpec, VerifyError, DEFAULT_GRID, DEFAULT_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FLAT3_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "flat3",
    version,
    about = "Curvature and flatness of diagonal metrics on boxes in R^3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ricci tensor (and optionally Riemann components) at points.
    Curvature {
        #[arg(long)]
        metric: PathBuf,
        /// `x1,x2,x3`; repeat for several points.
        #[arg(long, required = true, allow_hyphen_values = true)]
        point: Vec<String>,
        /// Include all 81 frame components of the curvature tensor.
        #[arg(long)]
        riemann: bool,
    },
    /// Grid flatness check; exit 0 when flat, 1 when not.
    Check {
        #[arg(long)]
        metric: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Flat family catalogue, construction and existence.
    Family {
        #[command(subcommand)]
        command: FamilyCommand,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Points per axis.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Flatness threshold for the largest Ricci entry.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Truncation for unbounded axes, `lo,hi:lo,hi:lo,hi` (infinite pairs are ignored).
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Write the report (or CSV) here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// Family spec file `{"kind", "params", "box"}`.
    #[arg(long, conflicts_with_all = ["kind", "params", "box_"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    kind: Option<String>,
    /// Parameter object as JSON.
    #[arg(long)]
    params: Option<String>,
    /// `lo,hi:lo,hi:lo,hi`, with `inf` tokens.
    #[arg(long = "box", id = "box_", allow_hyphen_values = true)]
    box_: Option<String>,
}

#[derive(Debug, Subcommand)]
enum FamilyCommand {
    /// List kinds with their shape, formulas and parameters.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Write the metric file of a family.
    Build {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a family and check it on a grid.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Decide whether a proper family of a shape or kind exists on a box.
    Exists {
        /// A shape name or a kind id.
        #[arg(long)]
        kind: String,
        #[arg(long = "box", allow_hyphen_values = true)]
        box_: String,
    },
}

/// An error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        let code = match e {
            MetricError::OutsideDomain(_) | MetricError::ZeroCoefficient { .. } | MetricError::Expr { .. } => {
                EXIT_NUMERIC
            }
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::Metric(m) => m.into(),
            FamilyError::ConstraintViolation(_) | FamilyError::NonFiniteLimit { .. } | FamilyError::Numeric { .. } => {
                Self {
                    code: EXIT_NUMERIC,
                    message: e.to_string(),
                }
            }
            _ => Self::config(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Metric(m) => m.into(),
            VerifyError::Unbounded(_) | VerifyError::InvalidGrid(_) => Self::config(e.to_string()),
            _ => Self {
                code: EXIT_NUMERIC,
                message: e.to_string(),
            },
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::config(format!("{}: {e}", p.display()))),
        None => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = writeln!(io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn parse_point(s: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config(format!("bad point `{s}`")))?;
    <[f64; 3]>::try_from(parts).map_err(|_| CliError::config(format!("point `{s}` needs three coordinates")))
}

fn load_metric_path(path: &Path) -> Result<(DiagonalMetric, MetricFile), CliError> {
    let file = MetricFile::from_json(&read(path)?)?;
    let m = load_metric(&file)?;
    Ok((m, file))
}

fn grid_spec(args: &GridArgs) -> Result<GridSpec, CliError> {
    let mut g = GridSpec::new(args.grid);
    if let Some(w) = &args.window {
        let w = w.trim();
        let text = if w.contains(':') {
            w.to_string()
        } else {
            [w, w, w].join(":")
        };
        let b = BoxDomain::parse_cli(&text).map_err(|e| CliError::config(format!("window: {e}")))?;
        for i in 0..3 {
            let (lo, hi) = b.axis(i);
            if lo.is_finite() && hi.is_finite() {
                g = g.truncate(i, lo, hi);
            }
        }
    }
    Ok(g)
}

/// Run the grid check and write the result; returns the exit code.
fn check(m: &DiagonalMetric, args: &GridArgs, echo: Option<Value>) -> Result<i32, CliError> {
    let grid = grid_spec(args)?;
    let report: FlatnessReport = flatness_report(m, &grid, args.tol)?;
    match args.format {
        Format::Json => {
            let report = FlatnessReport { spec: echo, ..report };
            emit(args.out.as_deref(), &pretty(&report))?;
        }
        Format::Csv => {
            let samples = sample_grid(m, &grid)?;
            let mut buf = Vec::new();
            write_csv(&mut buf, &samples).map_err(|e| CliError::config(e.to_string()))?;
            let text = String::from_utf8(buf).expect("utf-8 csv");
            match args.out.as_deref() {
                Some(p) => fs::write(p, text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?,
                None => {
                    let _ = write!(io::stdout(), "{text}");
                }
            }
            eprintln!(
                "max_ric = {:e} at {:?}; flat = {}",
                report.max_ric, report.argmax_point, report.flat
            );
        }
    }
    Ok(if report.flat { EXIT_OK } else { EXIT_NEGATIVE })
}

fn curvature(metric: &Path, points: &[String], with_riemann: bool) -> Result<i32, CliError> {
    let (m, _) = load_metric_path(metric)?;
    let mut out = Vec::new();
    for s in points {
        let p = parse_point(s)?;
        m.check_point(p)?;
        let ric = ricci(&m, p)?;
        let mut v = json!({"point": p, "ric": ric.ric, "scalar": ric.scalar()});
        if with_riemann {
            v["riemann"] = json!(riemann(&m, p)?.0);
        }
        out.push(v);
    }
    let v = if out.len() == 1 {
        out.pop().expect("one")
    } else {
        Value::Array(out)
    };
    emit(None, &pretty(&v))?;
    Ok(EXIT_OK)
}

fn spec_from(args: &SpecArgs) -> Result<FamilySpec, CliError> {
    if let Some(p) = &args.spec {
        return Ok(FamilySpec::from_json(&read(p)?)?);
    }
    let kind = args
        .kind
        .as_deref()
        .ok_or_else(|| CliError::config("give --spec or --kind"))?;
    let kind: Kind = kind.parse().map_err(|_| FamilyError::UnknownKind(kind.to_string()))?;
    let params: Params = match &args.params {
        Some(text) => serde_json::from_str(text).map_err(|e| CliError::config(format!("--params: {e}")))?,
        None => Params::new(),
    };
    let domain = match &args.box_ {
        Some(b) => BoxDomain::parse_cli(b)?,
        None => BoxDomain::parse_cli(kind.info().example_box)?,
    };
    Ok(FamilySpec::new(kind, params, domain))
}

fn family_list(as_json: bool) -> Result<i32, CliError> {
    if as_json {
        let kinds: Vec<Value> = CATALOG
            .iter()
            .map(|k| {
                json!({
                    "kind": k.id,
                    "shape": k.shape,
                    "form": k.form,
                    "params": k.params.iter().map(|(n, d)| json!({"name": n, "doc": d})).collect::<Vec<_>>(),
                    "example": serde_json::from_str::<Value>(k.example).expect("example parses"),
                    "example_box": k.example_box,
                })
            })
            .collect();
        let shapes: Vec<&str> = SHAPES.iter().map(|(_, n)| *n).collect();
        emit(None, &pretty(&json!({"kinds": kinds, "shapes": shapes})))?;
        return Ok(EXIT_OK);
    }
    let mut s = String::new();
    for k in CATALOG.iter() {
        s.push_str(&format!("{}\n  shape: {}\n  form:  {}\n", k.id, k.shape, k.form));
        for (n, d) in k.params {
            s.push_str(&format!("  {n}: {d}\n"));
        }
        s.push_str(&format!(
            "  example: --params '{}' --box {}\n\n",
            k.example, k.example_box
        ));
    }
    s.push_str("existence shapes: ");
    s.push_str(&SHAPES.iter().map(|(_, n)| *n).collect::<Vec<_>>().join(", "));
    emit(None, &s)?;
    Ok(EXIT_OK)
}

fn family(cmd: &FamilyCommand) -> Result<i32, CliError> {
    match cmd {
        FamilyCommand::List { json } => family_list(*json),
        FamilyCommand::Build { spec, out } => {
            let spec = spec_from(spec)?;
            emit(out.as_deref(), &pretty(&metric_file(&spec)?))?;
            Ok(EXIT_OK)
        }
        FamilyCommand::Verify { spec, grid } => {
            let spec = spec_from(spec)?;
            let m = crate::families::build_family(&spec)?;
            check(&m, grid, Some(spec.to_value()))
        }
        FamilyCommand::Exists { kind, box_ } => {
            let domain = BoxDomain::parse_cli(box_)?;
            let e = proper_family_exists(kind, &domain)?;
            emit(None, &pretty(&e))?;
            Ok(if e.exists { EXIT_OK } else { EXIT_NEGATIVE })
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        // a pool built earlier in the same process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Curvature { metric, point, riemann } => curvature(metric, point, *riemann),
        Command::Check { metric, grid } => {
            let (m, file) = load_metric_path(metric)?;
            let echo = serde_json::to_value(&file).ok();
            check(&m, grid, echo)
        }
        Command::Family { command } => family(command),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {}", e.message);
            e.code
        }
    }
}
