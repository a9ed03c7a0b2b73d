//! Command-line front end: tables and curves as CSV or JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::asymptotics::crossover_report_with;
use crate::hereditary::{strain_response_with, stress_response_with, Interpolation, LoadHistory};
use crate::laplace::{invert_phi, invert_psi, TalbotConfig};
use crate::specfun::Order;
use crate::timedomain::{
    linear_grid, log_grid, BesselModel, CurveKind, MaterialCurve, RemainderModel, SeriesPolicy,
};
use crate::validation::{run_suite, Check};
use crate::zeros::compute_zeros;
use crate::Error as ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{failed} of {total} checks failed")]
    Failed { failed: usize, total: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Model(e) => e.kind(),
            CliError::Config(_) => "config",
            CliError::Failed { .. } => "check_failed",
            CliError::Io(_) => "io",
        }
    }

    /// 1 when a check ran and failed, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed { .. } => 1,
            _ => 2,
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

macro_rules! model_err {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Model(e.into())
            }
        }
    )*};
}

model_err!(
    crate::SpecFunError,
    crate::ZeroError,
    crate::LaplaceError,
    crate::SeriesError,
    crate::AsymptoticError,
    crate::HereditaryError
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Lin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Response {
    /// Strain from a stress history.
    Strain,
    /// Stress from a strain history.
    Stress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InterpArg {
    Constant,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RemainderArg {
    Rayleigh,
    Asymptotic,
}

#[derive(Debug, Parser)]
#[command(
    name = "bessel-models",
    version,
    about = "Bessel-class viscoelastic models"
)]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Digits after the decimal point (scientific notation below 1e-4);
    /// shortest round-trip form when omitted.
    #[arg(long, global = true)]
    pub precision: Option<usize>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tail_tol: f64,
    #[arg(long, global = true, default_value_t = 10_000)]
    pub max_terms: usize,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub min_time: f64,
    #[arg(long, global = true, value_enum, default_value_t = RemainderArg::Rayleigh)]
    pub remainder: RemainderArg,
}

impl PolicyArgs {
    pub fn policy(&self) -> Result<SeriesPolicy, CliError> {
        let remainder = match self.remainder {
            RemainderArg::Rayleigh => RemainderModel::Rayleigh,
            RemainderArg::Asymptotic => RemainderModel::Asymptotic,
        };
        Ok(
            SeriesPolicy::new(self.tail_tol, self.max_terms, self.min_time)?
                .with_remainder(remainder),
        )
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// SPACING LO HI POINTS, e.g. `--grid log 1e-3 10 50`.
    #[arg(long, num_args = 4, value_names = ["SPACING", "LO", "HI", "POINTS"], allow_negative_numbers = true)]
    pub grid: Option<Vec<String>>,
}

impl GridArgs {
    pub fn parse(&self) -> Result<Option<Vec<f64>>, CliError> {
        let Some(g) = &self.grid else { return Ok(None) };
        let spacing = Spacing::from_str(&g[0], true).map_err(CliError::Config)?;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad grid bound '{s}'")))
        };
        let (lo, hi) = (num(&g[1])?, num(&g[2])?);
        let n: usize = g[3]
            .parse()
            .map_err(|_| CliError::Config(format!("bad point count '{}'", g[3])))?;
        if n == 0 {
            return Err(CliError::Config("grid needs at least one point".into()));
        }
        if !(lo.is_finite() && hi.is_finite()) || (n > 1 && hi <= lo) || lo < 0.0 {
            return Err(CliError::Config(format!("bad grid bounds [{lo}, {hi}]")));
        }
        match spacing {
            Spacing::Log if lo <= 0.0 => Err(CliError::Config("log grid needs lo > 0".into())),
            Spacing::Log => Ok(Some(log_grid(lo, hi, n))),
            Spacing::Lin => Ok(Some(linear_grid(lo, hi, n))),
        }
    }

    fn required(&self) -> Result<Vec<f64>, CliError> {
        self.parse()?
            .ok_or_else(|| CliError::Config("--grid is required".into()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First positive zeros of J_ν.
    Zeros {
        #[arg(long, allow_negative_numbers = true)]
        order: f64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// One value of a memory or material function.
    Eval {
        #[arg(long)]
        kind: CurveKind,
        #[arg(long, allow_negative_numbers = true)]
        order: f64,
        #[arg(long)]
        t: f64,
    },
    /// A memory or material function sampled on a grid.
    Curve {
        #[arg(long)]
        kind: CurveKind,
        #[arg(long, allow_negative_numbers = true)]
        order: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Series next to both asymptotic branches.
    AsymptoteCompare {
        #[arg(long)]
        kind: CurveKind,
        #[arg(long, allow_negative_numbers = true)]
        order: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Series against numerical Laplace inversion for Ψ and Φ.
    OracleCheck {
        #[arg(long, allow_negative_numbers = true)]
        order: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 48)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Hereditary response to a history read from CSV (columns time,value).
    Respond {
        #[arg(long, allow_negative_numbers = true)]
        order: f64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        response: Response,
        #[arg(long, value_enum, default_value_t = InterpArg::Linear)]
        interpolation: InterpArg,
        /// Evaluation grid; the history times when omitted.
        #[command(flatten)]
        grid: GridArgs,
    },
    /// The invariant suite as a JSON report.
    Validate,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Bool(bool),
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn curve(curve: &MaterialCurve) -> Self {
        let mut t = Table::new(&["t", "value", "provenance"]);
        for s in &curve.samples {
            t.rows.push(vec![
                Cell::Num(s.t),
                Cell::Num(s.value),
                Cell::Text(s.provenance.as_str().into()),
            ]);
        }
        t
    }
}

fn fmt_num(x: f64, precision: Option<usize>) -> String {
    match precision {
        Some(p) if x == 0.0 || (1e-4..1e15).contains(&x.abs()) => format!("{x:.p$}"),
        Some(p) => format!("{x:.p$e}"),
        None => format!("{x:?}"),
    }
}

fn render(
    table: &Table,
    format: Format,
    precision: Option<usize>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|c| match c {
                    Cell::Num(x) => fmt_num(*x, precision),
                    Cell::Int(n) => n.to_string(),
                    Cell::Text(s) => s.clone(),
                    Cell::Bool(b) => b.to_string(),
                }))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let records: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut m = serde_json::Map::new();
                    for (h, c) in table.header.iter().zip(row) {
                        let v = match c {
                            Cell::Num(x) => match precision {
                                Some(p) => {
                                    serde_json::json!(fmt_num(*x, Some(p)).parse::<f64>().unwrap())
                                }
                                None => serde_json::json!(x),
                            },
                            Cell::Int(n) => serde_json::json!(n),
                            Cell::Text(s) => serde_json::json!(s),
                            Cell::Bool(b) => serde_json::json!(b),
                        };
                        m.insert((*h).to_string(), v);
                    }
                    serde_json::Value::Object(m)
                })
                .collect();
            serde_json::to_writer_pretty(&mut *out, &records)
                .map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Report<'a> {
    passed: usize,
    failed: usize,
    checks: &'a [Check],
}

fn order(nu: f64) -> Result<Order, CliError> {
    Ok(Order::new(nu)?)
}

/// Runs one command, writing its artifact to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let policy = cli.policy.policy()?;
    let format = cli.format.unwrap_or(match cli.command {
        Command::Validate => Format::Json,
        _ => Format::Csv,
    });
    let emit = |table: Table, out: &mut dyn Write| render(&table, format, cli.precision, out);

    match &cli.command {
        Command::Zeros {
            order: nu,
            count,
            tol,
        } => {
            if *count == 0 {
                return Err(CliError::Config("--count must be at least 1".into()));
            }
            order(*nu)?;
            let z = compute_zeros(*nu, *count, *tol)?;
            let mut t = Table::new(&["n", "j", "j_squared"]);
            for (k, j) in z.zeros().iter().enumerate() {
                t.rows
                    .push(vec![Cell::Int(k + 1), Cell::Num(*j), Cell::Num(j * j)]);
            }
            emit(t, out)
        }
        Command::Eval { kind, order: nu, t } => {
            let mut m = BesselModel::new(order(*nu)?, policy)?;
            emit(Table::curve(&m.sample_curve(*kind, &[*t])?), out)
        }
        Command::Curve {
            kind,
            order: nu,
            grid,
        } => {
            let grid = grid.required()?;
            let mut m = BesselModel::new(order(*nu)?, policy)?;
            emit(Table::curve(&m.sample_curve(*kind, &grid)?), out)
        }
        Command::AsymptoteCompare {
            kind,
            order: nu,
            grid,
        } => {
            let grid = grid.required()?;
            let mut m = BesselModel::new(order(*nu)?, policy)?;
            let rows = crossover_report_with(&mut m, *kind, &grid)?;
            let mut t = Table::new(&["t", "series", "short", "long", "best_branch", "provenance"]);
            for r in rows {
                let best = match r.best_branch {
                    crate::BranchKind::ShortTime => "short_time",
                    crate::BranchKind::LongTime => "long_time",
                };
                t.rows.push(vec![
                    Cell::Num(r.t),
                    Cell::Num(r.series),
                    Cell::Num(r.short),
                    Cell::Num(r.long),
                    Cell::Text(best.into()),
                    Cell::Text("series".into()),
                ]);
            }
            emit(t, out)
        }
        Command::OracleCheck {
            order: nu,
            t,
            nodes,
            tol,
        } => {
            let o = order(*nu)?;
            let cfg = TalbotConfig::new(*nodes)?;
            let mut m = BesselModel::new(o, policy)?;
            let mut table = Table::new(&[
                "function", "t", "series", "talbot", "rel_gap", "degraded", "pass",
            ]);
            let mut failed = 0;
            for (name, series, est) in [
                ("creep_rate", m.psi(*t)?, invert_psi(o, *t, &cfg)?),
                ("relax_rate", m.phi(*t)?, invert_phi(o, *t, &cfg)?),
            ] {
                let gap = ((est.value - series) / series).abs();
                let pass = gap <= *tol;
                failed += usize::from(!pass);
                table.rows.push(vec![
                    Cell::Text(name.into()),
                    Cell::Num(*t),
                    Cell::Num(series),
                    Cell::Num(est.value),
                    Cell::Num(gap),
                    Cell::Bool(est.degraded),
                    Cell::Bool(pass),
                ]);
            }
            emit(table, out)?;
            if failed > 0 {
                return Err(CliError::Failed { failed, total: 2 });
            }
            Ok(())
        }
        Command::Respond {
            order: nu,
            input,
            response,
            interpolation,
            grid,
        } => {
            let interp = match interpolation {
                InterpArg::Constant => Interpolation::PiecewiseConstant,
                InterpArg::Linear => Interpolation::PiecewiseLinear,
            };
            let history = LoadHistory::from_csv_path(input, interp)?;
            let t_eval = grid.parse()?.unwrap_or_else(|| history.times().to_vec());
            let mut m = BesselModel::new(order(*nu)?, policy)?;
            let curve = match response {
                Response::Strain => strain_response_with(&mut m, &history, &t_eval)?,
                Response::Stress => stress_response_with(&mut m, &history, &t_eval)?,
            };
            emit(Table::curve(&curve), out)
        }
        Command::Validate => {
            let checks = run_suite(&policy)?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            match format {
                Format::Json => {
                    let report = Report {
                        passed: checks.len() - failed,
                        failed,
                        checks: &checks,
                    };
                    serde_json::to_writer_pretty(&mut *out, &report)
                        .map_err(|e| CliError::Io(e.to_string()))?;
                    writeln!(out)?;
                }
                Format::Csv => {
                    let mut t = Table::new(&["name", "tolerance", "measured", "pass"]);
                    for c in &checks {
                        t.rows.push(vec![
                            Cell::Text(c.name.clone()),
                            Cell::Num(c.tolerance),
                            Cell::Num(c.measured),
                            Cell::Bool(c.pass),
                        ]);
                    }
                    emit(t, out)?;
                }
            }
            if failed > 0 {
                return Err(CliError::Failed {
                    failed,
                    total: checks.len(),
                });
            }
            Ok(())
        }
    }
}

/// Entry point for the binary: parses arguments, runs, reports errors as JSON
/// on stderr, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let rec = serde_json::json!({ "error": "usage", "message": e.to_string().trim() });
            eprintln!("{rec}");
            return 2;
        }
    };
    let result = match &cli.output {
        Some(path) => File::create(path).map_err(CliError::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            let r = run(&cli, &mut w);
            w.flush()?;
            r
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            run(&cli, &mut lock)
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}
