//! The `elci` command line: intervals from a data file, table reproduction
//! and per-sample diagnostics.
//!
//! Exit status is 0 on success, 2 for invalid input or configuration and 3
//! for numerical failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::el::{confidence_interval_fit, solve_lambda, IntervalResult, Method};
use crate::error::{Error, Result};
use crate::functional::{point_estimate_fit, FunctionalSpec};
use crate::influence::{influence_values, sample_variance};
use crate::km::KmFit;
use crate::sample::{ingest_csv, CensoredSample, CsvConfig};
use crate::scaled::{jackknife_variance_fit, scaled_interval_fit, weighted_scores};
use crate::simulation::{run_coverage_study_with_threads, ScenarioConfig, DEFAULT_REPS, MIN_REPS};
use crate::tables::{build_table, report_table, Cell, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "elci", version, about = "Empirical-likelihood confidence intervals for censored data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    El,
    Scaled,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::El => vec![Method::ElChi2],
            MethodArg::Scaled => vec![Method::ScaledEl],
            MethodArg::Both => vec![Method::ElChi2, Method::ScaledEl],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiagnosticsFormat {
    Json,
}

#[derive(Debug, clap::Args)]
pub struct DataArgs {
    /// CSV file with one row per subject.
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long, default_value = "time")]
    pub time_col: String,
    #[arg(long, default_value = "event")]
    pub event_col: String,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// e.g. `mean`, `survival:y=0.5`, `mrl:t0=0.9`, `quantile:p=0.5`.
    #[arg(long, default_value = "mean")]
    pub functional: String,
}

impl DataArgs {
    fn load(&self) -> Result<(CensoredSample, FunctionalSpec)> {
        if !self.delimiter.is_ascii() {
            return Err(Error::InvalidParameter("delimiter must be a single ASCII character".into()));
        }
        let cfg = CsvConfig {
            time_column: self.time_col.clone(),
            event_column: self.event_col.clone(),
            delimiter: self.delimiter as u8,
        };
        let sample = ingest_csv(&self.file, &cfg)?;
        let f: FunctionalSpec = self.functional.parse()?;
        Ok((sample, f))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Confidence interval(s) for a functional from a data file.
    Ci {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::El)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
        /// Write endpoint search diagnostics to stderr.
        #[arg(long, value_enum)]
        diagnostics: Option<DiagnosticsFormat>,
    },
    /// Reproduce a published table or run a custom coverage study.
    Simulate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5), conflicts_with = "scenario")]
        table: Option<u8>,
        /// JSON file describing a custom scenario.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_REPS)]
        reps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
        /// Worker threads; defaults to `ELCI_THREADS` or all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Influence values, multiplier and variance diagnostics for one sample.
    Diagnose {
        #[command(flatten)]
        data: DataArgs,
        /// Parameter value to diagnose at; defaults to the point estimate.
        #[arg(long)]
        theta: Option<f64>,
    },
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_NUMERIC
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Ci { data, alpha, method, format, diagnostics } => {
            run_ci(&data, alpha, method, format, diagnostics, out, err)
        }
        Command::Simulate { table, scenario, reps, seed, out: path, format, threads } => {
            run_simulate(table, scenario, reps, seed, path, format, threads, out, err)
        }
        Command::Diagnose { data, theta } => run_diagnose(&data, theta, out),
    }
}

fn interval_row(ci: &IntervalResult, f: &FunctionalSpec, n: usize, censored: f64) -> Vec<Cell> {
    let warnings = ci.warnings();
    vec![
        Cell::Text(ci.method.tag().into()),
        Cell::Num(ci.lower),
        Cell::Num(ci.upper),
        Cell::Num(ci.theta_hat),
        Cell::Num(ci.alpha),
        Cell::Text(f.label().into()),
        Cell::Int(n as u64),
        Cell::Num(censored),
        Cell::Text(if ci.experimental { "experimental" } else { "-" }.into()),
        Cell::Text(if warnings.is_empty() { "-".into() } else { warnings.join("; ") }),
    ]
}

fn endpoint_json(d: &crate::el::EndpointDiagnostics) -> serde_json::Value {
    json!({
        "statistic": finite_or_str(d.statistic),
        "evaluations": d.evaluations,
        "truncated_at_hull": d.truncated_at_hull,
        "non_monotone": d.non_monotone,
        "unbounded": d.unbounded,
    })
}

fn interval_diagnostics(ci: &IntervalResult) -> serde_json::Value {
    json!({
        "method": ci.method.tag(),
        "critical": ci.critical,
        "scale": ci.scale,
        "lower": endpoint_json(&ci.lower_diag),
        "upper": endpoint_json(&ci.upper_diag),
    })
}

fn emit(table: &Table, format: Format, out: &mut dyn Write) -> Result<()> {
    let text = match format {
        Format::Tsv => table.to_tsv(),
        Format::Json => table.to_json(),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn run_ci(
    data: &DataArgs,
    alpha: f64,
    method: MethodArg,
    format: Format,
    diagnostics: Option<DiagnosticsFormat>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 0.5]")));
    }
    let (sample, f) = data.load()?;
    let fit = KmFit::new(&sample);
    let mut rows = Vec::new();
    let mut diags = Vec::new();
    for m in method.methods() {
        let ci = match m {
            Method::ElChi2 => confidence_interval_fit(&fit, &f, alpha)?,
            Method::ScaledEl => scaled_interval_fit(&fit, &f, alpha)?,
        };
        for w in ci.warnings() {
            writeln!(err, "warning: {}: {w}", m.tag())?;
        }
        rows.push(interval_row(&ci, &f, sample.len(), sample.censored_fraction()));
        diags.push(interval_diagnostics(&ci));
    }
    if diagnostics.is_some() {
        writeln!(err, "{}", serde_json::to_string_pretty(&diags)?)?;
    }
    let columns = vec![
        "method", "lower", "upper", "theta_hat", "alpha", "functional", "n", "censored", "flags", "warnings",
    ];
    let table = Table { id: 0, columns, rows, max_deviation: 0.0 };
    let text = match format {
        Format::Tsv => table.to_tsv(),
        Format::Json => table.rows_to_json(),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    table: Option<u8>,
    scenario: Option<PathBuf>,
    reps: usize,
    seed: u64,
    path: Option<PathBuf>,
    format: Format,
    threads: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    if reps < MIN_REPS {
        return Err(Error::InvalidParameter(format!("reps must be >= {MIN_REPS}, got {reps}")));
    }
    let rendered = match (table, scenario) {
        (Some(id), None) => {
            let t = build_table(id, reps, seed, threads)?;
            writeln!(
                err,
                "table {id}: {} rows, reps={reps}, seed={seed}, max |deviation| from published = {:.4}",
                t.rows.len(),
                t.max_deviation
            )?;
            t
        }
        (None, Some(file)) => {
            let cfg: ScenarioConfig = serde_json::from_reader(std::fs::File::open(&file)?)
                .map_err(|e| Error::InvalidParameter(format!("{}: {e}", file.display())))?;
            let specs = cfg.scenarios()?;
            let report = run_coverage_study_with_threads(
                &specs,
                &cfg.alphas,
                &[Method::ScaledEl, Method::ElChi2],
                reps,
                seed,
                threads,
            )?;
            let t = report_table(&report);
            writeln!(err, "scenario {}: {} rows, reps={reps}, seed={seed}", cfg.label, t.rows.len())?;
            t
        }
        _ => return Err(Error::InvalidParameter("give exactly one of --table or --scenario".into())),
    };
    match path {
        Some(p) => {
            let mut file = std::fs::File::create(p)?;
            emit(&rendered, format, &mut file)
        }
        None => emit(&rendered, format, out),
    }
}

fn finite_or_str(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("NA")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn run_diagnose(data: &DataArgs, theta: Option<f64>, out: &mut dyn Write) -> Result<()> {
    let (sample, f) = data.load()?;
    let fit = KmFit::new(&sample);
    let theta_hat = point_estimate_fit(&fit, &f)?;
    let theta = theta.unwrap_or(theta_hat);
    let xi: Vec<f64> = fit.times().iter().map(|&t| f.g(t, theta)).collect();
    let w = influence_values(&fit, &xi)?;
    let v = weighted_scores(&fit, &xi)?;
    let n = w.len() as f64;
    let w_mean = w.iter().sum::<f64>() / n;
    let integral = fit.integrate_values(&xi);
    let lambda = match solve_lambda(&w) {
        Ok(d) => json!({
            "lambda": d.lambda,
            "bracket": [finite_or_str(d.bracket.0), finite_or_str(d.bracket.1)],
            "iterations": d.iterations,
            "score_residual": d.score_residual,
            "statistic": d.log_ratio(&w),
            "feasible": true,
        }),
        Err(Error::InfeasibleConstraint) => json!({ "feasible": false, "statistic": "inf" }),
        Err(e) => return Err(e),
    };
    let jack = if sample.len() >= 3 {
        finite_or_str(jackknife_variance_fit(&fit, &f, theta_hat)?)
    } else {
        json!("NA")
    };
    let doc = json!({
        "n": sample.len(),
        "events": sample.event_count(),
        "censored": sample.censored_fraction(),
        "distinct_times": sample.has_distinct_times(),
        "functional": f.label(),
        "experimental": f.is_experimental(),
        "theta_hat": theta_hat,
        "theta": theta,
        "km_mass": fit.total_mass(),
        "w": {
            "mean": w_mean,
            "km_integral": integral,
            "identity_residual": (w_mean - integral).abs(),
            "variance": sample_variance(&w),
            "min": w.iter().copied().fold(f64::INFINITY, f64::min),
            "max": w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        },
        "v": {
            "mean": v.iter().sum::<f64>() / n,
            "variance": sample_variance(&v),
        },
        "jackknife_variance": jack,
        "el": lambda,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}
