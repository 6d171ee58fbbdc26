//! The published simulation tables: scenario layouts, reference values, and
//! rendering of reproduced tables as TSV or JSON.

use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::distribution::DistributionSpec;
use crate::el::Method;
use crate::error::{Error, Result};
use crate::functional::{Builtin, FunctionalSpec};
use crate::simulation::{
    mrl_threshold, run_coverage_study_with_threads, variance_comparison_with_threads, CoverageReport, ScenarioSpec,
};

pub const SIZES: [usize; 4] = [20, 40, 60, 80];
pub const MRL_LEVELS: [f64; 4] = [0.90, 0.70, 0.50, 0.30];

/// The four mean-functional scenarios, in table column order.
pub const MEAN_SCENARIOS: [&str; 4] = ["uniform-c2.5", "uniform-c1.3", "weibull-exp4.3", "weibull-exp2.7"];

pub fn lifetime_uniform() -> DistributionSpec {
    DistributionSpec::uniform(0.0, 1.0)
}

pub fn lifetime_weibull() -> DistributionSpec {
    DistributionSpec::weibull(1.0, 10.0)
}

/// Scenario by label, at sample size `n`.
pub fn mean_scenario(label: &str, n: usize) -> Result<ScenarioSpec> {
    let (life, cens) = match label {
        "uniform-c2.5" => (lifetime_uniform(), DistributionSpec::uniform(0.0, 2.5)),
        "uniform-c1.3" => (lifetime_uniform(), DistributionSpec::uniform(0.0, 1.3)),
        "weibull-exp4.3" => (lifetime_weibull(), DistributionSpec::exponential(4.3)),
        "weibull-exp2.7" => (lifetime_weibull(), DistributionSpec::exponential(2.7)),
        _ => return Err(Error::InvalidParameter(format!("unknown scenario `{label}`"))),
    };
    ScenarioSpec::new(label, life, cens, n, FunctionalSpec::mean())
}

/// Mean residual life scenario at the threshold with `P(Y >= t0) = level`.
pub fn mrl_scenario(censoring_mean: f64, level: f64, n: usize) -> Result<ScenarioSpec> {
    let life = lifetime_weibull();
    let t0 = mrl_threshold(&life, level)?;
    let f = FunctionalSpec::builtin(Builtin::MeanResidualLife { t0 })?;
    ScenarioSpec::new(
        format!("weibull-exp{censoring_mean}-p{level:.2}"),
        life,
        DistributionSpec::exponential(censoring_mean),
        n,
        f,
    )
}

// Published coverage (table 1) and width (table 2) for the mean.
// Index: [scenario][alpha: 0.10, 0.05][n] -> (scaled, el).
const T1: [[[(f64, f64); 4]; 2]; 4] = [
    [
        [(0.876, 0.881), (0.895, 0.897), (0.897, 0.897), (0.897, 0.898)],
        [(0.928, 0.935), (0.946, 0.949), (0.947, 0.948), (0.947, 0.947)],
    ],
    [
        [(0.841, 0.861), (0.885, 0.890), (0.888, 0.892), (0.897, 0.900)],
        [(0.897, 0.916), (0.934, 0.941), (0.941, 0.946), (0.945, 0.947)],
    ],
    [
        [(0.871, 0.871), (0.889, 0.890), (0.893, 0.893), (0.896, 0.896)],
        [(0.922, 0.924), (0.939, 0.941), (0.945, 0.946), (0.947, 0.948)],
    ],
    [
        [(0.867, 0.869), (0.890, 0.891), (0.890, 0.891), (0.893, 0.894)],
        [(0.916, 0.924), (0.939, 0.943), (0.944, 0.946), (0.945, 0.947)],
    ],
];

const T2: [[[(f64, f64); 4]; 2]; 4] = [
    [
        [(0.217, 0.218), (0.157, 0.157), (0.129, 0.129), (0.112, 0.112)],
        [(0.258, 0.259), (0.187, 0.187), (0.154, 0.154), (0.133, 0.133)],
    ],
    [
        [(0.220, 0.227), (0.162, 0.164), (0.134, 0.134), (0.116, 0.116)],
        [(0.260, 0.270), (0.192, 0.196), (0.159, 0.160), (0.138, 0.139)],
    ],
    [
        [(0.092, 0.091), (0.066, 0.065), (0.054, 0.053), (0.046, 0.046)],
        [(0.110, 0.109), (0.079, 0.078), (0.064, 0.064), (0.056, 0.055)],
    ],
    [
        [(0.097, 0.096), (0.069, 0.069), (0.057, 0.057), (0.049, 0.049)],
        [(0.116, 0.116), (0.083, 0.083), (0.068, 0.068), (0.059, 0.059)],
    ],
];

// Published (s_W², s_V²); index [scenario][n].
const T3: [[(f64, f64); 4]; 4] = [
    [(0.0935, 0.1121), (0.0938, 0.1115), (0.0937, 0.1107), (0.0934, 0.1100)],
    [(0.1005, 0.1386), (0.1013, 0.1401), (0.1016, 0.1402), (0.1012, 0.1393)],
    [(0.0157, 0.0163), (0.0157, 0.0162), (0.0157, 0.0161), (0.0158, 0.0162)],
    [(0.0175, 0.0185), (0.0176, 0.0184), (0.0176, 0.0183), (0.0176, 0.0183)],
];

// Published mean residual life results at 1 - α = 0.90.
// Index: [n][method: scaled, el][level] -> (coverage, width).
type MrlTable = [[[(f64, f64); 4]; 2]; 4];

const T4: MrlTable = [
    [
        [(0.878, 0.074), (0.851, 0.062), (0.795, 0.054), (0.659, 0.044)],
        [(0.881, 0.074), (0.863, 0.062), (0.820, 0.056), (0.701, 0.048)],
    ],
    [
        [(0.889, 0.053), (0.878, 0.046), (0.859, 0.042), (0.800, 0.039)],
        [(0.891, 0.053), (0.884, 0.046), (0.874, 0.043), (0.833, 0.041)],
    ],
    [
        [(0.897, 0.044), (0.892, 0.037), (0.877, 0.035), (0.839, 0.034)],
        [(0.898, 0.044), (0.897, 0.038), (0.888, 0.035), (0.863, 0.035)],
    ],
    [
        [(0.895, 0.038), (0.888, 0.033), (0.884, 0.031), (0.853, 0.030)],
        [(0.896, 0.038), (0.892, 0.033), (0.892, 0.031), (0.871, 0.031)],
    ],
];

const T5: MrlTable = [
    [
        [(0.864, 0.079), (0.833, 0.065), (0.760, 0.055), (0.605, 0.043)],
        [(0.872, 0.079), (0.851, 0.065), (0.793, 0.058), (0.659, 0.048)],
    ],
    [
        [(0.887, 0.057), (0.872, 0.048), (0.846, 0.045), (0.777, 0.041)],
        [(0.891, 0.057), (0.882, 0.049), (0.867, 0.046), (0.818, 0.043)],
    ],
    [
        [(0.892, 0.046), (0.888, 0.040), (0.870, 0.037), (0.822, 0.036)],
        [(0.895, 0.046), (0.895, 0.040), (0.884, 0.038), (0.851, 0.037)],
    ],
    [
        [(0.892, 0.040), (0.888, 0.035), (0.878, 0.033), (0.845, 0.032)],
        [(0.895, 0.040), (0.895, 0.035), (0.887, 0.033), (0.869, 0.033)],
    ],
];

fn size_index(n: usize) -> Option<usize> {
    SIZES.iter().position(|&s| s == n)
}

fn alpha_index(alpha: f64) -> Option<usize> {
    if (alpha - 0.10).abs() < 1e-12 {
        Some(0)
    } else if (alpha - 0.05).abs() < 1e-12 {
        Some(1)
    } else {
        None
    }
}

fn pick(pair: (f64, f64), method: Method) -> f64 {
    match method {
        Method::ScaledEl => pair.0,
        Method::ElChi2 => pair.1,
    }
}

/// Published coverage for the mean functional.
pub fn published_mean_coverage(scenario: &str, n: usize, alpha: f64, method: Method) -> Option<f64> {
    let s = MEAN_SCENARIOS.iter().position(|&l| l == scenario)?;
    Some(pick(T1[s][alpha_index(alpha)?][size_index(n)?], method))
}

/// Published average width for the mean functional.
pub fn published_mean_width(scenario: &str, n: usize, alpha: f64, method: Method) -> Option<f64> {
    let s = MEAN_SCENARIOS.iter().position(|&l| l == scenario)?;
    Some(pick(T2[s][alpha_index(alpha)?][size_index(n)?], method))
}

/// Published `(s_W², s_V²)`.
pub fn published_variances(scenario: &str, n: usize) -> Option<(f64, f64)> {
    let s = MEAN_SCENARIOS.iter().position(|&l| l == scenario)?;
    Some(T3[s][size_index(n)?])
}

/// Published `(coverage, width)` for mean residual life; `censoring_mean` is 4.3 or 2.7.
pub fn published_mrl(censoring_mean: f64, level: f64, n: usize, method: Method) -> Option<(f64, f64)> {
    let table = if censoring_mean == 4.3 {
        &T4
    } else if censoring_mean == 2.7 {
        &T5
    } else {
        return None;
    };
    let l = MRL_LEVELS.iter().position(|&p| (p - level).abs() < 1e-12)?;
    let m = match method {
        Method::ScaledEl => 0,
        Method::ElChi2 => 1,
    };
    Some(table[size_index(n)?][m][l])
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
}

impl Cell {
    fn tsv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) if x.is_nan() => "NA".into(),
            Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(x) => format_num(*x),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) if x.is_finite() => {
                Value::from(format_num(*x).parse::<f64>().expect("formatted number"))
            }
            Cell::Num(x) => Value::String(Cell::Num(*x).tsv()),
        }
    }
}

/// Six significant decimals; enough for coverage and width at any practical rep count.
fn format_num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> Cell {
    x.map(Cell::Num).unwrap_or_else(|| Cell::Text("NA".into()))
}

/// A rendered table: a header and rows of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub id: u8,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Largest `|reproduced - published|` over the cells with a published value.
    pub max_deviation: f64,
}

impl Table {
    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::tsv).collect();
            let _ = writeln!(out, "{}", line.join("\t"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({ "table": self.id, "max_deviation": self.max_deviation, "rows": self.row_objects() });
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }

    /// Just the rows, as a JSON array of objects keyed by column.
    pub fn rows_to_json(&self) -> String {
        serde_json::to_string_pretty(&self.row_objects()).expect("serializable") + "\n"
    }

    fn row_objects(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self.columns.iter().map(|c| c.to_string()).zip(r.iter().map(Cell::json)).collect();
                Value::Object(m)
            })
            .collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn num(&self, row: usize, name: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }
}

const METHODS: [Method; 2] = [Method::ScaledEl, Method::ElChi2];

fn mean_study(reps: usize, seed: u64, threads: Option<usize>) -> Result<CoverageReport> {
    let mut specs = Vec::new();
    for label in MEAN_SCENARIOS {
        for n in SIZES {
            specs.push(mean_scenario(label, n)?);
        }
    }
    run_coverage_study_with_threads(&specs, &[0.10, 0.05], &METHODS, reps, seed, threads)
}

fn coverage_table(id: u8, report: &CoverageReport) -> Table {
    let mut rows = Vec::new();
    let mut max_dev: f64 = 0.0;
    for r in &report.rows {
        let published = if id == 1 {
            published_mean_coverage(&r.scenario, r.n, r.alpha, r.method)
        } else {
            published_mean_width(&r.scenario, r.n, r.alpha, r.method)
        };
        let value = if id == 1 { r.coverage } else { r.avg_width };
        let dev = published.map(|p| value - p);
        if let Some(d) = dev {
            max_dev = max_dev.max(d.abs());
        }
        rows.push(vec![
            Cell::Text(r.scenario.clone()),
            Cell::Num(r.censored),
            Cell::Int(r.n as u64),
            Cell::Num(1.0 - r.alpha),
            Cell::Text(r.method.tag().into()),
            Cell::Num(r.coverage),
            Cell::Num(r.avg_width),
            opt(published),
            opt(dev),
            Cell::Int(r.reps as u64),
            Cell::Int(r.seed),
            Cell::Int(r.failures as u64),
        ]);
    }
    Table {
        id,
        columns: vec![
            "scenario", "censored", "n", "level", "method", "coverage", "avg_width", "published", "deviation", "reps",
            "seed", "failures",
        ],
        rows,
        max_deviation: max_dev,
    }
}

fn variance_table(reps: usize, seed: u64, threads: Option<usize>) -> Result<Table> {
    let mut rows = Vec::new();
    let mut max_dev: f64 = 0.0;
    for label in MEAN_SCENARIOS {
        for n in SIZES {
            let spec = mean_scenario(label, n)?;
            let v = variance_comparison_with_threads(&spec, reps, seed, threads)?;
            let published = published_variances(label, n);
            if let Some((pw, pv)) = published {
                max_dev = max_dev.max((v.s_w2 - pw).abs()).max((v.s_v2 - pv).abs());
            }
            rows.push(vec![
                Cell::Text(label.into()),
                Cell::Int(n as u64),
                Cell::Num(v.s_w2),
                Cell::Num(v.s_v2),
                Cell::Num(v.w_smaller),
                opt(published.map(|p| p.0)),
                opt(published.map(|p| p.1)),
                Cell::Int(reps as u64),
                Cell::Int(seed),
                Cell::Int(v.failures as u64),
            ]);
        }
    }
    Ok(Table {
        id: 3,
        columns: vec![
            "scenario", "n", "s_W2", "s_V2", "w_smaller", "published_s_W2", "published_s_V2", "reps", "seed", "failures",
        ],
        rows,
        max_deviation: max_dev,
    })
}

fn mrl_table(id: u8, reps: usize, seed: u64, threads: Option<usize>) -> Result<Table> {
    let cmean = if id == 4 { 4.3 } else { 2.7 };
    let mut specs = Vec::new();
    let mut levels = Vec::new();
    for n in SIZES {
        for level in MRL_LEVELS {
            specs.push(mrl_scenario(cmean, level, n)?);
            levels.push(level);
        }
    }
    let report = run_coverage_study_with_threads(&specs, &[0.10], &METHODS, reps, seed, threads)?;
    let mut rows = Vec::new();
    let mut max_dev: f64 = 0.0;
    for (k, spec) in specs.iter().enumerate() {
        for method in METHODS {
            let r = report.find(&spec.label, spec.n, 0.10, method).expect("row present");
            let published = published_mrl(cmean, levels[k], spec.n, method);
            if let Some((c, _)) = published {
                max_dev = max_dev.max((r.coverage - c).abs());
            }
            let t0 = match spec.functional.as_builtin() {
                Some(Builtin::MeanResidualLife { t0 }) => t0,
                _ => f64::NAN,
            };
            rows.push(vec![
                Cell::Text(spec.label.clone()),
                Cell::Num(r.censored),
                Cell::Num(levels[k]),
                Cell::Num(t0),
                Cell::Num(spec.theta0),
                Cell::Int(spec.n as u64),
                Cell::Num(0.90),
                Cell::Text(method.tag().into()),
                Cell::Num(r.coverage),
                Cell::Num(r.avg_width),
                opt(published.map(|p| p.0)),
                opt(published.map(|p| p.1)),
                Cell::Int(reps as u64),
                Cell::Int(seed),
                Cell::Int(r.failures as u64),
            ]);
        }
    }
    Ok(Table {
        id,
        columns: vec![
            "scenario",
            "censored",
            "p_t0",
            "t0",
            "theta0",
            "n",
            "level",
            "method",
            "coverage",
            "avg_width",
            "published_coverage",
            "published_width",
            "reps",
            "seed",
            "failures",
        ],
        rows,
        max_deviation: max_dev,
    })
}

/// Reproduces one of the five published tables.
pub fn build_table(id: u8, reps: usize, seed: u64, threads: Option<usize>) -> Result<Table> {
    match id {
        1 | 2 => Ok(coverage_table(id, &mean_study(reps, seed, threads)?)),
        3 => variance_table(reps, seed, threads),
        4 | 5 => mrl_table(id, reps, seed, threads),
        _ => Err(Error::InvalidParameter(format!("table must be 1..=5, got {id}"))),
    }
}

/// Renders a custom coverage study in the layout of the mean tables.
pub fn report_table(report: &CoverageReport) -> Table {
    let mut t = coverage_table(1, report);
    t.id = 0;
    t
}
