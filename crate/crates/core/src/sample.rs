//! Right-censored samples and the step functions every estimator is built on.
//!
//! A [`CensoredSample`] is always sorted by time ascending, with events ahead of
//! censorings at a tied time. That ordering is the product-limit tie
//! convention: an event at time `t` sees a risk set that still contains the
//! units censored at `t`.

use std::cmp::Ordering;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed pair `(Z, δ)`: `time = min(Y, C)`, `event = Y <= C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoredObservation {
    pub time: f64,
    pub event: bool,
}

impl CensoredObservation {
    pub fn new(time: f64, event: bool) -> Self {
        Self { time, event }
    }

    pub fn event(time: f64) -> Self {
        Self::new(time, true)
    }

    pub fn censored(time: f64) -> Self {
        Self::new(time, false)
    }

    /// Total order used by [`CensoredSample`]: time ascending, events first.
    fn sort_cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| other.event.cmp(&self.event))
    }
}

/// A validated, sorted right-censored sample with `n >= 2` and at least one event.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    obs: Vec<CensoredObservation>,
}

impl CensoredSample {
    pub fn new(mut obs: Vec<CensoredObservation>) -> Result<Self> {
        for (i, o) in obs.iter().enumerate() {
            if !o.time.is_finite() || o.time < 0.0 {
                return Err(Error::validation(
                    Some(i + 1),
                    format!("time must be finite and nonnegative, got {}", o.time),
                ));
            }
        }
        if obs.len() < 2 {
            return Err(Error::DegenerateSample(format!(
                "need at least 2 observations, got {}",
                obs.len()
            )));
        }
        if !obs.iter().any(|o| o.event) {
            return Err(Error::DegenerateSample("no observed events".into()));
        }
        obs.sort_by(CensoredObservation::sort_cmp);
        Ok(Self { obs })
    }

    /// Builds a sample from parallel slices of times and event flags.
    pub fn from_pairs(times: &[f64], events: &[bool]) -> Result<Self> {
        if times.len() != events.len() {
            return Err(Error::InvalidParameter(format!(
                "{} times but {} event flags",
                times.len(),
                events.len()
            )));
        }
        Self::new(
            times
                .iter()
                .zip(events)
                .map(|(&t, &e)| CensoredObservation::new(t, e))
                .collect(),
        )
    }

    pub fn observations(&self) -> &[CensoredObservation] {
        &self.obs
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.obs.iter().map(|o| o.time)
    }

    pub fn events(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        self.obs.iter().map(|o| o.event)
    }

    pub fn event_count(&self) -> usize {
        self.obs.iter().filter(|o| o.event).count()
    }

    pub fn censored_fraction(&self) -> f64 {
        1.0 - self.event_count() as f64 / self.len() as f64
    }

    /// True when no two observations share a time.
    pub fn has_distinct_times(&self) -> bool {
        self.obs.windows(2).all(|w| w[0].time < w[1].time)
    }

    pub fn max_time(&self) -> f64 {
        self.obs[self.obs.len() - 1].time
    }

    /// Maps every time through `f`, which must be nondecreasing.
    pub fn map_times(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.obs
                .iter()
                .map(|o| CensoredObservation::new(f(o.time), o.event))
                .collect(),
        )
    }

    /// Groups of tied times as `(time, events, censorings, first index)`.
    pub(crate) fn tie_groups(&self) -> Vec<TieGroup> {
        let mut groups: Vec<TieGroup> = Vec::new();
        for (i, o) in self.obs.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if g.time == o.time => {
                    if o.event {
                        g.events += 1;
                    } else {
                        g.censored += 1;
                    }
                }
                _ => groups.push(TieGroup {
                    time: o.time,
                    events: o.event as usize,
                    censored: (!o.event) as usize,
                    start: i,
                }),
            }
        }
        groups
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TieGroup {
    pub time: f64,
    pub events: usize,
    pub censored: usize,
    pub start: usize,
}

impl TieGroup {
    pub fn size(&self) -> usize {
        self.events + self.censored
    }
}

/// Column mapping for CSV ingestion.
#[derive(Debug, Clone)]
pub struct CsvConfig {
    pub time_column: String,
    pub event_column: String,
    pub delimiter: u8,
}

impl Default for CsvConfig {
    fn default() -> Self {
        Self {
            time_column: "time".into(),
            event_column: "event".into(),
            delimiter: b',',
        }
    }
}

pub fn ingest_csv(path: impl AsRef<Path>, config: &CsvConfig) -> Result<CensoredSample> {
    let file = std::fs::File::open(path)?;
    read_csv(file, config)
}

pub fn read_csv<R: Read>(reader: R, config: &CsvConfig) -> Result<CensoredSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::validation(None, format!("missing column `{name}`"))
        })
    };
    let time_idx = column(&config.time_column)?;
    let event_idx = column(&config.event_column)?;

    let mut obs = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let time: f64 = field(time_idx).parse().map_err(|_| {
            Error::validation(Some(row), format!("cannot parse time `{}`", field(time_idx)))
        })?;
        if !time.is_finite() || time < 0.0 {
            return Err(Error::validation(
                Some(row),
                format!("time must be finite and nonnegative, got {time}"),
            ));
        }
        let event = match field(event_idx).parse::<f64>() {
            Ok(v) if v == 1.0 => true,
            Ok(v) if v == 0.0 => false,
            _ => {
                return Err(Error::validation(
                    Some(row),
                    format!("event must be 0 or 1, got `{}`", field(event_idx)),
                ))
            }
        };
        obs.push(CensoredObservation::new(time, event));
    }
    CensoredSample::new(obs)
}

pub fn write_csv<W: Write>(sample: &CensoredSample, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["time", "event"])?;
    for o in sample.observations() {
        wtr.write_record([o.time.to_string(), (o.event as u8).to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Right-continuous piecewise-constant function.
///
/// `values[k]` holds on `[knots[k], knots[k+1])`; `initial` holds on
/// `(-inf, knots[0])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    initial: f64,
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(initial: f64, knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::InvalidParameter(
                "knots and values differ in length".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "knots must be strictly ascending".into(),
            ));
        }
        Ok(Self {
            initial,
            knots,
            values,
        })
    }

    /// Accumulates `(location, jump)` pairs, which must be sorted by location.
    /// Equal locations are merged.
    pub(crate) fn from_sorted_jumps(initial: f64, jumps: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut knots: Vec<f64> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut level = initial;
        for (x, dj) in jumps {
            level += dj;
            match knots.last() {
                Some(&last) if last == x => *values.last_mut().unwrap() = level,
                _ => {
                    debug_assert!(knots.last().map_or(true, |&l| l < x));
                    knots.push(x);
                    values.push(level);
                }
            }
        }
        Self {
            initial,
            knots,
            values,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.knots.partition_point(|&k| k <= x) {
            0 => self.initial,
            k => self.values[k - 1],
        }
    }

    /// Left limit `f(x-)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        match self.knots.partition_point(|&k| k < x) {
            0 => self.initial,
            k => self.values[k - 1],
        }
    }

    /// `f{x} = f(x) - f(x-)`; zero off the knot set.
    pub fn jump_at(&self, x: f64) -> f64 {
        match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(k) => {
                let before = if k == 0 { self.initial } else { self.values[k - 1] };
                self.values[k] - before
            }
            Err(_) => 0.0,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    /// Value to the right of the last knot.
    pub fn terminal(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.initial)
    }

    pub fn is_nondecreasing(&self) -> bool {
        let mut prev = self.initial;
        self.values.iter().all(|&v| {
            let ok = v >= prev;
            prev = v;
            ok
        })
    }

    /// Iterates `(knot, jump)` pairs.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.iter().enumerate().map(move |(k, &x)| {
            let before = if k == 0 { self.initial } else { self.values[k - 1] };
            (x, self.values[k] - before)
        })
    }
}
