//! Right-censored survival data: container, CSV I/O and the Kaplan-Meier
//! product-limit estimator.

use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A right-censored sample. `times[i]` is the follow-up time of subject `i`
/// and `status[i]` is 1 if the event was observed at that time, 0 if the
/// subject was censored.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    status: Vec<u8>,
}

/// Event/censoring counts for a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct CensoringSummary {
    pub n: usize,
    pub events: usize,
    pub censored: usize,
}

impl CensoringSummary {
    /// Fraction of censored records.
    pub fn rate(&self) -> f64 {
        self.censored as f64 / self.n as f64
    }
}

impl SurvivalDataset {
    /// Builds a dataset, rejecting empty input, length mismatches,
    /// non-positive or non-finite times and status flags outside {0, 1}.
    pub fn new(times: Vec<f64>, status: Vec<u8>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if times.len() != status.len() {
            return Err(Error::InvalidConfig(format!(
                "times has {} entries but status has {}",
                times.len(),
                status.len()
            )));
        }
        let bad_times = times.iter().filter(|t| !(t.is_finite() && **t > 0.0)).count();
        if bad_times > 0 {
            let first = times.iter().position(|t| !(t.is_finite() && *t > 0.0)).unwrap();
            return Err(Error::BadRecord {
                row: first + 1,
                message: format!(
                    "time {} is not positive and finite ({} such records)",
                    times[first], bad_times
                ),
            });
        }
        if let Some(first) = status.iter().position(|s| *s > 1) {
            return Err(Error::BadRecord {
                row: first + 1,
                message: format!("status {} is outside {{0, 1}}", status[first]),
            });
        }
        Ok(Self { times, status })
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn status(&self) -> &[u8] {
        &self.status
    }

    pub fn max_time(&self) -> f64 {
        self.times.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn censoring_summary(&self) -> CensoringSummary {
        let events = self.status.iter().filter(|s| **s == 1).count();
        CensoringSummary {
            n: self.n(),
            events,
            censored: self.n() - events,
        }
    }
}

/// Reads a dataset from a CSV file with a header line. `time_col` and
/// `status_col` name the columns to use; remaining columns are ignored.
pub fn load_dataset(path: &Path, time_col: &str, status_col: &str) -> Result<SurvivalDataset> {
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io {
            path: display.clone(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => Error::Csv {
            path: display.clone(),
            source: e,
        },
    })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: display.clone(),
            source: e,
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                name: name.to_string(),
                path: display.clone(),
            })
    };
    let t_idx = col(time_col)?;
    let s_idx = col(status_col)?;

    let mut times = Vec::new();
    let mut status = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            path: display.clone(),
            source: e,
        })?;
        let row = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(times.len() + 2);
        let parse = |idx: usize, what: &str| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| Error::BadRecord {
                row,
                message: format!("cannot parse {what} value {raw:?} as a number"),
            })
        };
        let t = parse(t_idx, "time")?;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::BadRecord {
                row,
                message: format!("time {t} is not positive and finite"),
            });
        }
        let s = parse(s_idx, "status")?;
        if s != 0.0 && s != 1.0 {
            return Err(Error::BadRecord {
                row,
                message: format!("status {s} is outside {{0, 1}}"),
            });
        }
        times.push(t);
        status.push(s as u8);
    }
    if times.is_empty() {
        return Err(Error::EmptyDataset);
    }
    SurvivalDataset::new(times, status)
}

/// Writes a dataset as CSV with columns `time,status`.
pub fn write_dataset(dataset: &SurvivalDataset, path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let io_err = |e: std::io::Error| Error::Io {
        path: display.clone(),
        source: e,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    let io_err = |e: std::io::Error| Error::Io {
        path: display.clone(),
        source: e,
    };
    writeln!(out, "time,status").map_err(io_err)?;
    for (t, s) in dataset.times.iter().zip(&dataset.status) {
        writeln!(out, "{t},{s}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// A right-continuous step function equal to 1 left of the first knot and to
/// `values[i]` on `[knots[i], knots[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|k| *k <= t);
        if idx == 0 {
            1.0
        } else {
            self.values[idx - 1]
        }
    }
}

/// Kaplan-Meier product-limit estimate of the survival function. At tied
/// times, events are processed before censorings: subjects censored at `t`
/// still count as at risk for events at `t`.
pub fn kaplan_meier(dataset: &SurvivalDataset) -> StepFunction {
    let mut order: Vec<usize> = (0..dataset.n()).collect();
    order.sort_by(|&a, &b| dataset.times[a].total_cmp(&dataset.times[b]));

    let mut knots = Vec::new();
    let mut values = Vec::new();
    let mut survival = 1.0;
    let mut at_risk = dataset.n();
    let mut i = 0;
    while i < order.len() {
        let t = dataset.times[order[i]];
        let mut events = 0usize;
        let mut group = 0usize;
        while i < order.len() && dataset.times[order[i]] == t {
            events += usize::from(dataset.status[order[i]] == 1);
            group += 1;
            i += 1;
        }
        if events > 0 {
            survival *= 1.0 - events as f64 / at_risk as f64;
            knots.push(t);
            values.push(survival);
        }
        at_risk -= group;
    }
    StepFunction { knots, values }
}
