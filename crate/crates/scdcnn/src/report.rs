//! Experiment reports and their CSV and JSON forms.
//!
//! Report files hold only seed-determined content, so a rerun of the same
//! configuration writes the same bytes. Wall time goes to stderr instead.

use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map};

use crate::error::{Error, Result};

/// A grid coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Value {
    fn rank(&self) -> u8 {
        match self {
            Value::Int(_) | Value::Real(_) => 0,
            Value::Text(_) => 1,
        }
    }

    fn cmp_key(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (a, b) if a.rank() == 0 && b.rank() == 0 => a.as_f64().total_cmp(&b.as_f64()),
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }

    fn as_f64(&self) -> f64 {
        match *self {
            Value::Int(i) => i as f64,
            Value::Real(r) => r,
            Value::Text(_) => f64::NAN,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(i64::from(v))
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub params: Vec<Value>,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
    /// Values for the report's extra columns, in order.
    pub extras: Vec<f64>,
}

impl Cell {
    pub fn new(params: Vec<Value>, samples: &[f64]) -> Self {
        let (mean, std) = mean_std(samples);
        Cell {
            params,
            mean,
            std,
            trials: samples.len(),
            extras: Vec::new(),
        }
    }
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: String,
    /// What `mean` and `std` measure.
    pub metric: String,
    pub seed: u64,
    pub trials: usize,
    pub keys: Vec<String>,
    pub extra_keys: Vec<String>,
    pub cells: Vec<Cell>,
    pub warnings: Vec<String>,
}

pub const TOOL_VERSION: &str = concat!("scdcnn ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Report {
    pub fn new(experiment: &str, metric: &str, seed: u64, trials: usize, keys: &[&str]) -> Self {
        Report {
            experiment: experiment.to_string(),
            metric: metric.to_string(),
            seed,
            trials,
            keys: keys.iter().map(|k| k.to_string()).collect(),
            extra_keys: Vec::new(),
            cells: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Cell at the given coordinates.
    pub fn cell(&self, params: &[Value]) -> Option<&Cell> {
        self.cells.iter().find(|c| c.params == params)
    }

    /// Sorts cells lexicographically over the grid keys.
    pub fn sort(&mut self) {
        self.cells.sort_by(|a, b| {
            a.params
                .iter()
                .zip(&b.params)
                .map(|(x, y)| x.cmp_key(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = self.keys.clone();
        h.extend(["mean", "std", "trials"].map(String::from));
        h.extend(self.extra_keys.iter().cloned());
        h
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| {
                let mut r: Vec<String> = c.params.iter().map(Value::to_string).collect();
                r.push(c.mean.to_string());
                r.push(c.std.to_string());
                r.push(c.trials.to_string());
                r.extend(c.extras.iter().map(f64::to_string));
                r
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(self.header()).map_err(io)?;
        for r in self.rows() {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> String {
        let mut values = Map::new();
        for (i, k) in self.keys.iter().enumerate() {
            let mut seen: Vec<Value> = Vec::new();
            for c in &self.cells {
                if !seen.contains(&c.params[i]) {
                    seen.push(c.params[i].clone());
                }
            }
            seen.sort_by(|a, b| a.cmp_key(b));
            values.insert(k.clone(), json!(seen));
        }
        let cells: Vec<serde_json::Value> = self
            .cells
            .iter()
            .map(|c| {
                let params: Map<String, serde_json::Value> =
                    self.keys.iter().cloned().zip(c.params.iter().map(|v| json!(v))).collect();
                let extras: Map<String, serde_json::Value> =
                    self.extra_keys.iter().cloned().zip(c.extras.iter().map(|v| json!(v))).collect();
                json!({
                    "params": params,
                    "mean": c.mean,
                    "std": c.std,
                    "trials": c.trials,
                    "extras": extras,
                })
            })
            .collect();
        let doc = json!({
            "meta": {
                "experiment": self.experiment,
                "metric": self.metric,
                "averaging": "per-trial absolute error, averaged over trials",
                "seed": self.seed,
                "trials": self.trials,
                "tool_version": TOOL_VERSION,
                "warnings": self.warnings,
            },
            "grid": {
                "keys": self.keys,
                "values": values,
                "extra_columns": self.extra_keys,
            },
            "cells": cells,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }
}

/// Writes `r` to `path`, or to stdout when `path` is `None`.
pub fn emit_report(r: &Report, format: Format, path: Option<&Path>) -> Result<()> {
    let text = r.render(format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_numerically_then_text() {
        let mut r = Report::new("x", "m", 0, 1, &["n", "l"]);
        for (n, l) in [(64usize, "b"), (16, "b"), (16, "a"), (128, "a")] {
            r.cells.push(Cell::new(vec![n.into(), l.into()], &[1.0]));
        }
        r.sort();
        let order: Vec<String> = r.rows().iter().map(|row| format!("{}{}", row[0], row[1])).collect();
        assert_eq!(order, ["16a", "16b", "64b", "128a"]);
    }

    #[test]
    fn mean_and_population_std() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(mean_std(&[]), (0.0, 0.0));
    }
}
