//! Loading and normalization of UCR-archive-format datasets.
//!
//! A dataset file holds one labeled series per line: the first token is the
//! integer class label, the remaining tokens are the values, tab- or
//! comma-delimited. All series in a file must have the same length.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One labeled, real-valued univariate series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    /// Dataset-unique index.
    pub id: usize,
    /// Class identifier.
    pub label: i32,
    pub values: Vec<f64>,
}

/// A named train/test split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub train: Vec<TimeSeries>,
    pub test: Vec<TimeSeries>,
    pub class_set: BTreeSet<i32>,
}

impl Dataset {
    /// Assemble a dataset from two loaded halves, re-numbering test ids so
    /// train and test ids are disjoint.
    pub fn from_halves(
        name: impl Into<String>,
        train: Vec<TimeSeries>,
        mut test: Vec<TimeSeries>,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyInput("training split has no series".into()));
        }
        let series_len = train[0].values.len();
        for ts in train.iter().chain(test.iter()) {
            if ts.values.len() != series_len {
                return Err(Error::LengthMismatch(format!(
                    "series {} has length {}, expected {}",
                    ts.id,
                    ts.values.len(),
                    series_len
                )));
            }
        }
        let offset = train.len();
        for ts in &mut test {
            ts.id += offset;
        }
        let class_set = train
            .iter()
            .chain(test.iter())
            .map(|ts| ts.label)
            .collect();
        Ok(Dataset {
            name: name.into(),
            train,
            test,
            class_set,
        })
    }

    /// z-normalize every series in both splits.
    pub fn znormalized(&self) -> Dataset {
        Dataset {
            name: self.name.clone(),
            train: self.train.iter().map(znormalize).collect(),
            test: self.test.iter().map(znormalize).collect(),
            class_set: self.class_set.clone(),
        }
    }

    pub fn series_len(&self) -> usize {
        self.train[0].values.len()
    }
}

/// Load one half (train or test) of a UCR-format dataset.
///
/// Each line is `label<delim>v1<delim>v2...`; ids are assigned in file order
/// starting at 0. Labels may be written as integers or integral floats
/// (`"1"`, `"1.0"`, `"1.0e0"`). Fully empty lines are skipped.
pub fn load_ucr(path: &Path, delimiter: char) -> Result<Vec<TimeSeries>> {
    let raw = std::fs::read_to_string(path)?;
    let mut out: Vec<TimeSeries> = Vec::new();
    let mut series_len = None;
    for (lineno, line) in raw.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let mut tokens = line.split(delimiter).map(str::trim);
        let label_tok = tokens.next().unwrap_or("");
        let label = parse_label(label_tok)
            .ok_or_else(|| parse_err(format!("bad class label {label_tok:?}")))?;
        let mut values = Vec::new();
        for tok in tokens {
            if tok.is_empty() {
                continue; // tolerate trailing delimiter
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(format!("non-numeric token {tok:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value {tok:?}")));
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(parse_err("line has a label but no values".into()));
        }
        match series_len {
            None => series_len = Some(values.len()),
            Some(n) if n != values.len() => {
                return Err(parse_err(format!(
                    "ragged length: got {} values, expected {}",
                    values.len(),
                    n
                )));
            }
            _ => {}
        }
        out.push(TimeSeries {
            id: out.len(),
            label,
            values,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(format!("{}: no series", path.display())));
    }
    Ok(out)
}

fn parse_label(tok: &str) -> Option<i32> {
    if let Ok(v) = tok.parse::<i32>() {
        return Some(v);
    }
    let f: f64 = tok.parse().ok()?;
    (f.fract() == 0.0 && f.abs() <= i32::MAX as f64).then_some(f as i32)
}

/// z-normalize to mean 0 and population standard deviation 1.
///
/// A constant series maps to all zeros; it carries no shape information and
/// later encodes to a single repeated symbol.
pub fn znormalize(ts: &TimeSeries) -> TimeSeries {
    let n = ts.values.len() as f64;
    let mean = ts.values.iter().sum::<f64>() / n;
    let var = ts.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let min = ts.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ts.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let values = if min == max {
        vec![0.0; ts.values.len()]
    } else {
        let std = var.sqrt();
        ts.values.iter().map(|v| (v - mean) / std).collect()
    };
    TimeSeries {
        id: ts.id,
        label: ts.label,
        values,
    }
}
