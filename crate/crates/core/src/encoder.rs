//! Discretization of time series into symbolic words.
//!
//! Two encoders share the same model shape:
//!
//! - **SFA** (symbolic Fourier approximation): each series is represented by
//!   its leading DFT coefficient slots (real and imaginary parts interleaved,
//!   DC excluded by default); per-slot breakpoints are fit on training data
//!   with equi-depth binning (Multiple Coefficient Binning).
//! - **SAX** (symbolic aggregate approximation): the series is reduced to
//!   segment means with [`paa`] and binned against fixed standard-normal
//!   equal-probability breakpoints.
//!
//! Symbols are integer indices `0..a`; rendering them as letters `A..` is a
//! display concern only (see [`SymbolicWord::letters`]).

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataio::TimeSeries;
use crate::{Error, Result};

/// A fixed-length word over an alphabet of size `alphabet_size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicWord {
    pub symbols: Vec<u8>,
    pub alphabet_size: usize,
    /// Id of the originating time series.
    pub source_id: usize,
    /// Class label; `None` for unlabeled (test) use.
    pub label: Option<i32>,
}

impl SymbolicWord {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Render symbols as letters (`0 -> 'A'`); falls back to dash-joined
    /// indices for alphabets beyond 26 symbols.
    pub fn letters(&self) -> String {
        if self.alphabet_size <= 26 {
            self.symbols
                .iter()
                .map(|&s| (b'A' + s) as char)
                .collect()
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
            parts.join("-")
        }
    }

    /// Copy with the label removed, for feeding test words into pulling.
    pub fn unlabeled(&self) -> SymbolicWord {
        SymbolicWord {
            label: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Sfa,
    Sax,
}

/// Breakpoint binning strategy for SFA coefficient slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    EquiDepth,
    EquiWidth,
}

/// Options controlling an SFA fit.
#[derive(Debug, Clone)]
pub struct SfaOptions {
    pub word_length: usize,
    pub alphabet_size: usize,
    /// Include the DC (mean) coefficient as the first slot.
    pub include_dc: bool,
    pub binning: Binning,
}

impl SfaOptions {
    pub fn new(word_length: usize, alphabet_size: usize) -> Self {
        SfaOptions {
            word_length,
            alphabet_size,
            include_dc: false,
            binning: Binning::EquiDepth,
        }
    }
}

/// A fitted encoder: per-slot bin edges plus enough metadata to apply them.
///
/// SFA models carry `word_length` breakpoint rows (one per retained
/// coefficient slot) and remember the training series length; SAX models
/// carry a single shared row. Rows are non-decreasing; they are strictly
/// increasing whenever the training distribution at that slot has distinct
/// quantiles, and collapse to repeated edges in degenerate cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderModel {
    pub kind: EncoderKind,
    pub word_length: usize,
    pub alphabet_size: usize,
    pub include_dc: bool,
    /// `None` for SAX (any series length the PAA precondition allows).
    pub series_len: Option<usize>,
    pub breakpoints: Vec<Vec<f64>>,
}

impl EncoderModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<EncoderModel> {
        let model: EncoderModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let rows = match self.kind {
            EncoderKind::Sfa => self.word_length,
            EncoderKind::Sax => 1,
        };
        if self.breakpoints.len() != rows {
            return Err(Error::InvalidParam(format!(
                "model has {} breakpoint rows, expected {rows}",
                self.breakpoints.len()
            )));
        }
        for row in &self.breakpoints {
            if row.len() + 1 != self.alphabet_size {
                return Err(Error::InvalidParam(format!(
                    "breakpoint row has {} edges, expected {}",
                    row.len(),
                    self.alphabet_size - 1
                )));
            }
            if row.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidParam("breakpoint row decreases".into()));
            }
        }
        Ok(())
    }
}

fn check_word_params(word_length: usize, alphabet_size: usize) -> Result<()> {
    if word_length == 0 {
        return Err(Error::InvalidParam("word length must be >= 1".into()));
    }
    if !(2..=256).contains(&alphabet_size) {
        return Err(Error::InvalidParam(format!(
            "alphabet size must be in 2..=256, got {alphabet_size}"
        )));
    }
    Ok(())
}

/// Piecewise aggregate approximation: reduce `values` to `segments` means.
///
/// Segment boundaries split the index range as evenly as possible; when
/// `segments` does not divide the length, boundary values contribute
/// fractionally to both neighbors, so the weighted mean is exact.
pub fn paa(values: &[f64], segments: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if segments == 0 {
        return Err(Error::InvalidParam("segments must be >= 1".into()));
    }
    if segments > n {
        return Err(Error::InvalidParam(format!(
            "segments ({segments}) exceeds series length ({n})"
        )));
    }
    // Work in units of 1/segments of an index: segment k spans [k*n, (k+1)*n),
    // value j spans [j*segments, (j+1)*segments). Overlaps are integers.
    let mut out = Vec::with_capacity(segments);
    for k in 0..segments {
        let seg_lo = k * n;
        let seg_hi = (k + 1) * n;
        let j_first = seg_lo / segments;
        let j_last = (seg_hi - 1) / segments;
        let mut acc = 0.0;
        for (j, &value) in (j_first..=j_last).zip(&values[j_first..=j_last]) {
            let lo = seg_lo.max(j * segments);
            let hi = seg_hi.min((j + 1) * segments);
            acc += (hi - lo) as f64 * value;
        }
        out.push(acc / n as f64);
    }
    Ok(out)
}

/// First `count` DFT coefficient slots of `values`, interleaved as
/// `[re(c1), im(c1), re(c2), ...]`, optionally led by the DC real part.
fn fourier_slots(values: &[f64], count: usize, include_dc: bool) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(values.len())
        .process(&mut buf);
    let mut slots = Vec::with_capacity(count);
    if include_dc {
        slots.push(buf[0].re);
    }
    let mut k = 1;
    while slots.len() < count {
        slots.push(buf[k].re);
        if slots.len() < count {
            slots.push(buf[k].im);
        }
        k += 1;
    }
    slots
}

fn max_slots(series_len: usize, include_dc: bool) -> usize {
    2 * (series_len / 2) + usize::from(include_dc)
}

/// Fit an SFA model on training series: compute each series' leading DFT
/// slots, then per-slot breakpoints splitting the training values into
/// `alphabet_size` bins.
pub fn fit_sfa(train: &[TimeSeries], opts: &SfaOptions) -> Result<EncoderModel> {
    check_word_params(opts.word_length, opts.alphabet_size)?;
    if train.is_empty() {
        return Err(Error::EmptyInput("SFA fit needs training series".into()));
    }
    let series_len = train[0].values.len();
    for ts in train {
        if ts.values.len() != series_len {
            return Err(Error::LengthMismatch(format!(
                "training series {} has length {}, expected {}",
                ts.id,
                ts.values.len(),
                series_len
            )));
        }
    }
    if opts.word_length > max_slots(series_len, opts.include_dc) {
        return Err(Error::InvalidParam(format!(
            "word length {} exceeds the {} available coefficient slots",
            opts.word_length,
            max_slots(series_len, opts.include_dc)
        )));
    }

    // One column of training values per retained slot.
    let mut columns = vec![Vec::with_capacity(train.len()); opts.word_length];
    for ts in train {
        for (col, v) in columns
            .iter_mut()
            .zip(fourier_slots(&ts.values, opts.word_length, opts.include_dc))
        {
            col.push(v);
        }
    }
    let breakpoints = columns
        .into_iter()
        .map(|col| fit_row(col, opts.alphabet_size, opts.binning))
        .collect();
    Ok(EncoderModel {
        kind: EncoderKind::Sfa,
        word_length: opts.word_length,
        alphabet_size: opts.alphabet_size,
        include_dc: opts.include_dc,
        series_len: Some(series_len),
        breakpoints,
    })
}

fn fit_row(mut col: Vec<f64>, alphabet_size: usize, binning: Binning) -> Vec<f64> {
    let n = col.len();
    match binning {
        Binning::EquiDepth => {
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (1..alphabet_size).map(|k| col[k * n / alphabet_size]).collect()
        }
        Binning::EquiWidth => {
            let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (1..alphabet_size)
                .map(|k| min + (max - min) * k as f64 / alphabet_size as f64)
                .collect()
        }
    }
}

/// SAX model: `alphabet_size - 1` standard-normal quantile breakpoints,
/// shared by all PAA segments. Needs no training data.
pub fn sax_model(word_length: usize, alphabet_size: usize) -> Result<EncoderModel> {
    check_word_params(word_length, alphabet_size)?;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let breakpoints = (1..alphabet_size)
        .map(|k| normal.inverse_cdf(k as f64 / alphabet_size as f64))
        .collect();
    Ok(EncoderModel {
        kind: EncoderKind::Sax,
        word_length,
        alphabet_size,
        include_dc: false,
        series_len: None,
        breakpoints: vec![breakpoints],
    })
}

/// Bin index of `v`: bins are `(-inf, e1), [e1, e2), ..., [e_{a-1}, inf)`.
fn bin(v: f64, edges: &[f64]) -> u8 {
    edges.partition_point(|e| *e <= v) as u8
}

/// Encode one series into a word of length `model.word_length`.
pub fn encode(model: &EncoderModel, ts: &TimeSeries) -> Result<SymbolicWord> {
    let symbols = match model.kind {
        EncoderKind::Sfa => {
            let expected = model
                .series_len
                .expect("SFA models store the training length");
            if ts.values.len() != expected {
                return Err(Error::LengthMismatch(format!(
                    "series {} has length {}, model was fit on length {}",
                    ts.id,
                    ts.values.len(),
                    expected
                )));
            }
            fourier_slots(&ts.values, model.word_length, model.include_dc)
                .iter()
                .zip(&model.breakpoints)
                .map(|(&v, row)| bin(v, row))
                .collect()
        }
        EncoderKind::Sax => {
            let means = paa(&ts.values, model.word_length)?;
            means
                .iter()
                .map(|&v| bin(v, &model.breakpoints[0]))
                .collect()
        }
    };
    Ok(SymbolicWord {
        symbols,
        alphabet_size: model.alphabet_size,
        source_id: ts.id,
        label: Some(ts.label),
    })
}
