//! Classical comparators: DTW distance, semi-supervised 1-NN labeling, and
//! unsupervised 2-way partitioning of the pairwise-DTW matrix.
//!
//! "2-way clustering on DTW distances" is realized as 2-medoids (PAM), since
//! means are ill-defined under DTW. Cluster output is unlabeled; for scoring
//! it is mapped to the two class labels by whichever of the two assignments
//! yields the higher accuracy — the usual evaluation convention for
//! unsupervised binary output.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::TimeSeries;
use crate::{Error, Result};

/// DTW variant switches. Defaults: absolute-difference cost, no band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DtwOptions {
    /// Sakoe-Chiba band radius; `None` leaves the warping unconstrained.
    pub window: Option<usize>,
    /// Use squared differences as the local cost instead of `|a - b|`.
    pub squared: bool,
}

/// Dynamic-time-warping distance between two sequences.
///
/// Classic dynamic program over the full cost lattice with steps
/// down/right/diagonal; the optional band restricts cells to
/// `|i - j| <= window`.
pub fn dtw(a: &[f64], b: &[f64], opts: &DtwOptions) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("DTW needs non-empty sequences".into()));
    }
    if let Some(w) = opts.window {
        if w < a.len().abs_diff(b.len()) {
            return Err(Error::InvalidParam(format!(
                "band radius {w} cannot connect lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
    }
    let cost = |x: f64, y: f64| {
        let d = (x - y).abs();
        if opts.squared {
            d * d
        } else {
            d
        }
    };
    let in_band = |i: usize, j: usize| opts.window.is_none_or(|w| i.abs_diff(j) <= w);
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut curr = vec![f64::INFINITY; m];
    for (i, &ai) in a.iter().enumerate() {
        for j in 0..m {
            curr[j] = if !in_band(i, j) {
                f64::INFINITY
            } else {
                let step = match (i, j) {
                    (0, 0) => 0.0,
                    (0, _) => curr[j - 1],
                    (_, 0) => prev[j],
                    _ => prev[j].min(prev[j - 1]).min(curr[j - 1]),
                };
                step + cost(ai, b[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m - 1])
}

/// Symmetric pairwise-distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// One CSV row per series, `n` comma-separated values each.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// All pairwise DTW distances, computed in parallel over the upper triangle.
pub fn distance_matrix(series: &[TimeSeries], opts: &DtwOptions) -> Result<DistanceMatrix> {
    let n = series.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let distances: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| dtw(&series[i].values, &series[j].values, opts))
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; n * n];
    for (&(i, j), &d) in pairs.iter().zip(&distances) {
        entries[i * n + j] = d;
        entries[j * n + i] = d;
    }
    Ok(DistanceMatrix { n, entries })
}

/// 1-nearest-neighbor DTW labeling: each test series takes the label of its
/// closest training series (distance ties to the lower training id).
pub fn knn1_dtw(
    train: &[TimeSeries],
    test: &[TimeSeries],
    opts: &DtwOptions,
) -> Result<Vec<i32>> {
    if train.is_empty() {
        return Err(Error::EmptyInput("1-NN needs training series".into()));
    }
    test.par_iter()
        .map(|t| {
            let mut best: Option<(f64, usize, i32)> = None;
            for tr in train {
                let d = dtw(&t.values, &tr.values, opts)?;
                let key = (d, tr.id);
                if best.is_none_or(|(bd, bid, _)| key < (bd, bid)) {
                    best = Some((d, tr.id, tr.label));
                }
            }
            Ok(best.expect("train non-empty").2)
        })
        .collect()
}

/// A 2-medoid partition of a distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub medoids: [usize; 2],
    /// Cluster index (0 or 1) per series, in input order.
    pub assignment: Vec<usize>,
    /// Sum of distances to the owning medoid.
    pub total_cost: f64,
}

fn assign_to_medoids(d: &DistanceMatrix, medoids: [usize; 2]) -> (Vec<usize>, f64) {
    let mut assignment = Vec::with_capacity(d.n);
    let mut cost = 0.0;
    for i in 0..d.n {
        let (d0, d1) = (d.get(i, medoids[0]), d.get(i, medoids[1]));
        if d0 <= d1 {
            assignment.push(0);
            cost += d0;
        } else {
            assignment.push(1);
            cost += d1;
        }
    }
    (assignment, cost)
}

/// PAM with k = 2 on the pairwise DTW matrix.
///
/// Deterministic throughout: initial medoids are the pair at maximum mutual
/// distance (first such pair in index order), then greedy best-improvement
/// swaps until a fixed point.
pub fn cluster2_dtw(series: &[TimeSeries], opts: &DtwOptions) -> Result<(Clustering, DistanceMatrix)> {
    if series.len() < 2 {
        return Err(Error::EmptyInput(
            "2-way clustering needs at least 2 series".into(),
        ));
    }
    let d = distance_matrix(series, opts)?;
    let n = d.n;
    let mut medoids = [0usize, 1usize];
    let mut widest = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            if d.get(i, j) > widest {
                widest = d.get(i, j);
                medoids = [i, j];
            }
        }
    }
    let (mut assignment, mut cost) = assign_to_medoids(&d, medoids);
    loop {
        let mut best = (cost, medoids);
        for slot in 0..2 {
            for cand in 0..n {
                if cand == medoids[0] || cand == medoids[1] {
                    continue;
                }
                let mut trial = medoids;
                trial[slot] = cand;
                let (_, trial_cost) = assign_to_medoids(&d, trial);
                if trial_cost < best.0 - 1e-12 {
                    best = (trial_cost, trial);
                }
            }
        }
        if best.1 == medoids {
            break;
        }
        medoids = best.1;
        let refreshed = assign_to_medoids(&d, medoids);
        assignment = refreshed.0;
        cost = refreshed.1;
    }
    Ok((
        Clustering {
            medoids,
            assignment,
            total_cost: cost,
        },
        d,
    ))
}

/// Map the two clusters onto the two class labels, choosing whichever of the
/// two assignments scores higher against `true_labels` (evaluation-time
/// convention for unsupervised output).
pub fn map_clusters_to_labels(assignment: &[usize], true_labels: &[i32]) -> Result<Vec<i32>> {
    if assignment.len() != true_labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} cluster assignments vs {} labels",
            assignment.len(),
            true_labels.len()
        )));
    }
    let mut classes: Vec<i32> = true_labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() != 2 {
        return Err(Error::InvalidParam(format!(
            "cluster-to-label mapping needs exactly 2 classes, found {}",
            classes.len()
        )));
    }
    let score = |mapping: [i32; 2]| {
        assignment
            .iter()
            .zip(true_labels)
            .filter(|(&c, &t)| mapping[c] == t)
            .count()
    };
    let straight = [classes[0], classes[1]];
    let flipped = [classes[1], classes[0]];
    let mapping = if score(straight) >= score(flipped) {
        straight
    } else {
        flipped
    };
    Ok(assignment.iter().map(|&c| mapping[c]).collect())
}

/// Per-class recall plus the support-weighted mean (= overall accuracy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub per_class: BTreeMap<i32, f64>,
    pub weighted: f64,
}

impl AccuracyReport {
    /// `class1/class2/.../weighted` with two decimals.
    pub fn summary(&self) -> String {
        let mut parts: Vec<String> = self
            .per_class
            .values()
            .map(|v| format!("{v:.2}"))
            .collect();
        parts.push(format!("{:.2}", self.weighted));
        parts.join("/")
    }
}

/// Score predictions; `None` predictions (abstentions) count as incorrect.
pub fn accuracy_report(true_labels: &[i32], predicted: &[Option<i32>]) -> Result<AccuracyReport> {
    if true_labels.len() != predicted.len() {
        return Err(Error::LengthMismatch(format!(
            "{} labels vs {} predictions",
            true_labels.len(),
            predicted.len()
        )));
    }
    if true_labels.is_empty() {
        return Err(Error::EmptyInput("nothing to score".into()));
    }
    let mut sizes: BTreeMap<i32, usize> = BTreeMap::new();
    let mut correct: BTreeMap<i32, usize> = BTreeMap::new();
    for (&t, p) in true_labels.iter().zip(predicted) {
        *sizes.entry(t).or_insert(0) += 1;
        if *p == Some(t) {
            *correct.entry(t).or_insert(0) += 1;
        }
    }
    let per_class: BTreeMap<i32, f64> = sizes
        .iter()
        .map(|(&c, &n)| (c, *correct.get(&c).unwrap_or(&0) as f64 / n as f64))
        .collect();
    let weighted = correct.values().sum::<usize>() as f64 / true_labels.len() as f64;
    Ok(AccuracyReport {
        per_class,
        weighted,
    })
}
