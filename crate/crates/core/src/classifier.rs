//! Label assignment from a decoded cover.
//!
//! Every selected subset remembers which training series produced it, so a
//! cover of the test word's positions doubles as a vote: training series are
//! scored by what their subsets contributed and the test series inherits the
//! label of the top-scoring training series. Three metrics are provided:
//!
//! - `LargestCommonSubset` (default): size of the largest contributed subset;
//! - `NumCommonSubsets`: how many subsets the series contributed;
//! - `LargestSumSubsets`: total element count over contributed subsets.
//!
//! Scoring is per training *series*, not per class. Ties break by higher
//! total element count, then by lower training-series id. An empty selection
//! yields no label ("unassigned"), which accuracy accounting counts as
//! incorrect.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::pulling::PulledSubset;
use crate::qubo::CoverSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    LargestCommonSubset,
    NumCommonSubsets,
    LargestSumSubsets,
}

impl Metric {
    pub const ALL: [Metric; 3] = [
        Metric::LargestCommonSubset,
        Metric::NumCommonSubsets,
        Metric::LargestSumSubsets,
    ];

    pub fn parse(text: &str) -> Option<Metric> {
        match text {
            "largest_common_subset" | "largest_common" => Some(Metric::LargestCommonSubset),
            "num_common_subsets" | "num_common" => Some(Metric::NumCommonSubsets),
            "largest_sum_subsets" | "largest_sum" => Some(Metric::LargestSumSubsets),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::LargestCommonSubset => "largest_common_subset",
            Metric::NumCommonSubsets => "num_common_subsets",
            Metric::LargestSumSubsets => "largest_sum_subsets",
        }
    }
}

/// What one training series contributed to a cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainStats {
    pub num_subsets_used: usize,
    pub largest_subset_size: usize,
    pub total_elements: usize,
}

/// Per-test-item classification record (one JSON line per test series).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub test_id: usize,
    pub selected: Vec<PulledSubset>,
    pub coverage_fraction: f64,
    pub per_train_stats: BTreeMap<usize, TrainStats>,
    /// `None` when the cover was empty and classification abstained.
    pub assigned_label: Option<i32>,
    pub metric_used: Metric,
}

/// Aggregate contribution stats per training series.
pub fn per_train_stats(selected: &[PulledSubset]) -> BTreeMap<usize, TrainStats> {
    let mut stats: BTreeMap<usize, TrainStats> = BTreeMap::new();
    for s in selected {
        let entry = stats.entry(s.train_id).or_insert(TrainStats {
            num_subsets_used: 0,
            largest_subset_size: 0,
            total_elements: 0,
        });
        entry.num_subsets_used += 1;
        entry.largest_subset_size = entry.largest_subset_size.max(s.positions.len());
        entry.total_elements += s.positions.len();
    }
    stats
}

/// Score each contributing training series by its largest selected subset.
pub fn score_largest_common(selected: &[PulledSubset]) -> BTreeMap<usize, usize> {
    per_train_stats(selected)
        .into_iter()
        .map(|(t, s)| (t, s.largest_subset_size))
        .collect()
}

/// Score each contributing training series by how many subsets it supplied.
pub fn score_num_common(selected: &[PulledSubset]) -> BTreeMap<usize, usize> {
    per_train_stats(selected)
        .into_iter()
        .map(|(t, s)| (t, s.num_subsets_used))
        .collect()
}

/// Score each contributing training series by total elements supplied.
pub fn score_sum(selected: &[PulledSubset]) -> BTreeMap<usize, usize> {
    per_train_stats(selected)
        .into_iter()
        .map(|(t, s)| (t, s.total_elements))
        .collect()
}

fn score_of(stats: &TrainStats, metric: Metric) -> usize {
    match metric {
        Metric::LargestCommonSubset => stats.largest_subset_size,
        Metric::NumCommonSubsets => stats.num_subsets_used,
        Metric::LargestSumSubsets => stats.total_elements,
    }
}

/// Winning training series under `metric`; ties break by higher total
/// element count, then lower train id. `None` on empty selection.
pub fn winning_train(selected: &[PulledSubset], metric: Metric) -> Option<usize> {
    let stats = per_train_stats(selected);
    stats
        .iter()
        .max_by_key(|(train_id, s)| {
            (
                score_of(s, metric),
                s.total_elements,
                std::cmp::Reverse(**train_id),
            )
        })
        .map(|(train_id, _)| *train_id)
}

/// Label of the winning training series, or `None` when nothing was
/// selected.
pub fn assign_label(selected: &[PulledSubset], metric: Metric) -> Option<i32> {
    let winner = winning_train(selected, metric)?;
    selected
        .iter()
        .find(|s| s.train_id == winner)
        .map(|s| s.train_label)
}

/// Majority vote over per-sample labels (used when classifying across all
/// tied ground states). Abstentions don't vote; ties go to the smaller
/// label; all-abstain yields `None`.
pub fn vote_labels<I: IntoIterator<Item = Option<i32>>>(votes: I) -> Option<i32> {
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    for label in votes.into_iter().flatten() {
        *counts.entry(label).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by_key(|&(label, n)| (n, std::cmp::Reverse(label)))
        .map(|(label, _)| label)
}

/// Assemble the per-item record from a decoded cover.
pub fn build_report(test_id: usize, solution: &CoverSolution, metric: Metric) -> ReconstructionReport {
    ReconstructionReport {
        test_id,
        coverage_fraction: solution.coverage_fraction,
        per_train_stats: per_train_stats(&solution.selected),
        assigned_label: assign_label(&solution.selected, metric),
        metric_used: metric,
        selected: solution.selected.clone(),
    }
}
