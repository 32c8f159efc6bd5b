//! The "pulling" comparison: slide a training word along a test word and
//! record, for every relative shift, the set of test positions whose symbol
//! matches the overlapped training symbol.
//!
//! Each non-empty match set becomes one subset of a set-cover instance whose
//! universe is the test word's position range `0..L`. Provenance (which
//! training series, which shift) stays attached to every subset because the
//! downstream classifier scores training series by the subsets they
//! contribute to a cover.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::SymbolicWord;
use crate::{Error, Result};

/// One match set produced by comparing a test word with a training word at a
/// fixed shift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulledSubset {
    /// Matching test-word positions, each in `0..universe_size`.
    pub positions: BTreeSet<usize>,
    /// Id of the training series this subset came from.
    pub train_id: usize,
    /// Class label of that training series.
    pub train_label: i32,
    /// Relative displacement of the training word, in `-(L-1)..=L-1`.
    pub shift: i64,
}

/// The set-cover instance for one test word: universe `{0..L-1}` plus all
/// retained subsets in deterministic (train order, ascending shift) order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetFamily {
    pub universe_size: usize,
    pub test_id: usize,
    pub subsets: Vec<PulledSubset>,
}

impl SubsetFamily {
    /// Union of all subset positions.
    pub fn coverable(&self) -> BTreeSet<usize> {
        self.subsets
            .iter()
            .flat_map(|s| s.positions.iter().copied())
            .collect()
    }

    /// For each universe element, how many subsets contain it.
    pub fn element_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.universe_size];
        for s in &self.subsets {
            for &p in &s.positions {
                counts[p] += 1;
            }
        }
        counts
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<SubsetFamily> {
        let family: SubsetFamily = serde_json::from_str(text)?;
        for s in &family.subsets {
            if s.positions.iter().any(|&p| p >= family.universe_size) {
                return Err(Error::InvalidParam(format!(
                    "subset from train {} at shift {} leaves the universe",
                    s.train_id, s.shift
                )));
            }
        }
        Ok(family)
    }
}

/// Compare `test` against `train` at every shift `s` in `-(L-1)..=L-1`
/// (ascending). The entry for shift `s` holds every position `p` with
/// `test[p] == train[p - s]`; entries may be empty.
pub fn pull_pair(test: &SymbolicWord, train: &SymbolicWord) -> Result<Vec<BTreeSet<usize>>> {
    let l = test.len();
    if train.len() != l {
        return Err(Error::LengthMismatch(format!(
            "cannot pull words of lengths {l} and {}",
            train.len()
        )));
    }
    if test.alphabet_size != train.alphabet_size {
        return Err(Error::InvalidParam(format!(
            "alphabet mismatch: {} vs {}",
            test.alphabet_size, train.alphabet_size
        )));
    }
    if l == 0 {
        return Err(Error::EmptyInput("cannot pull empty words".into()));
    }
    let span = l as i64 - 1;
    let mut out = Vec::with_capacity(2 * l - 1);
    for s in -span..=span {
        let mut matches = BTreeSet::new();
        for p in 0..l {
            let q = p as i64 - s;
            if (0..l as i64).contains(&q) && test.symbols[p] == train.symbols[q as usize] {
                matches.insert(p);
            }
        }
        out.push(matches);
    }
    Ok(out)
}

/// Pull `test` against every training word and assemble the family.
///
/// Training words are processed in parallel but emitted in training order,
/// each contributing its `2L-1` shifts ascending, so the subset list is
/// deterministic. With `prune_empty` (the default elsewhere), empty match
/// sets are dropped.
pub fn build_family(
    test: &SymbolicWord,
    train_set: &[SymbolicWord],
    prune_empty: bool,
) -> Result<SubsetFamily> {
    if train_set.is_empty() {
        return Err(Error::EmptyInput("pulling needs training words".into()));
    }
    let per_word: Vec<Vec<PulledSubset>> = train_set
        .par_iter()
        .map(|train| {
            let shifts = pull_pair(test, train)?;
            let span = test.len() as i64 - 1;
            Ok(shifts
                .into_iter()
                .zip(-span..=span)
                .filter(|(positions, _)| !(prune_empty && positions.is_empty()))
                .map(|(positions, shift)| PulledSubset {
                    positions,
                    train_id: train.source_id,
                    train_label: train.label.unwrap_or_default(),
                    shift,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(SubsetFamily {
        universe_size: test.len(),
        test_id: test.source_id,
        subsets: per_word.into_iter().flatten().collect(),
    })
}
