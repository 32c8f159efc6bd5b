//! QUBO minimizers: a seeded simulated-annealing sampler (the production
//! path), an exhaustive enumerator for small instances (verification
//! oracle), and the classical greedy set-cover heuristic (independent
//! approximation oracle).
//!
//! Annealing is single-flip Metropolis over a rising inverse-temperature
//! ladder. Every read runs on its own counter-derived RNG stream, so results
//! are bit-reproducible for a fixed seed no matter how reads are scheduled
//! across threads.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pulling::SubsetFamily;
use crate::qubo::{CoverSolution, Qubo};
use crate::{Error, Result};

/// Exhaustive enumeration refuses instances larger than this.
pub const EXHAUSTIVE_MAX_VARS: usize = 25;
/// At most this many tied ground states are returned by [`exhaustive`].
pub const GROUND_TIE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaInterp {
    Geometric,
    Linear,
}

/// Inverse-temperature ramp for one read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub initial: f64,
    pub end: f64,
    pub interp: BetaInterp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    pub num_reads: usize,
    pub num_sweeps: usize,
    /// `None` derives a schedule from the instance's coefficient range.
    pub beta: Option<BetaSchedule>,
    pub seed: u64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            num_reads: 2000,
            num_sweeps: 1000,
            beta: None,
            seed: 42,
        }
    }
}

/// One distinct assignment observed by a solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub assignment: Vec<u8>,
    pub energy: f64,
    /// How many reads ended on this exact assignment (always 1 for
    /// exhaustive enumeration).
    pub multiplicity: usize,
}

impl Sample {
    /// Bits packed 8-per-byte (bit `i` into byte `i / 8`, LSB first),
    /// rendered as lowercase hex.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.assignment.len().div_ceil(8)];
        for (i, &b) in self.assignment.iter().enumerate() {
            if b != 0 {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Samples sorted ascending by `(energy, assignment)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub samples: Vec<Sample>,
    /// Resolved parameters for annealing runs; `None` for exhaustive.
    pub params_used: Option<AnnealParams>,
}

impl SolveResult {
    pub fn best(&self) -> &Sample {
        &self.samples[0]
    }

    /// All samples tied (within `1e-9`) with the minimum energy.
    pub fn ground_samples(&self) -> impl Iterator<Item = &Sample> {
        let floor = self.samples[0].energy;
        self.samples
            .iter()
            .take_while(move |s| s.energy <= floor + 1e-9)
    }
}

/// Symmetric neighbor lists from the upper-triangular coupling map.
fn adjacency(q: &Qubo) -> Vec<Vec<(u32, f64)>> {
    let mut adj = vec![Vec::new(); q.num_vars];
    for (&(i, j), &c) in &q.quadratic {
        adj[i].push((j as u32, c));
        adj[j].push((i as u32, c));
    }
    adj
}

/// Local fields of `x`: `field[i] = linear[i] + sum_j q_ij x_j`, so a flip
/// of variable `i` changes the energy by `(1 - 2 x_i) * field[i]`.
fn local_fields(q: &Qubo, adj: &[Vec<(u32, f64)>], x: &[u8]) -> Vec<f64> {
    (0..q.num_vars)
        .map(|i| {
            q.linear[i]
                + adj[i]
                    .iter()
                    .filter(|&&(j, _)| x[j as usize] != 0)
                    .map(|&(_, c)| c)
                    .sum::<f64>()
        })
        .collect()
}

/// One annealing read: random start, then a Metropolis sweep per ladder
/// entry, visiting variables in fixed index order.
fn run_read(q: &Qubo, adj: &[Vec<(u32, f64)>], betas: &[f64], rng: &mut ChaCha8Rng) -> Vec<u8> {
    let n = q.num_vars;
    let mut x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
    let mut field = local_fields(q, adj, &x);
    for &beta in betas {
        for i in 0..n {
            let delta = if x[i] == 0 { field[i] } else { -field[i] };
            let accept = if delta <= 0.0 {
                true
            } else {
                let be = beta * delta;
                let u: f64 = rng.gen();
                // exp(-46) is far below the smallest nonzero u (2^-53), so
                // for deep uphill moves `u < exp(-be)` reduces to `u == 0`.
                if be > 45.0 {
                    u == 0.0
                } else {
                    u < (-be).exp()
                }
            };
            if accept {
                let sign = if x[i] == 0 { 1.0 } else { -1.0 };
                x[i] ^= 1;
                for &(j, c) in &adj[i] {
                    field[j as usize] += sign * c;
                }
            }
        }
    }
    x
}

fn derive_schedule(q: &Qubo) -> BetaSchedule {
    let mags = || {
        q.linear
            .iter()
            .chain(q.quadratic.values())
            .map(|c| c.abs())
            .filter(|&m| m > 0.0)
    };
    let max = mags().fold(0.0f64, f64::max);
    if max == 0.0 {
        // Flat instance: any schedule is as good as any other.
        return BetaSchedule {
            initial: 0.1,
            end: 1.0,
            interp: BetaInterp::Geometric,
        };
    }
    let min = mags().fold(f64::INFINITY, f64::min);
    BetaSchedule {
        initial: 1.0 / max,
        end: 10.0 / min,
        interp: BetaInterp::Geometric,
    }
}

fn beta_ladder(schedule: &BetaSchedule, sweeps: usize) -> Vec<f64> {
    (0..sweeps)
        .map(|t| {
            let f = if sweeps <= 1 {
                1.0
            } else {
                t as f64 / (sweeps - 1) as f64
            };
            match schedule.interp {
                BetaInterp::Geometric => schedule.initial * (schedule.end / schedule.initial).powf(f),
                BetaInterp::Linear => schedule.initial + (schedule.end - schedule.initial) * f,
            }
        })
        .collect()
}

/// Merge read outcomes into deduplicated samples sorted by
/// `(energy, assignment)`.
fn merge_samples(mut raw: Vec<(Vec<u8>, f64)>) -> Vec<Sample> {
    raw.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let mut samples: Vec<Sample> = Vec::new();
    for (assignment, energy) in raw {
        match samples.last_mut() {
            Some(last) if last.assignment == assignment => last.multiplicity += 1,
            _ => samples.push(Sample {
                assignment,
                energy,
                multiplicity: 1,
            }),
        }
    }
    samples
}

/// Simulated annealing: `num_reads` independent Metropolis descents.
///
/// Read `r` uses a ChaCha8 generator seeded with `params.seed` on stream
/// `r + 1`; reads run in parallel and are merged deterministically. Final
/// energies are recomputed exactly from the assignment.
pub fn anneal(q: &Qubo, params: &AnnealParams) -> Result<SolveResult> {
    if params.num_reads == 0 || params.num_sweeps == 0 {
        return Err(Error::InvalidParam(
            "annealing needs at least 1 read and 1 sweep".into(),
        ));
    }
    if let Some(b) = &params.beta {
        if !(b.initial > 0.0 && b.initial < b.end && b.end.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "beta schedule must satisfy 0 < initial < final, got {} .. {}",
                b.initial, b.end
            )));
        }
    }
    let schedule = params.beta.unwrap_or_else(|| derive_schedule(q));
    let betas = beta_ladder(&schedule, params.num_sweeps);
    let adj = adjacency(q);

    let raw: Vec<(Vec<u8>, f64)> = (0..params.num_reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(read as u64 + 1);
            let x = run_read(q, &adj, &betas, &mut rng);
            let energy = q.energy(&x).expect("assignment sized to the QUBO");
            (x, energy)
        })
        .collect();

    Ok(SolveResult {
        samples: merge_samples(raw),
        params_used: Some(AnnealParams {
            beta: Some(schedule),
            ..params.clone()
        }),
    })
}

/// Enumerate all `2^n` assignments (Gray-code walk with incremental energy)
/// and return every ground state, capped at [`GROUND_TIE_CAP`] entries.
/// Candidate minima are re-evaluated exactly before selection, so the
/// returned energies carry no incremental drift.
pub fn exhaustive(q: &Qubo) -> Result<SolveResult> {
    let n = q.num_vars;
    if n > EXHAUSTIVE_MAX_VARS {
        return Err(Error::InvalidParam(format!(
            "exhaustive enumeration capped at {EXHAUSTIVE_MAX_VARS} variables, instance has {n}"
        )));
    }
    let adj = adjacency(q);
    let mut x = vec![0u8; n];
    let mut field = q.linear.clone();
    let mut energy = q.offset;
    let mut best = energy;
    // Keep a slack band around the running minimum; exact re-evaluation
    // below prunes false ties introduced by float accumulation.
    const SLACK: f64 = 1e-6;
    const RAW_CAP: usize = 1 << 16;
    let mut candidates: Vec<Vec<u8>> = vec![x.clone()];
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        let delta = if x[i] == 0 { field[i] } else { -field[i] };
        let sign = if x[i] == 0 { 1.0 } else { -1.0 };
        x[i] ^= 1;
        for &(j, c) in &adj[i] {
            field[j as usize] += sign * c;
        }
        energy += delta;
        if energy < best - SLACK {
            best = energy;
            candidates.clear();
            candidates.push(x.clone());
        } else if energy <= best + SLACK && candidates.len() < RAW_CAP {
            candidates.push(x.clone());
        }
    }
    let exact: Vec<(Vec<u8>, f64)> = candidates
        .into_iter()
        .map(|x| {
            let e = q.energy(&x).expect("assignment sized to the QUBO");
            (x, e)
        })
        .collect();
    let floor = exact
        .iter()
        .map(|(_, e)| *e)
        .fold(f64::INFINITY, f64::min);
    let mut ground: Vec<(Vec<u8>, f64)> = exact
        .into_iter()
        .filter(|(_, e)| *e <= floor + 1e-9)
        .collect();
    ground.sort_by(|a, b| a.0.cmp(&b.0));
    ground.truncate(GROUND_TIE_CAP);
    Ok(SolveResult {
        samples: ground
            .into_iter()
            .map(|(assignment, energy)| Sample {
                assignment,
                energy,
                multiplicity: 1,
            })
            .collect(),
        params_used: None,
    })
}

/// Classical greedy set cover: repeatedly take the subset covering the most
/// still-uncovered elements (ties to the lowest subset index) until nothing
/// improves. `feasible` means the full universe got covered.
pub fn greedy_cover(family: &SubsetFamily) -> Result<CoverSolution> {
    if family.subsets.is_empty() {
        return Err(Error::EmptyInput("greedy cover needs subsets".into()));
    }
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let mut selected_indices: Vec<usize> = Vec::new();
    loop {
        let mut best_gain = 0usize;
        let mut best_idx = None;
        for (i, s) in family.subsets.iter().enumerate() {
            let gain = s.positions.difference(&covered).count();
            if gain > best_gain {
                best_gain = gain;
                best_idx = Some(i);
            }
        }
        match best_idx {
            Some(i) => {
                covered.extend(family.subsets[i].positions.iter().copied());
                selected_indices.push(i);
            }
            None => break,
        }
    }
    selected_indices.sort_unstable();
    Ok(CoverSolution {
        selected: selected_indices
            .iter()
            .map(|&i| family.subsets[i].clone())
            .collect(),
        coverage_fraction: covered.len() as f64 / family.universe_size as f64,
        feasible: covered.len() == family.universe_size,
        selected_indices,
        covered,
    })
}
