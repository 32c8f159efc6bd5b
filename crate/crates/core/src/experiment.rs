//! End-to-end experiment orchestration: configuration, the per-test-item
//! pipeline (encode → pull → compile → anneal → decode → label), classical
//! baselines on the same split, and report assembly.
//!
//! Determinism contract: all randomness flows from `config.seed` through a
//! splitmix64-derived per-item seed, test items are processed in parallel
//! but collected in dataset order, and serialized reports contain no
//! wall-clock times (timings travel in a side channel skipped by serde), so
//! identical config + seed reproduce reports byte for byte.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    accuracy_report, cluster2_dtw, knn1_dtw, map_clusters_to_labels, AccuracyReport, DtwOptions,
};
use crate::classifier::{assign_label, build_report, vote_labels, Metric, ReconstructionReport};
use crate::dataio::{load_ucr, Dataset};
use crate::encoder::{encode, fit_sfa, sax_model, Binning, EncoderKind, SfaOptions, SymbolicWord};
use crate::pulling::build_family;
use crate::qubo::{build_qubo, BuildOptions, CoverSolution};
use crate::solver::{anneal, AnnealParams, BetaInterp, BetaSchedule};
use crate::{Error, Result};

/// Table-style word/alphabet presets per dataset name (case-insensitive).
pub fn preset_word_params(dataset: &str) -> Option<(usize, usize)> {
    match dataset.to_ascii_lowercase().as_str() {
        "sonyaiborobotsurface1" | "sony" => Some((8, 8)),
        "chinatown" | "beetlefly" | "twoleadecg" | "gunpoint" | "ecg200" => Some((5, 5)),
        _ => None,
    }
}

/// Full experiment configuration; round-trips through flat `key=value` text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Report label and preset lookup key.
    pub dataset: String,
    pub train_path: PathBuf,
    pub test_path: PathBuf,
    /// Column separator in the data files.
    pub delimiter: char,
    pub encoder: EncoderKind,
    pub word_length: usize,
    pub alphabet_size: usize,
    pub include_dc: bool,
    pub binning: Binning,
    pub normalize: bool,
    pub penalty_a: f64,
    pub penalty_b: f64,
    pub prune_empty: bool,
    pub worst_case_m: bool,
    pub num_reads: usize,
    pub num_sweeps: usize,
    /// `None` lets the annealer derive a schedule per instance.
    pub beta: Option<BetaSchedule>,
    pub metric: Metric,
    /// Majority-vote the label across all tied ground-state samples instead
    /// of classifying from the single best sample.
    pub vote_ground_states: bool,
    pub dtw_window: Option<usize>,
    pub dtw_squared: bool,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: String::new(),
            train_path: PathBuf::new(),
            test_path: PathBuf::new(),
            delimiter: '\t',
            encoder: EncoderKind::Sfa,
            word_length: 5,
            alphabet_size: 5,
            include_dc: false,
            binning: Binning::EquiDepth,
            normalize: true,
            penalty_a: 2.0,
            penalty_b: 1.0,
            prune_empty: true,
            worst_case_m: false,
            num_reads: 2000,
            num_sweeps: 1000,
            beta: None,
            metric: Metric::LargestCommonSubset,
            vote_ground_states: false,
            dtw_window: None,
            dtw_squared: false,
            seed: 42,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Defaults with the dataset's word/alphabet preset applied (when known).
    pub fn for_dataset(dataset: &str) -> ExperimentConfig {
        let mut config = ExperimentConfig {
            dataset: dataset.to_string(),
            ..ExperimentConfig::default()
        };
        if let Some((l, a)) = preset_word_params(dataset) {
            config.word_length = l;
            config.alphabet_size = a;
        }
        config
    }

    pub fn validate(&self) -> Result<()> {
        if self.word_length == 0 {
            return Err(Error::InvalidParam("word_length must be >= 1".into()));
        }
        if self.alphabet_size < 2 {
            return Err(Error::InvalidParam("alphabet_size must be >= 2".into()));
        }
        if !(self.penalty_b > 0.0 && self.penalty_b < self.penalty_a) {
            return Err(Error::InvalidParam(format!(
                "penalties must satisfy 0 < B < A, got A={}, B={}",
                self.penalty_a, self.penalty_b
            )));
        }
        if self.num_reads == 0 || self.num_sweeps == 0 {
            return Err(Error::InvalidParam(
                "num_reads and num_sweeps must be >= 1".into(),
            ));
        }
        if let Some(b) = &self.beta {
            if !(b.initial > 0.0 && b.initial < b.end && b.end.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "beta schedule must satisfy 0 < initial < final, got {} .. {}",
                    b.initial, b.end
                )));
            }
        }
        Ok(())
    }

    /// Apply one `key=value` override.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let invalid = |what: &str| Error::InvalidParam(format!("{key}: {what}: `{value}`"));
        let parse_usize = || value.parse::<usize>().map_err(|_| invalid("not a count"));
        let parse_f64 = || value.parse::<f64>().map_err(|_| invalid("not a number"));
        let parse_bool = || match value {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(invalid("not a boolean")),
        };
        match key {
            "dataset" => self.dataset = value.to_string(),
            "train_path" => self.train_path = PathBuf::from(value),
            "test_path" => self.test_path = PathBuf::from(value),
            "delimiter" => {
                self.delimiter = match value {
                    "tab" | "\\t" => '\t',
                    "comma" => ',',
                    "space" => ' ',
                    v if v.chars().count() == 1 => v.chars().next().unwrap(),
                    _ => return Err(invalid("expected tab|comma|space or one character")),
                }
            }
            "encoder" => {
                self.encoder = match value {
                    "sfa" => EncoderKind::Sfa,
                    "sax" => EncoderKind::Sax,
                    _ => return Err(invalid("expected sfa|sax")),
                }
            }
            "word_length" => self.word_length = parse_usize()?,
            "alphabet_size" => self.alphabet_size = parse_usize()?,
            "include_dc" => self.include_dc = parse_bool()?,
            "binning" => {
                self.binning = match value {
                    "equi_depth" => Binning::EquiDepth,
                    "equi_width" => Binning::EquiWidth,
                    _ => return Err(invalid("expected equi_depth|equi_width")),
                }
            }
            "normalize" => self.normalize = parse_bool()?,
            "penalty_a" => self.penalty_a = parse_f64()?,
            "penalty_b" => self.penalty_b = parse_f64()?,
            "prune_empty" => self.prune_empty = parse_bool()?,
            "worst_case_m" => self.worst_case_m = parse_bool()?,
            "num_reads" => self.num_reads = parse_usize()?,
            "num_sweeps" => self.num_sweeps = parse_usize()?,
            "beta_initial" => {
                let mut b = self.beta.unwrap_or(BetaSchedule {
                    initial: 0.1,
                    end: 10.0,
                    interp: BetaInterp::Geometric,
                });
                b.initial = parse_f64()?;
                self.beta = Some(b);
            }
            "beta_final" => {
                let mut b = self.beta.unwrap_or(BetaSchedule {
                    initial: 0.1,
                    end: 10.0,
                    interp: BetaInterp::Geometric,
                });
                b.end = parse_f64()?;
                self.beta = Some(b);
            }
            "beta_interp" => {
                let mut b = self.beta.unwrap_or(BetaSchedule {
                    initial: 0.1,
                    end: 10.0,
                    interp: BetaInterp::Geometric,
                });
                b.interp = match value {
                    "geometric" => BetaInterp::Geometric,
                    "linear" => BetaInterp::Linear,
                    _ => return Err(invalid("expected geometric|linear")),
                };
                self.beta = Some(b);
            }
            "metric" => {
                self.metric = Metric::parse(value).ok_or_else(|| {
                    invalid("expected largest_common_subset|num_common_subsets|largest_sum_subsets")
                })?
            }
            "vote_ground_states" => self.vote_ground_states = parse_bool()?,
            "dtw_window" => {
                self.dtw_window = if value == "none" {
                    None
                } else {
                    Some(parse_usize()?)
                }
            }
            "dtw_squared" => self.dtw_squared = parse_bool()?,
            "seed" => self.seed = value.parse::<u64>().map_err(|_| invalid("not a seed"))?,
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            _ => return Err(Error::InvalidParam(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Parse a flat `key=value` config file (`#` comments allowed), starting
    /// from defaults.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: "<config>".into(),
                line: no + 1,
                message: format!("expected key=value, got `{line}`"),
            })?;
            config
                .apply_kv(key.trim(), value.trim())
                .map_err(|e| Error::Parse {
                    path: "<config>".into(),
                    line: no + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(config)
    }

    /// Emit the full configuration as `key=value` lines (parse round-trips).
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("dataset", self.dataset.clone());
        kv("train_path", self.train_path.display().to_string());
        kv("test_path", self.test_path.display().to_string());
        kv(
            "delimiter",
            match self.delimiter {
                '\t' => "tab".to_string(),
                ',' => "comma".to_string(),
                ' ' => "space".to_string(),
                c => c.to_string(),
            },
        );
        kv(
            "encoder",
            match self.encoder {
                EncoderKind::Sfa => "sfa",
                EncoderKind::Sax => "sax",
            }
            .to_string(),
        );
        kv("word_length", self.word_length.to_string());
        kv("alphabet_size", self.alphabet_size.to_string());
        kv("include_dc", self.include_dc.to_string());
        kv(
            "binning",
            match self.binning {
                Binning::EquiDepth => "equi_depth",
                Binning::EquiWidth => "equi_width",
            }
            .to_string(),
        );
        kv("normalize", self.normalize.to_string());
        kv("penalty_a", self.penalty_a.to_string());
        kv("penalty_b", self.penalty_b.to_string());
        kv("prune_empty", self.prune_empty.to_string());
        kv("worst_case_m", self.worst_case_m.to_string());
        kv("num_reads", self.num_reads.to_string());
        kv("num_sweeps", self.num_sweeps.to_string());
        if let Some(b) = &self.beta {
            kv("beta_initial", b.initial.to_string());
            kv("beta_final", b.end.to_string());
            kv(
                "beta_interp",
                match b.interp {
                    BetaInterp::Geometric => "geometric",
                    BetaInterp::Linear => "linear",
                }
                .to_string(),
            );
        }
        kv("metric", self.metric.name().to_string());
        kv("vote_ground_states", self.vote_ground_states.to_string());
        if let Some(w) = self.dtw_window {
            kv("dtw_window", w.to_string());
        }
        kv("dtw_squared", self.dtw_squared.to_string());
        kv("seed", self.seed.to_string());
        if let Some(dir) = &self.output_dir {
            kv("output_dir", dir.display().to_string());
        }
        out
    }

    fn dtw_options(&self) -> DtwOptions {
        DtwOptions {
            window: self.dtw_window,
            squared: self.dtw_squared,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Solver seed for one test item, derived from the master seed so items are
/// independent yet reproducible regardless of scheduling.
pub fn item_seed(master: u64, item_index: usize) -> u64 {
    splitmix64(master ^ splitmix64(item_index as u64 + 1))
}

/// Wall-clock stage durations. Returned alongside reports but never
/// serialized into them, keeping reports byte-identical across reruns.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub load_secs: f64,
    pub encode_secs: f64,
    pub solve_secs: f64,
    pub total_secs: f64,
}

/// QUBO size record for one test item (plot-ready).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuboSize {
    pub test_id: usize,
    pub n_vars: usize,
    pub n_quadratic: usize,
}

/// Everything a QUBO-pipeline run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub reports: Vec<ReconstructionReport>,
    /// True test labels, in the same order as `reports` (revealed only at
    /// scoring time; the pipeline itself never sees them).
    pub true_labels: Vec<i32>,
    pub accuracy: AccuracyReport,
    pub qubo_size_histogram: Vec<QuboSize>,
    #[serde(skip)]
    pub timings: StageTimings,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Classical-baseline results on the same split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub config: ExperimentConfig,
    pub true_labels: Vec<i32>,
    pub knn_predicted: Vec<i32>,
    pub knn_accuracy: AccuracyReport,
    pub cluster_assignment: Vec<usize>,
    pub cluster_medoids: [usize; 2],
    pub cluster_predicted: Vec<i32>,
    pub cluster_accuracy: AccuracyReport,
    #[serde(skip)]
    pub timings: StageTimings,
}

impl BaselineReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Load the configured train/test split, applying normalization.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let train = load_ucr(&config.train_path, config.delimiter)?;
    let test = load_ucr(&config.test_path, config.delimiter)?;
    let dataset = Dataset::from_halves(config.dataset.clone(), train, test)?;
    Ok(if config.normalize {
        dataset.znormalized()
    } else {
        dataset
    })
}

/// Fit the configured encoder on the training split.
pub fn fit_encoder(config: &ExperimentConfig, dataset: &Dataset) -> Result<crate::encoder::EncoderModel> {
    match config.encoder {
        EncoderKind::Sfa => fit_sfa(
            &dataset.train,
            &SfaOptions {
                word_length: config.word_length,
                alphabet_size: config.alphabet_size,
                include_dc: config.include_dc,
                binning: config.binning,
            },
        ),
        EncoderKind::Sax => sax_model(config.word_length, config.alphabet_size),
    }
}

/// One test item through pull → compile → anneal → decode → label.
fn run_item(
    index: usize,
    word: &SymbolicWord,
    train_words: &[SymbolicWord],
    config: &ExperimentConfig,
) -> Result<(ReconstructionReport, QuboSize)> {
    debug_assert!(word.label.is_none(), "test labels must not reach pulling");
    let family = build_family(word, train_words, config.prune_empty)?;
    if family.subsets.is_empty() {
        // Nothing matched anywhere: abstain.
        let solution = CoverSolution {
            selected_indices: vec![],
            selected: vec![],
            covered: BTreeSet::new(),
            coverage_fraction: 0.0,
            feasible: false,
        };
        return Ok((
            build_report(word.source_id, &solution, config.metric),
            QuboSize {
                test_id: word.source_id,
                n_vars: 0,
                n_quadratic: 0,
            },
        ));
    }
    let qubo = build_qubo(
        &family,
        &BuildOptions {
            penalty_a: config.penalty_a,
            penalty_b: config.penalty_b,
            worst_case_m: config.worst_case_m,
        },
    )?;
    let params = AnnealParams {
        num_reads: config.num_reads,
        num_sweeps: config.num_sweeps,
        beta: config.beta,
        seed: item_seed(config.seed, index),
    };
    let result = anneal(&qubo, &params)?;
    let best_cover = qubo.decode(&result.best().assignment, &family)?;
    let mut report = build_report(word.source_id, &best_cover, config.metric);
    if config.vote_ground_states {
        let mut votes = Vec::new();
        for sample in result.ground_samples() {
            let cover = qubo.decode(&sample.assignment, &family)?;
            votes.push(assign_label(&cover.selected, config.metric));
        }
        report.assigned_label = vote_labels(votes);
    }
    Ok((
        report,
        QuboSize {
            test_id: word.source_id,
            n_vars: qubo.num_vars,
            n_quadratic: qubo.quadratic.len(),
        },
    ))
}

/// Run the full QUBO pipeline over the configured dataset.
///
/// Test items are solved in parallel; results are assembled in dataset
/// order. Any stage failure aborts the run naming the offending test id.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let t_start = Instant::now();
    let dataset = load_dataset(config)?;
    let load_secs = t_start.elapsed().as_secs_f64();

    let t_encode = Instant::now();
    let model = fit_encoder(config, &dataset)?;
    let train_words: Vec<SymbolicWord> = dataset
        .train
        .iter()
        .map(|ts| encode(&model, ts))
        .collect::<Result<_>>()?;
    // Strip labels before the words enter the pipeline.
    let test_words: Vec<SymbolicWord> = dataset
        .test
        .iter()
        .map(|ts| encode(&model, ts).map(|w| w.unlabeled()))
        .collect::<Result<_>>()?;
    let encode_secs = t_encode.elapsed().as_secs_f64();

    let t_solve = Instant::now();
    let items: Vec<(ReconstructionReport, QuboSize)> = test_words
        .par_iter()
        .enumerate()
        .map(|(index, word)| {
            run_item(index, word, &train_words, config).map_err(|e| Error::Stage {
                test_id: word.source_id,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let solve_secs = t_solve.elapsed().as_secs_f64();

    let (reports, qubo_size_histogram): (Vec<_>, Vec<_>) = items.into_iter().unzip();
    let true_labels: Vec<i32> = dataset.test.iter().map(|ts| ts.label).collect();
    let predicted: Vec<Option<i32>> = reports.iter().map(|r| r.assigned_label).collect();
    let accuracy = accuracy_report(&true_labels, &predicted)?;
    Ok(RunReport {
        config: config.clone(),
        reports,
        true_labels,
        accuracy,
        qubo_size_histogram,
        timings: StageTimings {
            load_secs,
            encode_secs,
            solve_secs,
            total_secs: t_start.elapsed().as_secs_f64(),
        },
    })
}

/// Run the classical baselines (1-NN DTW, 2-medoid clustering) on the same
/// split and report accuracies in the same format.
pub fn run_baselines(config: &ExperimentConfig) -> Result<BaselineReport> {
    config.validate()?;
    let t_start = Instant::now();
    let dataset = load_dataset(config)?;
    let load_secs = t_start.elapsed().as_secs_f64();
    let opts = config.dtw_options();
    let true_labels: Vec<i32> = dataset.test.iter().map(|ts| ts.label).collect();

    let t_solve = Instant::now();
    let knn_predicted = knn1_dtw(&dataset.train, &dataset.test, &opts)?;
    let knn_votes: Vec<Option<i32>> = knn_predicted.iter().map(|&l| Some(l)).collect();
    let knn_accuracy = accuracy_report(&true_labels, &knn_votes)?;

    let (clustering, _) = cluster2_dtw(&dataset.test, &opts)?;
    let cluster_predicted = map_clusters_to_labels(&clustering.assignment, &true_labels)?;
    let cluster_votes: Vec<Option<i32>> = cluster_predicted.iter().map(|&l| Some(l)).collect();
    let cluster_accuracy = accuracy_report(&true_labels, &cluster_votes)?;
    let solve_secs = t_solve.elapsed().as_secs_f64();

    Ok(BaselineReport {
        config: config.clone(),
        true_labels,
        knn_predicted,
        knn_accuracy,
        cluster_assignment: clustering.assignment,
        cluster_medoids: clustering.medoids,
        cluster_predicted,
        cluster_accuracy,
        timings: StageTimings {
            load_secs,
            encode_secs: 0.0,
            solve_secs,
            total_secs: t_start.elapsed().as_secs_f64(),
        },
    })
}

/// Plot-ready CSV of QUBO sizes, one row per test item across reports.
pub fn emit_qubo_histogram(reports: &[&RunReport]) -> String {
    let mut out = String::from("dataset,test_id,n_vars,n_quadratic_terms\n");
    for report in reports {
        for size in &report.qubo_size_histogram {
            out.push_str(&format!(
                "{},{},{},{}\n",
                report.config.dataset, size.test_id, size.n_vars, size.n_quadratic
            ));
        }
    }
    out
}

/// Write a UCR-format file (used by tests and the synthetic demos).
pub fn write_ucr(path: &Path, series: &[(i32, Vec<f64>)], delimiter: char) -> Result<()> {
    let mut out = String::new();
    for (label, values) in series {
        out.push_str(&label.to_string());
        for v in values {
            out.push(delimiter);
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
