//! Shared helpers for integration tests: small deterministic synthetic
//! datasets written in UCR format.

#![allow(dead_code)] // each test binary uses a subset of these helpers

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use tscover::experiment::{write_ucr, ExperimentConfig};

/// A fixed four-harmonic wave whose first two Fourier coefficients all have
/// strictly positive real and imaginary parts.
pub fn wave(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| {
            let t = 2.0 * PI * n as f64 / len as f64;
            t.cos() - t.sin() + (2.0 * t).cos() - (2.0 * t).sin()
        })
        .collect()
}

/// Two classes that separate perfectly in the spectral symbol space: the
/// wave and its negation sit on opposite sides of every frequency-domain
/// bin, so their words share no symbols and cross-class pulls are empty.
/// All series within a class are identical.
pub fn wave_vs_negated(
    dir: &Path,
    per_class_train: usize,
    per_class_test: usize,
    len: usize,
) -> (PathBuf, PathBuf) {
    let up = wave(len);
    let down: Vec<f64> = up.iter().map(|v| -v).collect();
    let mut train = Vec::new();
    for _ in 0..per_class_train {
        train.push((1, up.clone()));
    }
    for _ in 0..per_class_train {
        train.push((2, down.clone()));
    }
    let mut test = Vec::new();
    for _ in 0..per_class_test {
        test.push((1, up.clone()));
    }
    for _ in 0..per_class_test {
        test.push((2, down.clone()));
    }
    let train_path = dir.join("TRAIN.tsv");
    let test_path = dir.join("TEST.tsv");
    write_ucr(&train_path, &train, '\t').unwrap();
    write_ucr(&test_path, &test, '\t').unwrap();
    (train_path, test_path)
}

/// Two shapes that DTW separates trivially: a linear ramp and a square
/// alternation. Used for the classical-baseline tests.
pub fn ramp_vs_zigzag(
    dir: &Path,
    per_class_train: usize,
    per_class_test: usize,
    len: usize,
) -> (PathBuf, PathBuf) {
    let up: Vec<f64> = (0..len).map(|j| j as f64).collect();
    let zig: Vec<f64> = (0..len)
        .map(|j| if j % 2 == 0 { 0.0 } else { 3.0 })
        .collect();
    let mut train = Vec::new();
    for _ in 0..per_class_train {
        train.push((1, up.clone()));
    }
    for _ in 0..per_class_train {
        train.push((2, zig.clone()));
    }
    let mut test = Vec::new();
    for _ in 0..per_class_test {
        test.push((1, up.clone()));
    }
    for _ in 0..per_class_test {
        test.push((2, zig.clone()));
    }
    let train_path = dir.join("TRAIN.tsv");
    let test_path = dir.join("TEST.tsv");
    write_ucr(&train_path, &train, '\t').unwrap();
    write_ucr(&test_path, &test, '\t').unwrap();
    (train_path, test_path)
}

/// Experiment config sized for fast tests on the synthetic data.
pub fn quick_config(train: &Path, test: &Path) -> ExperimentConfig {
    let mut config = ExperimentConfig::for_dataset("synthetic");
    config.train_path = train.to_path_buf();
    config.test_path = test.to_path_buf();
    config.word_length = 4;
    config.alphabet_size = 4;
    config.num_reads = 200;
    config.num_sweeps = 300;
    config.seed = 11;
    config
}
