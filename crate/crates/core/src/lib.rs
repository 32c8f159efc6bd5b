//! Symbolic time-series reconstruction and semi-supervised classification
//! via set-cover QUBOs.
//!
//! The pipeline discretizes univariate time series into symbolic words
//! (SFA or SAX), compares a test word against every training word at all
//! relative shifts (the *pulling* procedure), turns the recorded position
//! matches into a set-cover instance, compiles that instance into a QUBO
//! with one-hot counting variables, and minimizes it with simulated
//! annealing. Tracing the selected subsets back to their training series
//! yields a label for the test series.
//!
//! Module map:
//!
//! - [`dataio`] — UCR-format loading, z-normalization, train/test splits
//! - [`encoder`] — PAA, SAX and SFA discretization into [`encoder::SymbolicWord`]s
//! - [`pulling`] — shift-wise word comparison producing a [`pulling::SubsetFamily`]
//! - [`qubo`] — set-cover QUBO compilation, energies and decoding
//! - [`solver`] — simulated annealing, exhaustive enumeration, greedy cover
//! - [`classifier`] — label assignment from decoded covers
//! - [`baselines`] — DTW distance, 1-NN labeling, 2-medoid clustering
//! - [`experiment`] — end-to-end dataset runs and report emission

pub mod baselines;
pub mod classifier;
pub mod dataio;
pub mod encoder;
pub mod experiment;
pub mod pulling;
pub mod qubo;
pub mod solver;

use std::path::PathBuf;

/// Error type shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input file; names the offending line (1-based).
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    /// A pipeline stage failed while processing one test item.
    #[error("test item {test_id}: {source}")]
    Stage {
        test_id: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
