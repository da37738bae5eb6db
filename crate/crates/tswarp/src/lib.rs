//! Benchmark harness and CLI for 1-NN time-series classification over
//! elastic and transport dissimilarities.
//!
//! The numerical kernels (signals, DTW, optimal transport, synthetic data)
//! live in [`tswarp_core`] and are re-exported here; this crate adds the
//! classifier, dataset files, CSV reports, and the command-line surface.

pub mod classify;
pub mod cli;
pub mod tsv;

pub use classify::{
    accuracy_correlation, evaluate, low_sample_sweep, nn_classify, timing_benchmark,
    ClassifyError, CorrelationError, Dissimilarity, EvalOptions, EvalReport, Prediction,
    SweepReport, SweepRow, ThreadMode, TimingCell,
};
pub use cli::cli_dispatch;
pub use tsv::{load_tsv, save_tsv, TsvError, TsvRecord};
pub use tswarp_core::*;
