//! Elastic and transport-based dissimilarities for one-dimensional signals.
//!
//! The crate provides the numerical kernels shared by the `tswarp` benchmark
//! harness:
//!
//! * [`signal`] — uniformly sampled signals on `[0,1]`, resampling, numerical
//!   differentiation, and derivative densities.
//! * [`transport`] — monotone functions with generalized inverses, 1-D optimal
//!   transport maps, the 2-Wasserstein distance, and the transport divergence.
//! * [`dtw`] — discrete and weighted dynamic time warping with path recovery
//!   and a brute-force oracle for small instances.
//! * [`synth`] — deterministic template catalogs, random monotone warps, and
//!   labeled synthetic datasets built by warping templates.
//! * [`dataset`] — the labeled-signal container shared with the harness.
//!
//! Everything is `no_std` + `alloc`; all operations are pure functions of
//! their inputs and safe to evaluate concurrently.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod dtw;
pub mod signal;
pub mod synth;
pub mod transport;

pub use dataset::{DatasetError, DatasetMeta, Label, LabeledDataset, LabeledItem};
pub use dtw::{brute_force_dtw, dtw, dtw_cost, dtw_weighted, dtw_weighted_cost, evaluate_path};
pub use dtw::{DiscretePath, DtwError, DtwResult};
pub use signal::{DerivativeDensity, Signal, SignalError};
pub use synth::{
    apply_warp, generate_dataset, random_warp, template_catalog, SynthError, SyntheticSpec,
    WarpFunction,
};
pub use transport::{
    cdf_from_density, push_forward_residual, transport_divergence, transport_map, wasserstein2,
    MonotoneError, MonotoneFunction, TransportMap,
};
