//! Structure learning for Gaussian graphical models.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. It covers the whole pipeline short of file IO:
//!
//! - [`graph`]: undirected graphs, random ensembles, γ-local separators.
//! - [`model`]: walk-summable precision matrices, partial correlations,
//!   exact and conditional covariances, assumption reports.
//! - [`sampler`]: reproducible Gaussian sampling and empirical covariance.
//! - [`estimator`]: conditional covariance / conditional mutual information
//!   thresholding over small conditioning sets.
//! - [`lbp`]: Gaussian loopy belief propagation with a parallel schedule.
//! - [`bounds`]: Fano-type sample complexity lower bounds and typical sets.
//!
//! Features: `std` (default), `parallel` (rayon pair-level parallelism,
//! implies `std`), `serde` (derives on the public data types).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod lbp;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
pub use graph::Graph;
pub use linalg::Matrix;
pub use model::GaussianModel;
pub use sampler::SampleSet;
