//! Median distributions for locationally uncertain points.
//!
//! Each input point is known only up to `k` equally likely candidate
//! locations, so the 1D median / L1 median of the data is itself a random
//! variable over the `k^n` possible realizations. This crate builds a small
//! approximate support for that median distribution, attaches exact
//! (1D) or Monte-Carlo (any dimension) probability weights to it, and
//! derives a weighted-median single-point estimate together with its
//! stability bound.
//!
//! Everything is deterministic under explicit seeds, and a brute-force
//! enumeration oracle validates every construction at desk scale.

// Parameter guards are written `!(x > 0.0)` on purpose: the negation
// rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod costhat;
pub mod error;
pub mod estimate;
pub mod generators;
pub mod l1median;
pub mod model;
pub mod oracle;
pub mod support1d;
pub mod support2d;
pub mod weights_exact;
pub mod weights_mc;

pub use error::{Error, Result};
pub use model::{
    cost, derive_rng, median_1d, median_1d_keys, median_of_traversal, median_rank, rng_from_seed,
    sample_traversal, DistEntry, LexKey, Location, MedianDistribution, Traversal, UncertainPoint,
    UncertainPointSet, WeightKind,
};
