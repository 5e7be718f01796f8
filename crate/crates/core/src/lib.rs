//! Pairwise (one-vs-one) emotion classification toolkit.
//!
//! Decomposes an M-class problem into C(M,2) pair problems, learns a
//! dedicated feature subspace and bi-classifier per pair (GA subset
//! selection or NN space transformation), and fuses the pairwise verdicts
//! with a voting-and-competition rule. Ships a speaker-independent
//! cross-validation harness for comparing the pairwise decomposition
//! against the traditional single-global-subspace baseline.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod ga;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod vote;

pub use error::{Error, Result};
