//! Structural analysis of dramatic texts.
//!
//! The pipeline reads TEI-encoded plays ([`corpus`]), turns each play into a
//! weighted character co-occurrence network ([`graph`]), reduces it to a
//! fixed set of size-independent measures ([`features`]) and feeds the
//! resulting table into correlation screening, rank-sum tests and PCA
//! ([`stats`]), linear SVM classification ([`learn`]) and act-removal
//! experiments ([`ablate`]).
//!
//! [`synth`] generates TEI corpora with planted genre structure; it is used by
//! the test suites and is handy for smoke-testing the command-line tool.

pub mod ablate;
pub mod corpus;
mod error;
pub mod features;
pub mod graph;
pub mod learn;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
