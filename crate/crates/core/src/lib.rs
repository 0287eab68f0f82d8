//! Random-matrix epidemic simulation.
//!
//! A population's contacts are a sparse symmetric non-negative matrix whose
//! off-diagonal entries are exposure coefficients and whose diagonal holds each
//! individual's recover coefficient. Exposure spreads by repeated
//! matrix-vector products and individuals are classified against a
//! pathogenic and a lethal threshold after every round. Interventions
//! (quarantine, detection, contact tracing, vaccination, masks) are edits to
//! the matrix and the health ledger.
//!
//! Module map:
//!
//! - [`model`]: contact matrices, network generators, propagation, classification.
//! - [`interventions`]: per-round and one-time scenario mechanisms.
//! - [`engine`]: a single seeded run.
//! - [`batch`]: replicated sweeps, outbreak maps, size-invariance reports.
//! - [`io`]: configuration documents, presets, CSV/JSON output.

pub mod batch;
pub mod engine;
mod error;
pub mod interventions;
pub mod io;
pub mod model;
pub mod seed;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
