//! Compatibility-aware, per-user model updates.
//!
//! A pre-update model `h1` is retrained into `h2` with instance weights that
//! reward agreeing with `h1` where it was right and that up-weight the
//! target user's history. Sweeping the mixing coefficient traces a
//! compatibility/performance curve whose area (AUTC) ranks the weightings.

pub mod compatibility;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod metrics;
pub mod report;
pub mod seed;
pub mod tree;

pub use error::{Error, ErrorClass, Result};
