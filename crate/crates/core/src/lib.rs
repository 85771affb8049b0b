//! Minimal-pair probes of case marking and argument order in German
//! ditransitive clauses.
//!
//! The crate enumerates acceptable and case-violating sentences from verb
//! templates, scores them with n-gram models or imported scores, and
//! evaluates how well each scorer separates the acceptable sentence of a
//! minimal variation set from its violations.

pub mod case;
pub mod error;
pub mod genset;
pub mod lexicon;
pub mod metrics;
pub mod scoring;

pub use error::{Error, Result};
