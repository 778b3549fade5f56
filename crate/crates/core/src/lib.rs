//! Exact-arithmetic library for approximate maximin-share (MMS) allocation of
//! indivisible items under per-category lower and upper quotas.
//!
//! The library provides:
//!
//! * an instance model with feasibility predicates and exact rational
//!   valuations ([`instance`]),
//! * the ordered-instance reduction and allocation lifting ([`ordered`]),
//! * bag-filling approximation algorithms for single-category goods and
//!   chores and for categorized instances ([`single_goods`],
//!   [`single_chores`], [`multi_category`]),
//! * exact MMS oracles: brute force, a dynamic program for identical agents
//!   with an FPTAS variant, and an exact solver for bivalued instances
//!   ([`oracle`]),
//! * worst-case instance constructors and seeded random samplers
//!   ([`generators`]),
//! * a mixed binary linear program emitter whose optimum is the exact
//!   worst-case approximation ratio for a fixed dimension ([`mblp`]).
//!
//! All arithmetic is exact: values, thresholds and MMS quantities are
//! arbitrary-precision rationals, so guarantee checks are exact inequalities
//! even on instances where equality holds.

pub mod error;
pub mod generators;
pub mod instance;
pub mod io;
pub mod mblp;
pub mod multi_category;
pub mod oracle;
pub mod ordered;
pub mod rational;
pub mod single_chores;
pub mod single_goods;
pub mod solver;
pub mod verify;

pub use error::Error;
pub use instance::{Allocation, Category, Instance, Kind, ValidationReport};
pub use rational::Rational;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Knobs shared by the approximation algorithms.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Check the per-round invariant conditions during the run, failing
    /// fast with [`Error::InvariantViolated`] on the first breach. Off by
    /// default; the production path skips the extra passes.
    pub check_invariants: bool,
}
