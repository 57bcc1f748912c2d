//! Compressed-coding multi-objective evolutionary algorithms for
//! mean-variance portfolio selection under cardinality, floor/ceiling,
//! pre-assignment and round-lot constraints.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the batch
//! runner and the command line live in the `ccsport` companion crate.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod encoding;
pub mod instance;
pub mod metrics;
pub mod moea;
pub mod operators;
pub mod problem;

pub use encoding::{Genotype, Scheme};
pub use instance::{FrontPoint, Instance, ReferenceFront};
pub use moea::{Backend, Individual, RunConfig, RunOutcome};
pub use operators::{Operator, OperatorConfig};
pub use problem::{ConstraintSet, FeasibilityReport, ObjectiveVector, Portfolio, RawPortfolio};

/// A point in the bi-objective minimization space: `[risk, -return]`.
pub type Point = [f64; 2];
