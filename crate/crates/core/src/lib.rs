//! Finite diversities over exact rationals.
//!
//! A diversity extends a metric from pairs to all finite subsets. This crate
//! verifies the axioms, builds the standard examples, computes tight-span
//! points with an exact simplex solver, decides hyperconvexity with
//! re-checkable certificates and runs a fixed-point descent for
//! nonexpansive maps.

pub mod cli;
pub mod constructions;
pub mod diversity;
pub mod error;
pub mod exactlp;
pub mod fixedpoint;
pub mod metric;
pub mod random;
pub mod rat;
pub mod sets;
pub mod tightspan;
pub mod tree;

pub use diversity::{Diversity, FiniteDiversity};
pub use error::{Error, Result};
pub use metric::FiniteMetric;
pub use rat::Rat;
pub use sets::{GroundSet, SetFunction, SubsetMask};
