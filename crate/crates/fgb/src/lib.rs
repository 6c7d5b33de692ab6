//! Stochastic online learning with undirected feedback graphs.
//!
//! The crate bundles:
//! - [`graph`]: feedback-graph representation, generators for the standard
//!   constructions (star, reinforced wheel, cube copies, ...), dominating
//!   sets, weighted independent sets, and the neighborhood-collapse quotient;
//! - [`lp`]: a dense simplex solver for nonnegative covering LPs that returns
//!   a dual certificate alongside every primal solution;
//! - [`complexity`]: the instance-complexity quantities `c*` and `d*` and the
//!   closed-form scenario tables, all expressed as covering LPs;
//! - [`env`]: Gaussian reward environments and the named problem instances;
//! - [`algo`]: the phased LP learner with buffer rounding, plus a UCB-N
//!   baseline;
//! - [`harness`]: seeded multi-replicate experiments with CSV/JSON emission.

pub mod algo;
pub mod complexity;
pub mod env;
mod error;
pub mod graph;
pub mod harness;
pub mod lp;

pub use error::{Error, Result};
