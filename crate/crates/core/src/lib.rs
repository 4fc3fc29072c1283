//! Closed-loop ("sunflower petal") offshore wind collection system design.
//!
//! The crate builds a two-stage stochastic MILP over a bounded candidate
//! graph (investment, optional losses, expected curtailment under N-1 cable
//! failures), solves it with an external MILP solver or an exhaustive oracle,
//! and grows the modeled contingency set progressively around the active
//! design. Fixed designs are evaluated by per-leaf DC-flow LPs and checked by
//! Monte-Carlo sampling.

pub mod backend;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod evaluate;
pub mod geometry;
pub mod io;
pub mod model;
pub mod pci;
pub mod render;
pub mod scenario;

pub use error::{Error, Result};
