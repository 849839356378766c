//! Simulator and estimators for two-type first passage percolation with
//! conversion.
//!
//! Type 1 spreads at rate 1 into vacant sites. A type-1 site converts to
//! type 2 after an independent rate-`rho` clock; type 2 spreads at rate
//! `lambda` into vacant *and* type-1 sites. The crate covers
//!
//! * [`model`]: topologies (d-ary tree, `Z^d` box), the keyed random clock
//!   field and path passage times;
//! * [`engine`]: the event-driven dynamics with stopping rules;
//! * [`tree_lab`]: estimators for the tree renormalisation blocks
//!   (branching random walk minima, good sub-boxes, highways, spines,
//!   backtrack events, good boxes);
//! * [`lattice_lab`]: extinction sweeps, limit-shape estimates, truncated
//!   clocks, closed sites and encapsulation;
//! * [`ssp`]: the red/blue seed-percolation process and its coupling with
//!   the conversion model;
//! * [`stats`] and [`bounds`]: interval estimates, tests, fits and Poisson
//!   tail bounds.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod engine;
pub mod error;
pub mod lattice_lab;
pub mod model;
pub mod rng;
pub mod ssp;
pub mod stats;
pub mod tree_lab;
pub mod trials;

pub use error::{Error, Result};
