//! Experiment harness behind the `convfpp` binary: config files, parameter
//! sweeps, CSV output with schema files.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod schema;
pub mod simulate;
pub mod sweep;

pub use error::{HarnessError, HarnessResult};
