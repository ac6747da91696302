//! Breadth-first adaptive cubature over axis-aligned boxes.
//!
//! Every iteration evaluates a degree-7 rule on the whole batch of live
//! regions, finishes the regions that are accurate enough, and bisects the
//! rest. [`driver::integrate`] is the entry point; [`reference`] holds a
//! sequential heap-based integrator with the same rule for comparison.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cubature;
pub mod driver;
pub mod error;
pub mod errorest;
pub mod geometry;
pub mod integrands;
pub mod oracle;
pub mod reduce;
pub mod reference;

pub use error::{Error, Result};
