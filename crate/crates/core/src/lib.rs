//! Individual claim simulation: occurrence, reporting, settlement and partial
//! payments per claim, aggregated into run-off triangles and tested against
//! chain-ladder reserves.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod chainladder;
pub mod error;
pub mod event_times;
pub mod frequency_severity;
pub mod inflation;
pub mod payment_plan;
pub mod samplers;
pub mod scenario;
pub mod time_model;

pub use error::{Error, Result};
