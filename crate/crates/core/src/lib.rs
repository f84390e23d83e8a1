//! Resting-phase detection for time-resolved cardiac image series.
//!
//! Consecutive frames are registered, the deformation fields are reduced to
//! one motion value per frame transition, and transitions below a threshold
//! are grouped into systolic and diastolic resting phases.

// Negated comparisons deliberately reject NaN parameters.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod classification;
pub mod cropping;
pub mod error;
pub mod filter;
pub mod localization;
pub mod model;
pub mod motion;
pub mod phantom;
pub mod pipeline;
pub mod registration;
pub mod stats;

pub use error::{Error, Result};
