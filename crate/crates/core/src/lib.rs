//! Model-free placeability evaluation for objects seen only as point clouds.
//!
//! Placement poses are scored by support-polygon stability under sampled
//! center-of-mass hypotheses, placement-conditioned graspability, altitude
//! clearance and optional packing heuristics, then fused with grasp quality
//! into a ranked grasp × placement matrix. The [`oracle`] module validates the
//! stability term against quasi-static tipping on synthetic objects.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geom;
pub mod grasp;
pub mod object;
pub mod oracle;
pub mod pipeline;
pub mod placement;
pub mod scoring;
pub mod stability;

pub use error::{Error, Result};
