//! Vision-guided leader-follower formation: marker tracking, pose recovery,
//! formation guidance and a synthetic closed-loop world to exercise them.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod imaging;
pub mod tracker;
pub mod guidance;
pub mod pose;
pub mod simworld;
pub mod harness;
