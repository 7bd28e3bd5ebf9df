//! Geometric-utility frame gating.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: pose algebra, dense pointmap frames, the windowed
//!   correspondence search and its brute-force reference.
//! - [`utility`]: the teacher score (pixel validity, matching fraction,
//!   unique fraction, min-aggregation) and the keyframe trigger.
//! - [`oracle`]: synthetic scenes, trajectories, ray-cast pointmaps, pose
//!   stratified pair sampling and `1 - S` labels.
//! - [`regressor`]: the distilled student (descriptor, iterative latent head,
//!   Huber training with hand-written backpropagation).
//! - [`policy`]: dense / stride / teacher-gated / student-gated frame streams.
//! - [`metrics`]: Sim(3) alignment and ATE, reconstruction metrics, compute
//!   accounting.
//!
//! Data-parallel loops go through [`exec::Execution`]; with the `parallel`
//! feature disabled every path runs sequentially and produces identical
//! results.

// Guards such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod geometry;
pub mod metrics;
pub mod numfmt;
pub mod oracle;
pub mod policy;
pub mod regressor;
pub mod utility;

pub use error::{Error, Result};
