//! Collaborative Monte Carlo localization with compressed belief exchange.
//!
//! Robots run independent particle filters on a shared occupancy grid. When one
//! robot detects another it sends a compressed summary of its belief, which the
//! receiver fuses through a detection model and reciprocal sampling.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compress;
pub mod eval;
pub mod fusion;
pub mod geometry;
pub mod map;
pub mod mcl;
pub mod numeric;
pub mod sim;
pub mod wire;
