//! Pedestrian-safety simulation comparing single-vehicle perception with
//! roadside-assisted (V2I) cooperative perception.
//!
//! The pipeline is: sample an initial scene ([`stochastic`]), roll the world
//! forward while cameras detect pedestrians ([`world`], [`perception`]),
//! then score each episode and aggregate ([`safety`]). [`harness`] runs
//! batches and persists records and reports.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geometry;
pub mod harness;
pub mod perception;
pub mod safety;
pub mod stochastic;
pub mod world;
