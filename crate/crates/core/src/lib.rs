//! Perspective-based collision risk and risk-aware receding-horizon planning.
//!
//! Everything here is `no_std` + `alloc`; file formats, the CLI and the
//! campaign runner live in the `riskplan` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod curve;
pub mod error;
pub mod geometry;
pub mod math;
pub mod metrics;
pub mod planner;
pub mod prediction;
pub mod risk;
pub mod scenario;
pub mod simulation;

pub use error::*;
