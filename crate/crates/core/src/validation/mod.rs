//! Exact oracles and statistical checks for sampler output.

mod blocks;
mod compat;
mod stationary;
pub mod stats;

pub use blocks::{block_iid_test, BlockIidReport, MIN_BLOCKS};
pub use compat::{compatibility_test, CompatCell, CompatibilityReport, Z_FLAG};
pub use stationary::{exact_stationary, StationaryOracle, MAX_STATES};
