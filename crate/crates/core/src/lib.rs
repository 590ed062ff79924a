#![cfg_attr(not(test), no_std)]

//! Cost model and performance-cost trade-off optimizer for serverless
//! workflows placed across edge, cloud and space compute layers.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of immutable inputs: rate cards ([`pricing`]), workflow
//! structure and latencies ([`workflow`]), the per-driver cost engine
//! ([`cost`]), the placement optimizer ([`tradeoff`]) and telemetry
//! aggregation ([`telemetry`]). Document parsing, reports and the CLI live in
//! the `cosmos` crate.
//!
//! Money is exact decimal ([`Money`]); only the dimensionless weighted
//! objective of the optimizer is computed in binary floating point.

extern crate alloc;

pub mod cost;
pub mod money;
pub mod pricing;
pub mod telemetry;
pub mod tradeoff;
pub mod workflow;

pub use money::{Decimal, Money, NegativeAmount};
