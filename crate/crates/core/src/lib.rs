//! Structural entropy of last-mile delivery networks.
//!
//! The crate measures how fragmented a set of parcel allocations is, using the
//! log-cardinality of the microstate space (structural entropy `G`) alongside
//! Shannon entropy `H`. On top of that it provides:
//!
//! * system-wide accounting of carrier deliveries and customer collection trips
//!   ([`system`]),
//! * a generalized evaluator for failed deliveries, attempt caps and pickup
//!   eligibility ([`generalized`]),
//! * ingestion of route datasets ([`ingest`]),
//! * a counterfactual pickup-point consolidation simulator ([`consolidation`]),
//! * the entropy-distance scaling fit and correlation battery ([`analytics`]).
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`, which is what the dataset-facing
//! modules use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod consolidation;
pub mod entropy;
pub mod error;
pub mod generalized;
pub mod ingest;
pub mod scalar;
pub mod synthetic;
pub mod system;

pub use entropy::{Allocation, Quadrant, QuadrantThresholds};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Entropy values in nats.
pub type Nats = f64;

pub type EntropyProfile = entropy::EntropyProfile<f64>;
pub type StirlingRow = entropy::StirlingRow<f64>;
pub type FailureModel = generalized::FailureModel<f64>;
pub type AttemptDistribution = generalized::AttemptDistribution<f64>;
pub type ClassSpec = generalized::ClassSpec<f64>;
pub type GeneralScenario = generalized::GeneralScenario<f64>;
pub type ScalingReport = generalized::ScalingReport<f64>;
pub type ScalingFit = analytics::ScalingFit<f64>;
pub type ChainingSpectrum = system::ChainingSpectrum<f64>;
