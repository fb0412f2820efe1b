//! Structural (Boltzmann) and Shannon entropy of a single parcel allocation.

mod allocation;
mod log_factorial;
mod profile;
pub mod stirling;

pub use allocation::Allocation;
pub use log_factorial::{log_factorial, log_factorial_u64};
pub use profile::{
    classify_quadrant, profile, shannon_entropy, structural_entropy, EntropyProfile, Quadrant,
    QuadrantThresholds,
};
pub use stirling::{
    stirling_t1, stirling_t2, stirling_t3, stirling_table, StirlingLayout, StirlingRow,
};
