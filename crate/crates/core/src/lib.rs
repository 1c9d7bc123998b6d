//! Simulation and exact analytics for the dynamic Erdős–Rényi graph, in which
//! every vertex pair runs an independent on-off Markov process.

pub mod analytic;
pub mod components;
pub mod error;
pub mod logspace;
pub mod model;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use logspace::LogNonNegative;
pub use model::{derive, DerivedParams, ModelParams};
pub use stats::EstimateCI;
