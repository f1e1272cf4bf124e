//! Numerical laboratory for beta-ensembles with an additional smooth pair
//! interaction: equilibrium measures, exact and Markov chain samplers, and
//! local/global statistics for comparing against the Gaussian beta-ensemble.

pub mod equilibrium;
pub mod harness;
pub mod error;
pub mod model;
pub mod numerics;
pub mod samplers;
pub mod statistics;
pub mod validation;

pub use error::{Error, Result};
