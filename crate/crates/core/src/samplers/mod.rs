//! Exact and Markov chain samplers, plus small-`N` quadrature oracles.

pub mod io;
pub mod mala;
pub mod metropolis;
pub mod oracle;
pub mod target;
pub mod tridiagonal;

pub use io::{read_samples, write_samples, SampleHeader, SampleSet};
pub use mala::{mala_chain, mala_chain_for, MALA_TARGET_ACCEPTANCE};
pub use metropolis::{
    initial_configuration, initial_radius, metropolis_chain, metropolis_chain_for, ChainRun, ChainSchedule,
    ChainState, MetropolisChain, TARGET_ACCEPTANCE,
};
pub use oracle::{quadrature_oracle, NodeGrid, OracleDensity};
pub use target::Target;
pub use tridiagonal::{tridiagonal_draws, tridiagonal_eigenvalues, tridiagonal_gaussian_beta};
