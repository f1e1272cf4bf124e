//! Equilibrium measures of the logarithmic energy and the self-consistent
//! limiting measure of the interacting ensemble.

pub mod field_solve;
pub mod io;
pub mod kernel;
pub mod self_consistent;
pub mod solver;

pub use field_solve::{default_grid, solve_field, EffectiveField, DEFAULT_CELLS};
pub use kernel::LogKernel;
pub use self_consistent::{self_consistent_solve, SelfConsistentOptions, SelfConsistentSolution};
pub use solver::{
    euler_lagrange_residual, project_simplex, solve_equilibrium, solve_equilibrium_with,
    EquilibriumProblem, EquilibriumSolution, SolverOptions,
};
