//! Fields, interactions, measures and the energy of the ensemble.

pub mod ensemble;
pub mod field;
pub mod hamiltonian;
pub mod hoeffding;
pub mod interaction;
pub mod measure;

pub use ensemble::{Admissibility, Configuration, EnsembleSpec};
pub use field::{ExternalField, FieldKind, OneBody};
pub use hamiltonian::{energy, energy_gradient, grad_hamiltonian, hamiltonian};
pub use hoeffding::{
    convolve, convolve_at, convolve_derivative_at, double_convolve, grad_u, u_direct, u_fourier,
    FourierEvaluation, FourierQuadrature,
};
pub use interaction::{GaussianTerm, InteractionPotential};
pub use measure::{Grid, GridMeasure};
