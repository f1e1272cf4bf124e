//! Fixed point `mu = EqMeasure(Q + h_mu)` by damped iteration.

use super::field_solve::EffectiveField;
use super::solver::{
    euler_lagrange_residual, solve_equilibrium_with, EquilibriumProblem, EquilibriumSolution,
    SolverOptions,
};
use crate::error::{invalid, Error, Result};
use crate::model::field::{ExternalField, OneBody};
use crate::model::hoeffding::convolve_at;
use crate::model::interaction::InteractionPotential;
use crate::model::measure::{Grid, GridMeasure};

/// Consecutive increases of the self-consistency residual that count as
/// divergence.
const NON_CONTRACTION_RUN: usize = 5;

#[derive(Clone, Copy, Debug)]
pub struct SelfConsistentOptions {
    /// Stop once `L1(mu_k, EqMeasure(Q + h_{mu_k})) <= tol`.
    pub tol: f64,
    /// Euler-Lagrange tolerance for the inner solves.
    pub el_tol: f64,
    pub damping: f64,
    pub max_iterations: usize,
}

impl Default for SelfConsistentOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            el_tol: 1e-9,
            damping: 0.5,
            max_iterations: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SelfConsistentSolution {
    /// The fixed point `mu*`.
    pub mu: GridMeasure,
    /// `EqMeasure(Q + h_{mu*})`, with its variational certificate.
    pub image: EquilibriumSolution,
    /// `V = Q + h_{mu*}` at the cell midpoints.
    pub potential: Vec<f64>,
    /// `L1(mu*, EqMeasure(Q + h_{mu*}))`.
    pub residual: f64,
    /// Euler-Lagrange residual of `mu*` itself against `Q + h_{mu*}`.
    pub el_residual: f64,
    /// Self-consistency residual of every iterate.
    pub history: Vec<f64>,
    pub iterations: usize,
}

impl SelfConsistentSolution {
    pub fn effective_field(&self, field: &ExternalField, h: &InteractionPotential) -> EffectiveField {
        EffectiveField::new(field.clone(), h.clone(), self.mu.clone())
    }
}

fn potential_on_grid(field: &ExternalField, h: &InteractionPotential, mu: Option<&GridMeasure>, grid: Grid) -> Vec<f64> {
    grid.midpoints()
        .into_iter()
        .map(|t| field.value(t) + mu.map_or(0.0, |m| convolve_at(h, m, t)))
        .collect()
}

pub fn self_consistent_solve(
    field: &ExternalField,
    h: &InteractionPotential,
    beta: f64,
    grid: Grid,
    options: &SelfConsistentOptions,
) -> Result<SelfConsistentSolution> {
    if !(options.damping > 0.0 && options.damping <= 1.0) {
        return Err(invalid("damping must lie in (0, 1]"));
    }
    let solver = SolverOptions::default();
    let bare = potential_on_grid(field, h, None, grid);
    let first = solve_equilibrium_with(
        &EquilibriumProblem::new(grid, bare.clone(), beta)?,
        options.el_tol,
        None,
        &solver,
    )?;
    if h.is_zero() {
        return Ok(SelfConsistentSolution {
            mu: first.mu.clone(),
            el_residual: first.el_residual,
            image: first,
            potential: bare,
            residual: 0.0,
            history: vec![0.0],
            iterations: 1,
        });
    }

    let theta = options.damping;
    let mut mu = first.mu;
    let mut history = Vec::new();
    let mut rising = 0;
    for iteration in 1..=options.max_iterations {
        let potential = potential_on_grid(field, h, Some(&mu), grid);
        let problem = EquilibriumProblem::new(grid, potential.clone(), beta)?;
        let image = solve_equilibrium_with(&problem, options.el_tol, Some(mu.weights()), &solver)?;
        let residual = mu.l1_distance(&image.mu);
        if let Some(prev) = history.last() {
            rising = if residual > *prev { rising + 1 } else { 0 };
        }
        history.push(residual);
        log::debug!("self-consistent iteration {iteration}: L1 residual {residual:e}");
        if residual <= options.tol {
            let (el_residual, _) = euler_lagrange_residual(&mu, &potential, beta)?;
            return Ok(SelfConsistentSolution {
                mu,
                image,
                potential,
                residual,
                el_residual,
                history,
                iterations: iteration,
            });
        }
        if rising >= NON_CONTRACTION_RUN {
            return Err(Error::NonContraction { history });
        }
        let mixed: Vec<f64> = mu
            .weights()
            .iter()
            .zip(image.mu.weights())
            .map(|(a, b)| (1.0 - theta) * a + theta * b)
            .collect();
        mu = GridMeasure::from_masses(grid, mixed)?;
    }
    Err(Error::NonConvergence {
        iterations: options.max_iterations,
        residual: history.last().copied().unwrap_or(f64::INFINITY),
    })
}
