//! Energy `H(x) = N sum_j Q(x_j) - beta sum_{i<j} log|x_i - x_j| + sum_{i<j} h(x_i - x_j)`
//! so that the ensemble density is proportional to `exp(-H)`.

use super::ensemble::{Configuration, EnsembleSpec};
use super::field::OneBody;
use super::interaction::InteractionPotential;
use crate::error::{invalid, Error, Result};

/// Energy of `positions` for a general one-body potential. The one-body term
/// carries the prefactor `positions.len()`. Exact coincidences give `+inf`.
pub fn energy(
    positions: &[f64],
    field: &dyn OneBody,
    beta: f64,
    interaction: &InteractionPotential,
) -> f64 {
    let n = positions.len();
    let nf = n as f64;
    let mut one_body = 0.0;
    let mut log_sum = 0.0;
    let mut pair = 0.0;
    for (i, &xi) in positions.iter().enumerate() {
        one_body += field.value(xi);
        for &xj in &positions[i + 1..] {
            let d = xi - xj;
            if d == 0.0 {
                return f64::INFINITY;
            }
            log_sum += d.abs().ln();
            pair += interaction.value(d);
        }
    }
    nf * one_body - beta * log_sum + pair
}

/// Gradient of [`energy`]; errors on coincident pairs.
pub fn energy_gradient(
    positions: &[f64],
    field: &dyn OneBody,
    beta: f64,
    interaction: &InteractionPotential,
) -> Result<Vec<f64>> {
    let n = positions.len();
    let nf = n as f64;
    let mut grad: Vec<f64> = positions.iter().map(|&x| nf * field.derivative(x)).collect();
    for i in 0..n {
        for j in i + 1..n {
            let d = positions[i] - positions[j];
            if d == 0.0 {
                return Err(Error::Coincidence(i, j));
            }
            let g = -beta / d + interaction.derivative(d);
            grad[i] += g;
            grad[j] -= g;
        }
    }
    Ok(grad)
}

/// Evaluated on the sorted positions, so the result is exactly invariant
/// under permutations of `x`.
pub fn hamiltonian(x: &Configuration, spec: &EnsembleSpec) -> Result<f64> {
    check_input(x, spec)?;
    let mut sorted = x.positions.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(energy(&sorted, &spec.field, spec.beta, &spec.interaction))
}

pub fn grad_hamiltonian(x: &Configuration, spec: &EnsembleSpec) -> Result<Vec<f64>> {
    check_input(x, spec)?;
    energy_gradient(&x.positions, &spec.field, spec.beta, &spec.interaction)
}

fn check_input(x: &Configuration, spec: &EnsembleSpec) -> Result<()> {
    if x.len() != spec.n {
        return Err(invalid(format!(
            "configuration has {} positions, ensemble has N = {}",
            x.len(),
            spec.n
        )));
    }
    x.validate()
}
