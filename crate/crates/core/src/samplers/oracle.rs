//! Brute-force one-point functions for `N <= 3` by tensor-product quadrature.

use crate::error::{invalid, Result};
use crate::model::ensemble::EnsembleSpec;
use crate::model::field::OneBody;

/// Uniform node grid (trapezoid rule).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeGrid {
    pub left: f64,
    pub right: f64,
    pub n_nodes: usize,
}

impl NodeGrid {
    pub fn new(left: f64, right: f64, n_nodes: usize) -> Result<Self> {
        if !(left < right) || n_nodes < 3 {
            return Err(invalid("node grid needs an interval and at least 3 nodes"));
        }
        Ok(Self { left, right, n_nodes })
    }

    pub fn spacing(&self) -> f64 {
        (self.right - self.left) / (self.n_nodes - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes)
            .map(|i| self.left + i as f64 * self.spacing())
            .collect()
    }

    fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_nodes)
            .map(|i| if i == 0 || i + 1 == self.n_nodes { 0.5 * h } else { h })
            .collect()
    }
}

/// Normalized one-point density on a node grid.
#[derive(Clone, Debug)]
pub struct OracleDensity {
    pub nodes: Vec<f64>,
    pub density: Vec<f64>,
}

impl OracleDensity {
    /// Trapezoid integral of the density.
    pub fn total(&self) -> f64 {
        self.nodes
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Distribution function, piecewise linear in the density.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (xs, ys) in self.nodes.windows(2).zip(self.density.windows(2)) {
            if x <= xs[0] {
                break;
            }
            let h = xs[1] - xs[0];
            if x >= xs[1] {
                acc += 0.5 * h * (ys[0] + ys[1]);
            } else {
                let s = (x - xs[0]) / h;
                let y = ys[0] + s * (ys[1] - ys[0]);
                acc += 0.5 * (x - xs[0]) * (ys[0] + y);
                break;
            }
        }
        acc
    }
}

/// Exact one-point function (the first correlation function) for `N <= 3`.
pub fn quadrature_oracle(spec: &EnsembleSpec, grid: NodeGrid) -> Result<OracleDensity> {
    spec.validate()?;
    if spec.n > 3 {
        return Err(invalid("quadrature oracle only supports N <= 3"));
    }
    let nodes = grid.nodes();
    let weights = grid.weights();
    let m = nodes.len();
    let nf = spec.n as f64;
    let one: Vec<f64> = nodes.iter().map(|&t| nf * spec.field.value(t)).collect();
    let pair = |a: usize, b: usize| -> f64 {
        if a == b {
            return f64::INFINITY;
        }
        let d = nodes[a] - nodes[b];
        -spec.beta * d.abs().ln() + spec.interaction.value(d)
    };
    // Log of the unnormalized marginal, then a single shift before exp.
    let log_marginal: Vec<f64> = match spec.n {
        1 => one.iter().map(|e| -e).collect(),
        2 => (0..m)
            .map(|i| {
                let terms: Vec<f64> = (0..m)
                    .map(|j| weights[j].ln() - one[i] - one[j] - pair(i, j))
                    .collect();
                crate::numerics::log_sum_exp(&terms)
            })
            .collect(),
        _ => {
            let pairs: Vec<Vec<f64>> = (0..m).map(|a| (0..m).map(|b| pair(a, b)).collect()).collect();
            (0..m)
                .map(|i| {
                    let mut terms = Vec::with_capacity(m * m);
                    for j in 0..m {
                        for k in 0..m {
                            terms.push(
                                weights[j].ln() + weights[k].ln()
                                    - one[i]
                                    - one[j]
                                    - one[k]
                                    - pairs[i][j]
                                    - pairs[i][k]
                                    - pairs[j][k],
                            );
                        }
                    }
                    crate::numerics::log_sum_exp(&terms)
                })
                .collect()
        }
    };
    let shift = log_marginal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = log_marginal.iter().map(|l| (l - shift).exp()).collect();
    let mut out = OracleDensity {
        nodes,
        density: raw,
    };
    let total = out.total();
    out.density.iter_mut().for_each(|d| *d /= total);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::field::ExternalField;
    use crate::model::interaction::InteractionPotential;

    #[test]
    fn single_particle_is_boltzmann() {
        let spec = EnsembleSpec::gaussian(1, 2.0).unwrap();
        let grid = NodeGrid::new(-6.0, 6.0, 2001).unwrap();
        let o = quadrature_oracle(&spec, grid).unwrap();
        let z = std::f64::consts::PI.sqrt();
        for (x, d) in o.nodes.iter().zip(&o.density).step_by(97) {
            assert!((d - (-x * x).exp() / z).abs() < 1e-8);
        }
    }

    #[test]
    fn two_particles_normalized_and_positive() {
        let spec = EnsembleSpec::gaussian(2, 2.0).unwrap();
        let o = quadrature_oracle(&spec, NodeGrid::new(-4.0, 4.0, 801).unwrap()).unwrap();
        assert!((o.total() - 1.0).abs() < 1e-8);
        assert!(o.density[1..800].iter().all(|d| *d > 0.0));
        assert!((o.cdf(0.0) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn constant_energy_shift_is_invisible() {
        // h = c contributes a constant to H and disappears after normalization.
        let base = EnsembleSpec::gaussian(2, 2.0).unwrap();
        let shifted = EnsembleSpec::new(
            2,
            2.0,
            ExternalField::gaussian(),
            InteractionPotential::gaussian(3.0, 1e-12),
        )
        .unwrap();
        let grid = NodeGrid::new(-4.0, 4.0, 401).unwrap();
        let a = quadrature_oracle(&base, grid).unwrap();
        let b = quadrature_oracle(&shifted, grid).unwrap();
        for (x, y) in a.density.iter().zip(&b.density) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn three_particles_even() {
        let spec = EnsembleSpec::gaussian(3, 1.0).unwrap();
        let o = quadrature_oracle(&spec, NodeGrid::new(-3.0, 3.0, 121).unwrap()).unwrap();
        assert!((o.total() - 1.0).abs() < 1e-12);
        for i in 0..121 {
            assert!((o.density[i] - o.density[120 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_large_n() {
        let spec = EnsembleSpec::gaussian(4, 2.0).unwrap();
        assert!(quadrature_oracle(&spec, NodeGrid::new(-1.0, 1.0, 11).unwrap()).is_err());
    }
}
