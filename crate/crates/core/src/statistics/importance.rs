//! Reweighting diagnostics for the fluctuation term `U` of the pair
//! interaction, evaluated on samples of the comparison ensemble with field
//! `V = Q + h_mu`.
//!
//! The modified law is `q dP_V` with `q = exp(U) / E_V exp(U)`, so the
//! Dirichlet form of `sqrt(q)` is
//! `(1 / 8N) sum_l E[exp(U) (d_l U)^2] / E[exp(U)]`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::ensemble::Configuration;
use crate::model::hoeffding::{grad_u, u_direct};
use crate::model::interaction::InteractionPotential;
use crate::model::measure::GridMeasure;
use crate::numerics::batch_means;

/// Effective sample size below which weights are considered degenerate.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 50.0;
pub const IMPORTANCE_BATCHES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GradientMode {
    Analytic,
    /// Central differences of `u_direct` with the given step.
    FiniteDifference(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletEstimate {
    pub n: usize,
    pub value: f64,
    /// Spread of batch-wise ratio estimates.
    pub std_error: f64,
    pub effective_sample_size: f64,
    pub n_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpMomentEstimate {
    pub n: usize,
    pub lambda: f64,
    pub lower: f64,
    pub estimate: f64,
    pub upper: f64,
    pub std_error: f64,
    pub effective_sample_size: f64,
}

/// `(sum w)^2 / sum w^2`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}

fn check_degeneracy(ess: f64) {
    if ess < MIN_EFFECTIVE_SAMPLES {
        warn!("importance weights are degenerate: effective sample size {ess:.1} < {MIN_EFFECTIVE_SAMPLES}");
    }
}

fn gradient(x: &Configuration, h: &InteractionPotential, mu: &GridMeasure, mode: GradientMode) -> Result<Vec<f64>> {
    match mode {
        GradientMode::Analytic => grad_u(x, h, mu),
        GradientMode::FiniteDifference(step) => (0..x.len())
            .map(|l| {
                let mut plus = x.positions.clone();
                let mut minus = x.positions.clone();
                plus[l] += step;
                minus[l] -= step;
                let up = u_direct(&Configuration::new(plus), h, mu)?;
                let down = u_direct(&Configuration::new(minus), h, mu)?;
                Ok((up - down) / (2.0 * step))
            })
            .collect(),
    }
}

fn batch_ratio_error(num: &[f64], den: &[f64], batches: usize) -> f64 {
    let n = num.len();
    let batches = batches.min(n);
    if batches < 2 {
        return f64::NAN;
    }
    let size = n / batches;
    let ratios: Vec<f64> = (0..batches)
        .map(|b| {
            let r = b * size..(b + 1) * size;
            num[r.clone()].iter().sum::<f64>() / den[r].iter().sum::<f64>()
        })
        .collect();
    batch_means(&ratios, batches).1
}

/// Self-normalized estimate of the Dirichlet form of `sqrt(q)`.
pub fn estimate_dirichlet(
    samples: &[Configuration],
    h: &InteractionPotential,
    mu: &GridMeasure,
    mode: GradientMode,
) -> Result<DirichletEstimate> {
    let n = samples.first().map(|c| c.len()).ok_or_else(|| invalid("no samples"))?;
    if h.is_zero() {
        return Ok(DirichletEstimate {
            n,
            value: 0.0,
            std_error: 0.0,
            effective_sample_size: samples.len() as f64,
            n_samples: samples.len(),
        });
    }
    let mut log_w = Vec::with_capacity(samples.len());
    let mut sq = Vec::with_capacity(samples.len());
    for c in samples {
        let c = c.clone().sorted();
        log_w.push(u_direct(&c, h, mu)?);
        let g = gradient(&c, h, mu, mode)?;
        sq.push(g.iter().map(|v| v * v).sum::<f64>() / (8.0 * n as f64));
    }
    let shift = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - shift).exp()).collect();
    let ess = effective_sample_size(&w);
    check_degeneracy(ess);
    let num: Vec<f64> = w.iter().zip(&sq).map(|(a, b)| a * b).collect();
    let value = num.iter().sum::<f64>() / w.iter().sum::<f64>();
    Ok(DirichletEstimate {
        n,
        value,
        std_error: batch_ratio_error(&num, &w, IMPORTANCE_BATCHES),
        effective_sample_size: ess,
        n_samples: samples.len(),
    })
}

/// `E_V exp(lambda U)` with a three-standard-error band.
pub fn exp_moment_diagnostic(
    samples: &[Configuration],
    h: &InteractionPotential,
    mu: &GridMeasure,
    lambda: f64,
) -> Result<ExpMomentEstimate> {
    let n = samples.first().map(|c| c.len()).ok_or_else(|| invalid("no samples"))?;
    if h.is_zero() || lambda == 0.0 {
        return Ok(ExpMomentEstimate {
            n,
            lambda,
            lower: 1.0,
            estimate: 1.0,
            upper: 1.0,
            std_error: 0.0,
            effective_sample_size: samples.len() as f64,
        });
    }
    let values = samples
        .iter()
        .map(|c| Ok((lambda * u_direct(&c.clone().sorted(), h, mu)?).exp()))
        .collect::<Result<Vec<f64>>>()?;
    let ess = effective_sample_size(&values);
    check_degeneracy(ess);
    let (estimate, std_error) = batch_means(&values, IMPORTANCE_BATCHES);
    Ok(ExpMomentEstimate {
        n,
        lambda,
        lower: estimate - 3.0 * std_error,
        estimate,
        upper: estimate + 3.0 * std_error,
        std_error,
        effective_sample_size: ess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::measure::{semicircle_cdf, Grid};
    use crate::samplers::tridiagonal_draws;

    fn semicircle() -> GridMeasure {
        GridMeasure::from_cdf(Grid::symmetric(2.0, 512).unwrap(), semicircle_cdf(2f64.sqrt())).unwrap()
    }

    #[test]
    fn zero_interaction_is_trivial() {
        let samples = tridiagonal_draws(10, 2.0, 1, 30).unwrap();
        let mu = semicircle();
        let h = InteractionPotential::zero();
        assert_eq!(estimate_dirichlet(&samples, &h, &mu, GradientMode::Analytic).unwrap().value, 0.0);
        let m = exp_moment_diagnostic(&samples, &h, &mu, 1.0).unwrap();
        assert_eq!((m.lower, m.estimate, m.upper), (1.0, 1.0, 1.0));
        let h = InteractionPotential::gaussian(0.2, 1.0);
        assert_eq!(exp_moment_diagnostic(&samples, &h, &mu, 0.0).unwrap().estimate, 1.0);
    }

    #[test]
    fn finite_differences_agree() {
        let samples = tridiagonal_draws(25, 2.0, 2, 40).unwrap();
        let mu = semicircle();
        let h = InteractionPotential::gaussian(0.3, 1.0);
        let a = estimate_dirichlet(&samples, &h, &mu, GradientMode::Analytic).unwrap();
        let b = estimate_dirichlet(&samples, &h, &mu, GradientMode::FiniteDifference(1e-5)).unwrap();
        assert!(((a.value - b.value) / a.value).abs() <= 1e-4, "{} vs {}", a.value, b.value);
        assert!(a.value > 0.0 && a.effective_sample_size > 1.0);
    }

    #[test]
    fn positive_definite_interaction_keeps_moment_below_one() {
        // hat h >= 0 makes U <= 0.
        let samples = tridiagonal_draws(20, 2.0, 3, 40).unwrap();
        let m = exp_moment_diagnostic(&samples, &InteractionPotential::gaussian(0.5, 1.0), &semicircle(), 1.0).unwrap();
        assert!(m.estimate > 0.0 && m.estimate <= 1.0);
        assert!(m.lower <= m.estimate && m.estimate <= m.upper);
    }

    #[test]
    fn ess_of_equal_weights() {
        assert_eq!(effective_sample_size(&[2.0; 10]), 10.0);
        assert!((effective_sample_size(&[1.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
