//! Metropolis-adjusted Langevin chain (full-vector moves).
//!
//! Proposal `y = x - (eps / 2) grad H(x) + sqrt(eps) z`, corrected with the
//! asymmetric proposal density. Proposals whose gradient is undefined (exact
//! coincidences) are rejected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::metropolis::{initial_configuration, initial_radius, ChainRun, ChainSchedule};
use super::target::Target;
use crate::error::{Error, Result};
use crate::model::ensemble::{Configuration, EnsembleSpec};

pub const MALA_TARGET_ACCEPTANCE: f64 = 0.5;

/// `log q(to | from)` up to a constant, given `grad H(from)`.
fn log_proposal(to: &[f64], from: &[f64], grad_from: &[f64], eps: f64) -> f64 {
    -to.iter()
        .zip(from.iter().zip(grad_from))
        .map(|(y, (x, g))| {
            let r = y - x + 0.5 * eps * g;
            r * r
        })
        .sum::<f64>()
        / (2.0 * eps)
}

pub fn mala_chain(spec: &EnsembleSpec, seed: u64, schedule: &ChainSchedule) -> Result<ChainRun> {
    spec.validate()?;
    if spec.beta < 1.0 {
        return Err(Error::Unsupported(
            "Langevin moves need beta >= 1; use the Metropolis chain".into(),
        ));
    }
    let target = Target::new(&spec.field, spec.beta, &spec.interaction);
    mala_chain_for(target, spec.n, seed, schedule)
}

pub fn mala_chain_for(target: Target<'_>, n: usize, seed: u64, schedule: &ChainSchedule) -> Result<ChainRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = initial_radius(target.field, target.beta);
    let mut x = initial_configuration(n, radius);
    let mut energy = target.energy(&x);
    let mut grad = target.gradient(&x)?;
    // eps plays the role of a time step; the local spacing is ~ r / N.
    let mut log_eps = schedule
        .initial_step
        .unwrap_or((radius / n as f64).powi(2))
        .ln();

    let burn_in = schedule.burn_in.unwrap_or(10 * 1000);
    let thin = schedule.thin.unwrap_or(1).max(1);
    let window = 100;
    let mut burn_accepted = 0u64;
    let mut window_accepted = 0;
    let mut rounds = 0.0;
    let mut post_accepted = 0u64;
    let mut post_proposals = 0u64;
    let mut samples = Vec::with_capacity(schedule.n_samples);

    let total = burn_in + thin * schedule.n_samples;
    for step in 0..total {
        let eps = log_eps.exp();
        let sd = eps.sqrt();
        let proposal: Vec<f64> = x
            .iter()
            .zip(&grad)
            .map(|(xi, gi)| xi - 0.5 * eps * gi + sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let new_energy = target.energy(&proposal);
        let u: f64 = rng.random();
        let mut accepted = false;
        if new_energy.is_finite() {
            if let Ok(new_grad) = target.gradient(&proposal) {
                let log_ratio = energy - new_energy + log_proposal(&x, &proposal, &new_grad, eps)
                    - log_proposal(&proposal, &x, &grad, eps);
                if log_ratio >= 0.0 || u < log_ratio.exp() {
                    x = proposal;
                    energy = new_energy;
                    grad = new_grad;
                    accepted = true;
                }
            }
        }

        if step < burn_in {
            if accepted {
                burn_accepted += 1;
                window_accepted += 1;
            }
            if schedule.adapt && (step + 1) % window == 0 {
                rounds += 1.0;
                let rate = window_accepted as f64 / window as f64;
                log_eps += (rate - MALA_TARGET_ACCEPTANCE) * 2.0 / f64::sqrt(rounds);
                window_accepted = 0;
            }
            if step + 1 == burn_in && burn_accepted == 0 {
                return Err(Error::StepSizeCollapse);
            }
        } else {
            post_proposals += 1;
            if accepted {
                post_accepted += 1;
            }
            if (step - burn_in + 1) % thin == 0 {
                samples.push(Configuration::new(x.clone()).sorted());
            }
        }
    }

    Ok(ChainRun {
        seed,
        n,
        step_size: log_eps.exp(),
        burn_in,
        thin,
        n_steps: total,
        acceptance_rate: post_accepted as f64 / post_proposals.max(1) as f64,
        burn_in_acceptance: burn_accepted as f64 / burn_in.max(1) as f64,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_steps_are_almost_always_accepted() {
        let spec = EnsembleSpec::gaussian(4, 2.0).unwrap();
        let schedule = ChainSchedule::new(2000).burn_in(0).initial_step(1e-5).fixed_step();
        let run = mala_chain(&spec, 5, &schedule).unwrap();
        assert!(run.acceptance_rate > 0.95, "{}", run.acceptance_rate);
    }

    #[test]
    fn refuses_weak_repulsion() {
        let spec = EnsembleSpec::gaussian(4, 0.5).unwrap();
        assert!(matches!(
            mala_chain(&spec, 0, &ChainSchedule::new(10)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn one_particle_variance() {
        let spec = EnsembleSpec::gaussian(1, 2.0).unwrap();
        let run = mala_chain(&spec, 8, &ChainSchedule::new(100_000).burn_in(2000).thin(2)).unwrap();
        let sq: Vec<f64> = run.samples.iter().map(|c| c.positions[0].powi(2)).collect();
        let (m, se) = crate::numerics::batch_means(&sq, 50);
        assert!((m - 0.5).abs() < 3.0 * se, "{m} +- {se}");
    }

    #[test]
    fn deterministic() {
        let spec = EnsembleSpec::gaussian(3, 2.0).unwrap();
        let s = ChainSchedule::new(50).burn_in(100);
        assert_eq!(mala_chain(&spec, 1, &s).unwrap(), mala_chain(&spec, 1, &s).unwrap());
    }
}
