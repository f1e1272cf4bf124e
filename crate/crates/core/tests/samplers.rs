//! Samplers against exact laws and against each other.

use betagas::model::{Configuration, EnsembleSpec, ExternalField, InteractionPotential};
use betagas::samplers::*;
use betagas::statistics::{ks_against, ks_two_sample};
use rayon::prelude::*;

fn positions(samples: &[Configuration]) -> Vec<f64> {
    samples.iter().flat_map(|c| c.positions.iter().copied()).collect()
}

fn pair_spec() -> EnsembleSpec {
    EnsembleSpec::new(2, 2.0, ExternalField::gaussian(), InteractionPotential::gaussian(0.5, 1.0)).unwrap()
}

fn oracle_ks(samples: &[Configuration]) -> f64 {
    let oracle = quadrature_oracle(&pair_spec(), NodeGrid::new(-4.0, 4.0, 1601).unwrap()).unwrap();
    let total = oracle.total();
    ks_against(&positions(samples), |x| oracle.cdf(x) / total)
}

#[test]
fn metropolis_matches_the_two_particle_oracle() {
    let run = metropolis_chain(&pair_spec(), 21, &ChainSchedule::new(40_000).thin(20)).unwrap();
    let ks = oracle_ks(&run.samples);
    assert!(ks <= 0.02, "{ks}");
}

#[test]
fn mala_matches_the_two_particle_oracle() {
    let run = mala_chain(&pair_spec(), 22, &ChainSchedule::new(40_000).thin(5)).unwrap();
    assert!((run.acceptance_rate - MALA_TARGET_ACCEPTANCE).abs() < 0.2, "{}", run.acceptance_rate);
    let ks = oracle_ks(&run.samples);
    assert!(ks <= 0.02, "{ks}");
}

#[test]
fn mala_refuses_weak_repulsion() {
    let spec = EnsembleSpec::gaussian(4, 0.5).unwrap();
    assert!(matches!(
        mala_chain(&spec, 1, &ChainSchedule::new(10)),
        Err(betagas::Error::Unsupported(_))
    ));
}

#[test]
fn tridiagonal_and_metropolis_agree_at_n16() {
    let spec = EnsembleSpec::gaussian(16, 2.0).unwrap();
    let chains: Vec<ChainRun> = (0..4u64)
        .into_par_iter()
        .map(|s| metropolis_chain(&spec, 40 + s, &ChainSchedule::new(1500).thin(5 * 16)).unwrap())
        .collect();
    let mcmc: Vec<Configuration> = chains.into_iter().flat_map(|r| r.samples).collect();
    let exact = tridiagonal_draws(16, 2.0, 41, 6000).unwrap();
    let ks = ks_two_sample(&positions(&mcmc), &positions(&exact));
    assert!(ks <= 0.03, "{ks}");
}

#[test]
fn split_halves_of_a_chain_agree() {
    let spec = EnsembleSpec::new(30, 2.0, ExternalField::gaussian(), InteractionPotential::gaussian(0.5, 1.0)).unwrap();
    let run = metropolis_chain(&spec, 5, &ChainSchedule::new(4000).thin(5 * 30)).unwrap();
    let (first, second) = run.samples.split_at(run.samples.len() / 2);
    let ks = ks_two_sample(&positions(first), &positions(second));
    assert!(ks <= 0.03, "{ks}");
}

#[test]
fn identical_seeds_give_identical_streams() {
    let spec = EnsembleSpec::new(8, 1.0, ExternalField::gaussian(), InteractionPotential::gaussian(0.3, 2.0)).unwrap();
    let schedule = ChainSchedule::new(50).burn_in(2000);
    let a = metropolis_chain(&spec, 9, &schedule).unwrap();
    let b = metropolis_chain(&spec, 9, &schedule).unwrap();
    assert_eq!(a, b);
    assert_eq!(tridiagonal_draws(8, 2.0, 3, 5).unwrap(), tridiagonal_draws(8, 2.0, 3, 5).unwrap());
}
