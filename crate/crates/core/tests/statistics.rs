//! Estimator properties on exact Gaussian beta-ensemble draws.

use betagas::equilibrium::{default_grid, solve_field};
use betagas::model::{Configuration, ExternalField, GridMeasure};
use betagas::samplers::tridiagonal_draws;
use betagas::statistics::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn semicircle(beta: f64) -> GridMeasure {
    solve_field(&ExternalField::gaussian(), beta, default_grid(beta), 1e-10).unwrap().mu
}

fn shuffled(samples: &[Configuration], seed: u64) -> Vec<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    samples
        .iter()
        .map(|c| {
            let mut p = c.positions.clone();
            p.shuffle(&mut rng);
            Configuration::new(p)
        })
        .collect()
}

#[test]
fn one_point_estimate_is_normalized() {
    let f = TestFunction::one_point();
    for beta in [1.0, 2.0, 4.0] {
        let mu = semicircle(beta);
        let samples = tridiagonal_draws(100, beta, 7, 600).unwrap();
        let e = averaged_correlation(&samples, &mu, 0.0, 0.5, &f).unwrap();
        assert!((e.value - 1.0).abs() <= 3.0 * e.std_error, "beta={beta}: {} +- {}", e.value, e.std_error);
    }
}

#[test]
fn statistics_ignore_the_order_of_coordinates() {
    let mu = semicircle(2.0);
    let samples = tridiagonal_draws(60, 2.0, 8, 100).unwrap();
    let mixed = shuffled(&samples, 1);
    let f = TestFunction::pair(2.0);
    let a = averaged_correlation(&samples, &mu, 0.0, 0.5, &f).unwrap();
    let b = averaged_correlation(&mixed, &mu, 0.0, 0.5, &f).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(bulk_gaps(&samples, &mu).unwrap(), bulk_gaps(&mixed, &mu).unwrap());
    // Kernel sums run in a different order, so only rounding may differ.
    let (da, db) = (
        empirical_density(&samples, mu.grid(), None).unwrap(),
        empirical_density(&mixed, mu.grid(), None).unwrap(),
    );
    let drift = da.weights().iter().zip(db.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-14, "{drift}");
    let cos = SmoothFunction::Cos { frequency: 1.0 };
    assert_eq!(centered_linear_statistic(&samples, &cos, &mu), centered_linear_statistic(&mixed, &cos, &mu));
}

#[test]
fn doubling_the_sample_count_shrinks_errors_by_root_two() {
    let mu = semicircle(2.0);
    let f = TestFunction::one_point();
    let (mut small, mut large) = (0.0, 0.0);
    for seed in 0..8 {
        let samples = tridiagonal_draws(80, 2.0, 100 + seed, 800).unwrap();
        small += averaged_correlation(&samples[..400], &mu, 0.0, 0.5, &f).unwrap().std_error;
        large += averaged_correlation(&samples, &mu, 0.0, 0.5, &f).unwrap().std_error;
    }
    let ratio = large / small;
    let expected = 0.5f64.sqrt();
    assert!((ratio / expected - 1.0).abs() <= 0.2, "{ratio}");
}

#[test]
fn beta_two_pair_statistic_approaches_the_sine_kernel() {
    let mu = semicircle(2.0);
    let f = TestFunction::pair(2.0);
    let samples = tridiagonal_draws(400, 2.0, 12, 1000).unwrap();
    let e = averaged_correlation(&samples, &mu, 0.0, 0.5, &f).unwrap();
    let sine = sine_kernel_reference(&f).unwrap();
    let poisson = poisson_reference(&f);
    assert!((e.value - sine).abs() <= 3.0 * e.std_error, "{} +- {} vs {sine}", e.value, e.std_error);
    assert!(poisson - e.value > 10.0 * e.std_error);
}

#[test]
fn unfolded_bulk_gaps_have_unit_mean() {
    let mu = semicircle(2.0);
    let samples = tridiagonal_draws(200, 2.0, 13, 200).unwrap();
    let gaps = bulk_gaps(&samples, &mu).unwrap();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!((mean - 1.0).abs() < 0.01, "{mean}");
    // Repulsion: far fewer small gaps than the Poisson law predicts.
    let small = gaps.iter().filter(|g| **g < 0.1).count() as f64 / gaps.len() as f64;
    assert!(small < 0.2 * poisson_spacing_cdf(0.1));
}

#[test]
fn sharded_moments_merge_to_the_whole() {
    let mu = semicircle(2.0);
    let samples = tridiagonal_draws(40, 2.0, 14, 300).unwrap();
    let y = centered_linear_statistic(&samples, &SmoothFunction::Cos { frequency: 1.0 }, &mu);
    let whole: Moments = y.iter().copied().collect();
    let shards: Vec<Moments> = y.chunks(70).map(|c| c.iter().copied().collect()).collect();
    let merged = shards.iter().fold(Moments::default(), |acc, m| acc.merge(m));
    assert_eq!(merged.count, whole.count);
    assert!((merged.variance() - whole.variance()).abs() <= 1e-12 * whole.variance());
}
