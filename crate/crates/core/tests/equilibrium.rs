//! Equilibrium and self-consistent solves against closed forms and their own
//! certificates.

use betagas::equilibrium::*;
use betagas::model::measure::{semicircle_cdf, Grid, GridMeasure, DEFAULT_SUPPORT_THRESHOLD};
use betagas::model::{ExternalField, InteractionPotential};
use proptest::prelude::*;

fn gaussian(beta: f64, cells: usize) -> EquilibriumSolution {
    let grid = Grid::symmetric(3.0 * beta.sqrt(), cells).unwrap();
    solve_field(&ExternalField::gaussian(), beta, grid, 1e-10).unwrap()
}

#[test]
fn gaussian_field_gives_the_semicircle() {
    for beta in [1.0, 2.0, 4.0] {
        let s = gaussian(beta, 1024);
        let r = beta.sqrt();
        let (lo, hi) = s.mu.support(DEFAULT_SUPPORT_THRESHOLD).unwrap();
        assert!((lo + r).abs() <= s.mu.cell_width() && (hi - r).abs() <= s.mu.cell_width());
        assert!(s.el_residual <= 1e-6);
        let exact = GridMeasure::from_cdf(s.mu.grid(), semicircle_cdf(r)).unwrap();
        assert!(s.mu.l1_distance(&exact) <= 1e-2);
    }
}

#[test]
fn certificate_detects_displaced_mass() {
    let s = gaussian(2.0, 512);
    let potential: Vec<f64> = s.mu.midpoints().iter().map(|t| t * t).collect();
    let (base, _) = euler_lagrange_residual(&s.mu, &potential, 2.0).unwrap();
    assert!(base <= 1e-10);
    let mut w = s.mu.weights().to_vec();
    let center = w.len() / 2;
    let (lo, _) = s.mu.support(DEFAULT_SUPPORT_THRESHOLD).unwrap();
    let edge = s.mu.grid().cell_of(lo).unwrap() + 2;
    // Move 1% of the mass from the central cells to a cell near the edge.
    let mut remaining = 0.01;
    for k in 0.. {
        for c in [center + k, center - k - 1] {
            let take = (0.5 * w[c]).min(remaining);
            w[c] -= take;
            remaining -= take;
        }
        if remaining <= 0.0 {
            break;
        }
    }
    w[edge] += 0.01;
    let perturbed = GridMeasure::new(s.mu.grid(), w).unwrap();
    let (bumped, _) = euler_lagrange_residual(&perturbed, &potential, 2.0).unwrap();
    assert!(bumped > 10.0 * 1e-10, "{bumped}");
}

#[test]
fn refinement_behaves_like_a_cauchy_sequence() {
    let coarse = gaussian(2.0, 256).mu;
    let mid = gaussian(2.0, 512).mu;
    let fine = gaussian(2.0, 1024).mu;
    // Compare on the finest grid through the distribution functions.
    let project = |m: &GridMeasure| GridMeasure::from_cdf(fine.grid(), |x| m.cdf(x)).unwrap();
    let d1 = project(&coarse).l1_distance(&project(&mid));
    let d2 = project(&mid).l1_distance(&fine);
    assert!(d2 <= 2.0 * d1, "{d1} then {d2}");
}

#[test]
fn fixed_point_is_self_consistent() {
    let h = InteractionPotential::gaussian(0.5, 1.0);
    let options = SelfConsistentOptions { tol: 1e-6, ..Default::default() };
    let sc = self_consistent_solve(&ExternalField::gaussian(), &h, 2.0, default_grid(2.0), &options).unwrap();
    assert!(sc.residual <= 1e-6);
    assert!(sc.mu.l1_distance(&sc.image.mu) <= 1e-6);
    // A repulsive pair term spreads the measure beyond the semicircle.
    let (_, hi) = sc.mu.support(DEFAULT_SUPPORT_THRESHOLD).unwrap();
    assert!(hi > 2f64.sqrt());
}

#[test]
fn zero_interaction_reduces_to_the_plain_solve() {
    let options = SelfConsistentOptions::default();
    let sc = self_consistent_solve(
        &ExternalField::gaussian(),
        &InteractionPotential::zero(),
        2.0,
        default_grid(2.0),
        &options,
    )
    .unwrap();
    let problem = EquilibriumProblem::from_fn(default_grid(2.0), |t| t * t, 2.0).unwrap();
    let plain = solve_equilibrium(&problem, options.el_tol).unwrap();
    assert_eq!(sc.mu, plain.mu);
    assert_eq!(sc.iterations, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn iterates_stay_feasible_and_objective_decreases(c in 0.5f64..2.0, beta in 0.5f64..4.0) {
        let grid = Grid::symmetric(3.0 * (beta / c).sqrt(), 256).unwrap();
        let problem = EquilibriumProblem::from_fn(grid, |t| c * t * t, beta).unwrap();
        let s = solve_equilibrium(&problem, 1e-9).unwrap();
        let total: f64 = s.mu.weights().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(s.mu.weights().iter().all(|w| *w >= 0.0));
        for pair in s.objective_history.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0));
        }
        prop_assert!(s.el_residual <= 1e-9);
    }
}
