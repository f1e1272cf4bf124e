//! Exact sampler for the Gaussian beta-ensemble with density proportional to
//! `prod |x_i - x_j|^beta exp(-N sum x_j^2)`.
//!
//! The symmetric tridiagonal matrix with `N(0, 1)` diagonal and off-diagonal
//! entries `chi_{beta k} / sqrt(2)`, `k = N-1, ..., 1`, has eigenvalue density
//! proportional to `prod |l_i - l_j|^beta exp(-sum l_j^2 / 2)`. Substituting
//! `l = sqrt(2N) x` turns the weight into `exp(-N sum x_j^2)`, so the returned
//! positions are the eigenvalues divided by `sqrt(2N)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::model::ensemble::Configuration;

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `diag` has length `n`, `off` length `n - 1`.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations < 200, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

fn draw(n: usize, beta: f64, rng: &mut impl Rng) -> Configuration {
    let diag: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let off: Vec<f64> = (1..n)
        .rev()
        .map(|k| {
            let chi2 = ChiSquared::new(beta * k as f64).expect("positive degrees of freedom");
            (chi2.sample(rng) / 2.0).sqrt()
        })
        .collect();
    let scale = (2.0 * n as f64).sqrt();
    let x = tridiagonal_eigenvalues(&diag, &off)
        .into_iter()
        .map(|l| l / scale)
        .collect();
    Configuration::new(x)
}

/// One draw; sorted positions.
pub fn tridiagonal_gaussian_beta(n: usize, beta: f64, seed: u64) -> Result<Configuration> {
    Ok(tridiagonal_draws(n, beta, seed, 1)?.remove(0))
}

/// `count` independent draws from a single seeded stream.
pub fn tridiagonal_draws(n: usize, beta: f64, seed: u64, count: usize) -> Result<Vec<Configuration>> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid("beta must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| draw(n, beta, &mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{batch_means, mean_and_variance};
    use nalgebra::DMatrix;

    #[test]
    fn ql_matches_dense_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 5, 40] {
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let e: Vec<f64> = (1..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = d[i];
                if i + 1 < n {
                    m[(i, i + 1)] = e[i];
                    m[(i + 1, i)] = e[i];
                }
            }
            let mut dense: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            dense.sort_by(f64::total_cmp);
            let ql = tridiagonal_eigenvalues(&d, &e);
            for (a, b) in dense.iter().zip(&ql) {
                assert!((a - b).abs() < 1e-11, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn single_particle_has_variance_half() {
        let draws = tridiagonal_draws(1, 3.0, 2, 40_000).unwrap();
        let xs: Vec<f64> = draws.iter().map(|c| c.positions[0]).collect();
        let (m, v) = mean_and_variance(&xs);
        let n = xs.len() as f64;
        assert!(m.abs() < 3.0 * (0.5 / n).sqrt());
        // Var of the sample variance for a Gaussian is 2 sigma^4 / (n - 1).
        assert!((v - 0.5).abs() < 3.0 * (2.0 * 0.25 / n).sqrt());
    }

    #[test]
    fn second_moment_and_centering() {
        let n = 50;
        let draws = tridiagonal_draws(n, 2.0, 4, 400).unwrap();
        let m2: Vec<f64> = draws
            .iter()
            .map(|c| c.positions.iter().map(|x| x * x).sum::<f64>() / n as f64)
            .collect();
        let m1: Vec<f64> = draws
            .iter()
            .map(|c| c.positions.iter().sum::<f64>() / n as f64)
            .collect();
        // E[(1/N) sum x^2] = 1/(2N) + beta (N - 1) / (4N) = 0.5 at beta = 2.
        let (mean2, se2) = batch_means(&m2, 20);
        assert!((mean2 - 0.5).abs() < 3.0 * se2, "{mean2} +- {se2}");
        let (mean1, se1) = batch_means(&m1, 20);
        assert!(mean1.abs() < 3.0 * se1);
        assert!(draws.iter().all(|c| c.positions.windows(2).all(|w| w[0] <= w[1])));
    }
}
