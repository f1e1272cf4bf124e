//! Locally averaged, density-rescaled `k`-point correlation integrals.
//!
//! For a center `a`, window `s = N^(xi - 1)` and density `m = mu(a)`, the
//! quantity estimated is
//!
//! ```text
//! (1 / 2s) int_{a-s}^{a+s} du  int f(t) rho_k(u + t / (N m)) / m^k dt
//! ```
//!
//! with `rho_k` the `k`-point marginal density. Since
//! `E sum_{distinct} phi(x_i1, ..., x_ik) = (N)_k int phi rho_k`, each sample
//! contributes `N^k / (N)_k` times the distinct-tuple sum of
//! `f(N m (x_i1 - u), ..., N m (x_ik - u))`, averaged over `u`. Test functions
//! are products `anchor(t_1) prod_j g_j(t_j - t_1)`, so the `u`-average only
//! touches the anchor and is done exactly per particle.

use serde::{Deserialize, Serialize};

use super::unfold::bulk_window;
use crate::error::{invalid, Error, Result};
use crate::model::ensemble::Configuration;
use crate::model::measure::{GridMeasure, DEFAULT_SUPPORT_THRESHOLD};
use crate::numerics::{batch_means, integrate};

/// Number of batches for the standard error.
pub const CORRELATION_BATCHES: usize = 20;

/// `height * exp(1 - 1 / (1 - ((t - center) / radius)^2))` on `|t - center| < radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
    pub height: f64,
}

/// `int_{-1}^{1} exp(1 - 1 / (1 - r^2)) dr`.
fn unit_bump_mass() -> f64 {
    integrate(|r| bump_profile(r), -1.0, 1.0, 16)
}

fn bump_profile(r: f64) -> f64 {
    let q = 1.0 - r * r;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

impl Bump {
    pub fn new(center: f64, radius: f64, height: f64) -> Self {
        Self { center, radius, height }
    }

    /// Bump with unit integral.
    pub fn unit_mass(center: f64, radius: f64) -> Self {
        Self::new(center, radius, 1.0 / (radius * unit_bump_mass()))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.height * bump_profile((t - self.center) / self.radius)
    }

    pub fn integral(&self) -> f64 {
        self.height * self.radius * unit_bump_mass()
    }

    /// `int_lo^hi` of the bump.
    pub fn integral_over(&self, lo: f64, hi: f64) -> f64 {
        let a = lo.max(self.center - self.radius);
        let b = hi.min(self.center + self.radius);
        if b <= a {
            return 0.0;
        }
        if a <= self.center - self.radius && b >= self.center + self.radius {
            return self.integral();
        }
        integrate(|t| self.value(t), a, b, 8)
    }

    /// Largest `|t|` where the bump is nonzero.
    pub fn reach(&self) -> f64 {
        self.center.abs() + self.radius
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite() && self.center.is_finite() && self.height.is_finite()) {
            return Err(invalid("bump needs a positive radius and finite center and height"));
        }
        Ok(())
    }
}

/// `f(t_1, ..., t_k) = anchor(t_1) prod_j offsets[j](t_{j+1} - t_1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub anchor: Bump,
    #[serde(default)]
    pub offsets: Vec<Bump>,
}

impl TestFunction {
    /// Unit-mass anchor of radius 1 and no offsets.
    pub fn one_point() -> Self {
        Self {
            anchor: Bump::unit_mass(0.0, 1.0),
            offsets: Vec::new(),
        }
    }

    /// Unit-mass anchor and a single unit-height offset bump of radius `r`.
    pub fn pair(r: f64) -> Self {
        Self {
            anchor: Bump::unit_mass(0.0, 1.0),
            offsets: vec![Bump::new(0.0, r, 1.0)],
        }
    }

    pub fn k(&self) -> usize {
        1 + self.offsets.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.anchor.validate()?;
        for b in &self.offsets {
            b.validate()?;
        }
        if !(1..=3).contains(&self.k()) {
            return Err(invalid("correlation order k must be 1, 2 or 3"));
        }
        Ok(())
    }

    pub fn descriptor(&self) -> String {
        let bump = |b: &Bump| format!("bump(c={},r={},h={})", b.center, b.radius, b.height);
        let mut s = bump(&self.anchor);
        for b in &self.offsets {
            s.push_str(" x ");
            s.push_str(&bump(b));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub k: usize,
    pub center: f64,
    pub window: f64,
    pub xi: f64,
    /// `mu(a)`, the density used for rescaling.
    pub density: f64,
    pub test_function: String,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Window half-width `N^(xi - 1)`.
pub fn window_half_width(n: usize, xi: f64) -> f64 {
    (n as f64).powf(xi - 1.0)
}

/// Per-configuration values of the estimator (before averaging).
pub fn correlation_values(
    samples: &[Configuration],
    mu: &GridMeasure,
    a: f64,
    xi: f64,
    f: &TestFunction,
) -> Result<(Vec<f64>, f64, f64)> {
    f.validate()?;
    if !(xi > 0.0 && xi <= 0.5) {
        return Err(invalid("xi must lie in (0, 1/2]"));
    }
    let n = samples.first().map(|c| c.len()).ok_or_else(|| invalid("no samples"))?;
    let k = f.k();
    if n < k {
        return Err(invalid("fewer particles than the correlation order"));
    }
    let (bulk_lo, bulk_hi) = bulk_window(mu)?;
    if a < bulk_lo || a > bulk_hi {
        return Err(Error::OutsideBulk(a));
    }
    let s = window_half_width(n, xi);
    let (lo, hi) = mu.support(DEFAULT_SUPPORT_THRESHOLD).expect("bulk window implies support");
    if a - s < lo || a + s > hi {
        return Err(invalid(format!(
            "averaging window [{}, {}] leaves the support [{lo}, {hi}]",
            a - s,
            a + s
        )));
    }
    let m = mu.density_at(a);
    if m <= 0.0 {
        return Err(Error::OutsideBulk(a));
    }
    let scale = n as f64 * m;
    let falling: f64 = (0..k).map(|j| (n - j) as f64).product();
    let prefactor = (n as f64).powi(k as i32) / falling;
    let anchor = f.anchor;
    // Particles whose anchor factor can be nonzero.
    let x_lo = a - s + (anchor.center - anchor.radius) / scale;
    let x_hi = a + s + (anchor.center + anchor.radius) / scale;
    let offset_reach = f.offsets.iter().map(Bump::reach).fold(0.0, f64::max) / scale;

    let values = samples
        .iter()
        .map(|c| {
            let x = &c.positions;
            if x.len() != n {
                return Err(invalid("sample sets must have a fixed N"));
            }
            let sorted_input;
            let x: &[f64] = if x.windows(2).all(|w| w[0] <= w[1]) {
                x
            } else {
                sorted_input = c.clone().sorted().positions;
                &sorted_input
            };
            let start = x.partition_point(|v| *v < x_lo);
            let mut total = 0.0;
            for i in start..n {
                let xi1 = x[i];
                if xi1 > x_hi {
                    break;
                }
                let weight = anchor.integral_over(scale * (xi1 - a - s), scale * (xi1 - a + s)) / (2.0 * s * scale);
                if weight == 0.0 {
                    continue;
                }
                let inner = match f.offsets.len() {
                    0 => 1.0,
                    _ => {
                        let j0 = x.partition_point(|v| *v < xi1 - offset_reach);
                        let mut sums = [0.0; 2];
                        let mut overlap = 0.0;
                        for (j, &xj) in x.iter().enumerate().skip(j0) {
                            if xj > xi1 + offset_reach {
                                break;
                            }
                            if j == i {
                                continue;
                            }
                            let t = scale * (xj - xi1);
                            let g: Vec<f64> = f.offsets.iter().map(|b| b.value(t)).collect();
                            sums[0] += g[0];
                            if g.len() == 2 {
                                sums[1] += g[1];
                                overlap += g[0] * g[1];
                            }
                        }
                        if f.offsets.len() == 1 {
                            sums[0]
                        } else {
                            sums[0] * sums[1] - overlap
                        }
                    }
                };
                total += weight * inner;
            }
            Ok(prefactor * total)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((values, s, m))
}

/// Monte Carlo estimate with batch-means standard error.
pub fn averaged_correlation(
    samples: &[Configuration],
    mu: &GridMeasure,
    a: f64,
    xi: f64,
    f: &TestFunction,
) -> Result<CorrelationEstimate> {
    if samples.len() < CORRELATION_BATCHES {
        return Err(invalid(format!(
            "need at least {CORRELATION_BATCHES} configurations for batch means"
        )));
    }
    let (values, s, m) = correlation_values(samples, mu, a, xi, f)?;
    let (value, std_error) = batch_means(&values, CORRELATION_BATCHES);
    Ok(CorrelationEstimate {
        k: f.k(),
        center: a,
        window: s,
        xi,
        density: m,
        test_function: f.descriptor(),
        value,
        std_error,
        n_samples: samples.len(),
    })
}

/// `1 - (sin(pi r) / (pi r))^2`, the bulk pair correlation at `beta = 2`.
pub fn sine_kernel_pair(r: f64) -> f64 {
    if r.abs() < 1e-8 {
        let pr = std::f64::consts::PI * r;
        return pr * pr / 3.0;
    }
    let pr = std::f64::consts::PI * r;
    let s = pr.sin() / pr;
    1.0 - s * s
}

/// Limit of the estimator for the `beta = 2` sine process (`k <= 2`).
pub fn sine_kernel_reference(f: &TestFunction) -> Result<f64> {
    match f.offsets.as_slice() {
        [] => Ok(f.anchor.integral()),
        [g] => Ok(f.anchor.integral()
            * integrate(|r| g.value(r) * sine_kernel_pair(r), g.center - g.radius, g.center + g.radius, 32)),
        _ => Err(Error::Unsupported("sine-kernel reference only for k <= 2".into())),
    }
}

/// Limit of the estimator for a unit-density Poisson process.
pub fn poisson_reference(f: &TestFunction) -> f64 {
    f.anchor.integral() * f.offsets.iter().map(Bump::integral).product::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::measure::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_bump_constant() {
        // int_{-1}^{1} exp(-1/(1-r^2)) dr = 0.4439938161680794...
        assert!((unit_bump_mass() / std::f64::consts::E - 0.443_993_816_168_079_4).abs() < 1e-12);
        let b = Bump::unit_mass(0.3, 0.7);
        assert!((integrate(|t| b.value(t), -0.4, 1.0, 64) - 1.0).abs() < 1e-12);
        assert!((b.integral_over(-5.0, 0.3) - 0.5).abs() < 1e-10);
    }

    fn iid_uniform(n: usize, count: usize, seed: u64) -> Vec<Configuration> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| Configuration::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).sorted())
            .collect()
    }

    #[test]
    fn iid_points_have_flat_correlations() {
        let mu = GridMeasure::uniform(Grid::symmetric(1.0, 200).unwrap());
        let samples = iid_uniform(200, 400, 11);
        let one = averaged_correlation(&samples, &mu, 0.0, 0.5, &TestFunction::one_point()).unwrap();
        assert!((one.value - 1.0).abs() < 3.0 * one.std_error, "{one:?}");
        let f = TestFunction::pair(2.0);
        let two = averaged_correlation(&samples, &mu, 0.0, 0.5, &f).unwrap();
        let expected = poisson_reference(&f);
        assert!((two.value - expected).abs() < 3.0 * two.std_error, "{two:?} vs {expected}");
        let f3 = TestFunction {
            anchor: Bump::unit_mass(0.0, 1.0),
            offsets: vec![Bump::new(-1.0, 1.0, 1.0), Bump::new(1.0, 1.0, 1.0)],
        };
        let three = averaged_correlation(&samples, &mu, 0.0, 0.5, &f3).unwrap();
        let expected = poisson_reference(&f3);
        assert!((three.value - expected).abs() < 3.0 * three.std_error, "{three:?} vs {expected}");
    }

    #[test]
    fn window_and_bulk_checks() {
        let mu = GridMeasure::uniform(Grid::symmetric(1.0, 200).unwrap());
        let samples = iid_uniform(50, 20, 1);
        let f = TestFunction::one_point();
        assert!(matches!(
            averaged_correlation(&samples, &mu, 0.9, 0.5, &f),
            Err(Error::OutsideBulk(_))
        ));
        assert!(averaged_correlation(&samples, &mu, 0.0, 0.7, &f).is_err());
        let few = iid_uniform(4, 20, 1);
        // s = 4^(-1/2) = 0.5 stays inside [-1, 1] only around the center
        assert!(averaged_correlation(&few, &mu, 0.55, 0.5, &f).is_err());
    }

    #[test]
    fn sine_reference_is_below_poisson() {
        let f = TestFunction::pair(1.0);
        assert!(sine_kernel_reference(&f).unwrap() < poisson_reference(&f));
        assert!((sine_kernel_pair(1e-9) - sine_kernel_pair(1e-6)).abs() < 1e-10);
    }
}
