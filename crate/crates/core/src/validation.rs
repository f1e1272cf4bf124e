//! The acceptance suite: ten numbered criteria, each a self-contained
//! computation with a pass/fail verdict and a one-line summary.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::equilibrium::{
    default_grid, self_consistent_solve, solve_equilibrium_with, solve_field, EffectiveField, EquilibriumProblem,
    SelfConsistentOptions, SelfConsistentSolution, SolverOptions,
};
use crate::error::Result;
use crate::harness::config::StatisticsConfig;
use crate::model::ensemble::{Configuration, EnsembleSpec};
use crate::model::field::ExternalField;
use crate::model::hamiltonian::{grad_hamiltonian, hamiltonian};
use crate::model::hoeffding::{convolve, double_convolve, grad_u, u_direct, u_fourier};
use crate::model::interaction::{GaussianTerm, InteractionPotential};
use crate::model::measure::{semicircle_cdf, Grid, GridMeasure, DEFAULT_SUPPORT_THRESHOLD};
use crate::numerics::mean_and_variance;
use crate::samplers::{
    metropolis_chain, metropolis_chain_for, quadrature_oracle, tridiagonal_draws, ChainSchedule, NodeGrid, Target,
};
use crate::statistics::{
    averaged_correlation, bulk_gaps, concentration_check, empirical_density, estimate_dirichlet,
    exp_moment_diagnostic, ks_against, ks_two_sample, sine_kernel_reference, GradientMode, SmoothFunction,
};

/// Sample sizes: `Full` uses the stated sizes, `Quick` is a smoke run whose
/// verdicts are not meaningful at the stated tolerances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Quick,
    Full,
}

impl Scale {
    fn pick(self, quick: usize, full: usize) -> usize {
        match self {
            Scale::Quick => quick,
            Scale::Full => full,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Names of the sub-checks that failed.
    pub failed: Vec<String>,
    pub detail: String,
    pub elapsed: f64,
    pub budget: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} [{:.1} s of {:.0} s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed,
            self.budget
        )
    }
}

/// Sub-check bookkeeping for one criterion.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
}

impl Checks {
    /// Records a sub-check and returns the word printed next to it.
    fn mark(&mut self, name: &str, ok: bool) -> &'static str {
        if ok {
            "ok"
        } else {
            self.failed.push(name.to_string());
            "FAILED"
        }
    }
}

type Check = fn(Scale) -> Result<(Checks, String)>;

const CRITERIA: [(usize, &str, f64, Check); 10] = [
    (1, "decomposition identity", 5.0, decomposition_identity),
    (2, "Fourier representation", 10.0, fourier_representation),
    (3, "Gaussian equilibrium", 60.0, gaussian_equilibrium),
    (4, "self-consistent fixed point", 120.0, self_consistent_fixed_point),
    (5, "sampler correctness", 180.0, sampler_correctness),
    (6, "one-point density convergence", 300.0, density_convergence),
    (7, "local statistics comparison", 600.0, local_comparison),
    (8, "Dirichlet form and exponential moment", 300.0, dirichlet_and_moment),
    (9, "linear statistic concentration", 300.0, concentration),
    (10, "gradient checks", 5.0, gradient_checks),
];

/// Runs one criterion; errors count as failures. The runtime budget is part
/// of the verdict.
pub fn run_criterion(id: usize, scale: Scale) -> Option<CriterionReport> {
    let &(id, name, budget, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let outcome = check(scale);
    let elapsed = start.elapsed().as_secs_f64();
    let (mut checks, mut detail) = outcome.unwrap_or_else(|e| {
        (Checks { failed: vec!["error".into()] }, format!("error: {e}"))
    });
    if elapsed > budget {
        checks.failed.push("runtime".into());
        detail.push_str("; over the runtime budget");
    }
    Some(CriterionReport {
        id,
        name,
        passed: checks.failed.is_empty(),
        failed: checks.failed,
        detail,
        elapsed,
        budget,
    })
}

/// Runs the selected criteria (all when `only` is empty) in order.
pub fn run_criteria(scale: Scale, only: &[usize]) -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.0))
        .filter_map(|c| run_criterion(c.0, scale))
        .collect()
}

fn random_interaction(rng: &mut ChaCha8Rng) -> InteractionPotential {
    let terms = (0..rng.random_range(1..=3))
        .map(|_| GaussianTerm::new(rng.random_range(-1.0..1.0), rng.random_range(0.3..3.0)))
        .collect();
    InteractionPotential::from_terms(terms)
}

fn random_measure(rng: &mut ChaCha8Rng) -> GridMeasure {
    let cells = rng.random_range(16..=256);
    let grid = Grid::symmetric(rng.random_range(1.0..3.0), cells).expect("valid grid");
    let masses = (0..cells).map(|_| rng.random::<f64>()).collect();
    GridMeasure::from_masses(grid, masses).expect("positive masses")
}

fn random_positions(rng: &mut ChaCha8Rng, n: usize, spread: f64, min_gap: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-spread..spread)).collect();
        let mut s = x.clone();
        s.sort_by(f64::total_cmp);
        if s.windows(2).all(|w| w[1] - w[0] > min_gap) {
            return x;
        }
    }
}

fn decomposition_identity(_: Scale) -> Result<(Checks, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=32);
        let h = random_interaction(&mut rng);
        let mu = random_measure(&mut rng);
        let x = random_positions(&mut rng, n, 3.0, 0.0);
        let nf = n as f64;
        let mut lhs = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                lhs += h.value(x[i] - x[j]);
            }
        }
        let hmu: f64 = convolve(&h, &mu, &x)?.iter().sum();
        let u = u_direct(&Configuration::new(x), &h, &mu)?;
        let rhs = nf * hmu - 0.5 * nf * nf * double_convolve(&h, &mu)? - 0.5 * nf * h.value(0.0) - u;
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    let mut c = Checks::default();
    let v = c.mark("identity", worst <= 1e-10);
    Ok((c, format!("worst relative error {worst:.2e} over 100 instances (limit 1e-10, {v})")))
}

fn fourier_representation(_: Scale) -> Result<(Checks, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=16);
        let h = random_interaction(&mut rng);
        let mu = random_measure(&mut rng);
        let x = Configuration::new(random_positions(&mut rng, n, 3.0, 0.0));
        let direct = u_direct(&x, &h, &mu)?;
        let fourier = u_fourier(&x, &h, &mu, &Default::default())?;
        worst = worst.max((direct - fourier.value).abs());
    }
    let mut c = Checks::default();
    let v = c.mark("fourier", worst <= 1e-6);
    Ok((c, format!("worst |U_fourier - U_direct| {worst:.2e} over 100 instances (limit 1e-6, {v})")))
}

/// Support endpoints, Euler-Lagrange residual and L1 distance to the
/// semicircle of radius `sqrt(beta)`.
fn check_semicircle(c: &mut Checks, mu: &GridMeasure, el: f64, beta: f64) -> Result<String> {
    let r = beta.sqrt();
    let (lo, hi) = mu.support(DEFAULT_SUPPORT_THRESHOLD).unwrap_or((f64::NAN, f64::NAN));
    let cell = mu.cell_width();
    let exact = GridMeasure::from_cdf(mu.grid(), semicircle_cdf(r))?;
    let l1 = mu.l1_distance(&exact);
    let support = c.mark(&format!("support beta={beta}"), (lo + r).abs() <= cell && (hi - r).abs() <= cell);
    let el_ok = c.mark(&format!("residual beta={beta}"), el <= 1e-6);
    let l1_ok = c.mark(&format!("semicircle beta={beta}"), l1 <= 1e-2);
    Ok(format!(
        "beta={beta}: support [{lo:.4}, {hi:.4}] vs +-{r:.4} (cell {cell:.4}, {support}), EL {el:.1e} ({el_ok}), L1 {l1:.1e} ({l1_ok})"
    ))
}

fn gaussian_equilibrium(_: Scale) -> Result<(Checks, String)> {
    let mut c = Checks::default();
    let mut parts = Vec::new();
    for beta in [1.0, 2.0, 4.0] {
        let s = solve_field(&ExternalField::gaussian(), beta, default_grid(beta), 1e-10)?;
        parts.push(check_semicircle(&mut c, &s.mu, s.el_residual, beta)?);
    }
    Ok((c, parts.join("; ")))
}

fn solve_modified(amplitude: f64, tol: f64) -> Result<SelfConsistentSolution> {
    self_consistent_solve(
        &ExternalField::gaussian(),
        &InteractionPotential::gaussian(amplitude, 1.0),
        2.0,
        default_grid(2.0),
        &SelfConsistentOptions { tol, ..Default::default() },
    )
}

fn self_consistent_fixed_point(_: Scale) -> Result<(Checks, String)> {
    let mut c = Checks::default();
    let sc = solve_modified(0.1, 1e-4)?;
    let fixed = c.mark("fixed point", sc.residual <= 1e-4);
    let options = SelfConsistentOptions::default();
    let zero = self_consistent_solve(
        &ExternalField::gaussian(),
        &InteractionPotential::zero(),
        2.0,
        default_grid(2.0),
        &options,
    )?;
    let plain = solve_equilibrium_with(
        &EquilibriumProblem::from_fn(default_grid(2.0), |t| t * t, 2.0)?,
        options.el_tol,
        None,
        &SolverOptions::default(),
    )?;
    let identical = c.mark("h=0 reduction", zero.mu == plain.mu && zero.iterations == 1);
    let semi = check_semicircle(&mut c, &zero.mu, zero.el_residual, 2.0)?;
    let detail = format!(
        "h=0.1e^(-t^2): L1 residual {:.1e} after {} iterations ({fixed}); h=0 identical to plain solve ({identical}), {semi}",
        sc.residual, sc.iterations,
    );
    Ok((c, detail))
}

fn run_chains(spec: &EnsembleSpec, seeds: std::ops::Range<u64>, schedule: &ChainSchedule) -> Result<Vec<Configuration>> {
    let runs = seeds
        .into_par_iter()
        .map(|s| metropolis_chain(spec, s, schedule))
        .collect::<Result<Vec<_>>>()?;
    Ok(runs.into_iter().flat_map(|r| r.samples).collect())
}

fn sampler_correctness(scale: Scale) -> Result<(Checks, String)> {
    let mut c = Checks::default();
    let spec = EnsembleSpec::new(2, 2.0, ExternalField::gaussian(), InteractionPotential::gaussian(0.5, 1.0))?;
    let count = scale.pick(10_000, 100_000);
    let run = metropolis_chain(&spec, 7, &ChainSchedule::new(count).thin(20))?;
    let oracle = quadrature_oracle(&spec, NodeGrid::new(-4.0, 4.0, 1601)?)?;
    let positions: Vec<f64> = run.samples.iter().flat_map(|c| c.positions.iter().copied()).collect();
    let total = oracle.total();
    let ks = ks_against(&positions, |x| oracle.cdf(x) / total);
    let ks_ok = c.mark("oracle KS", ks <= 0.02);

    let draws = tridiagonal_draws(200, 2.0, 11, 1000)?;
    let m2: Vec<f64> = draws
        .iter()
        .map(|c| c.positions.iter().map(|x| x * x).sum::<f64>() / 200.0)
        .collect();
    let (mean, var) = mean_and_variance(&m2);
    let se = (var / m2.len() as f64).sqrt();
    let target = 0.5;
    let moment_ok = c.mark("second moment", (mean - target).abs() <= 3.0 * se);
    let detail = format!(
        "N=2 one-point KS {ks:.4} over {count} samples (limit 0.02, {ks_ok}); tridiagonal N=200 second moment {mean:.5} +- {se:.5} vs {target} ({moment_ok})"
    );
    Ok((c, detail))
}

fn density_convergence(scale: Scale) -> Result<(Checks, String)> {
    let mut c = Checks::default();
    let sc = solve_modified(0.1, 1e-6)?;
    let spec = |n| EnsembleSpec::new(n, 2.0, ExternalField::gaussian(), InteractionPotential::gaussian(0.1, 1.0));
    let per_chain = scale.pick(50, 250);
    let mut parts = Vec::new();
    let mut distances = Vec::new();
    for (n, limit) in [(50, 0.08), (100, 0.05)] {
        let samples = run_chains(&spec(n)?, 0..4, &ChainSchedule::new(per_chain).thin(20 * n))?;
        let d = empirical_density(&samples, sc.mu.grid(), None)?.l1_distance(&sc.mu);
        let v = c.mark(&format!("L1 N={n}"), d <= limit);
        parts.push(format!("N={n}: L1 {d:.4} (limit {limit}, {v})"));
        distances.push(d);
    }
    let decreasing = c.mark("decreasing", distances[1] < distances[0]);
    Ok((c, format!("{}; decreasing in N ({decreasing})", parts.join(", "))))
}

/// Name of the sub-check that compares spacing laws across symmetry classes.
pub const NEGATIVE_CONTROL: &str = "negative control";

fn local_comparison(scale: Scale) -> Result<(Checks, String)> {
    let mut c = Checks::default();
    let n = 200;
    let sc = solve_modified(0.5, 1e-6)?;
    let spec = EnsembleSpec::new(n, 2.0, ExternalField::gaussian(), InteractionPotential::gaussian(0.5, 1.0))?;
    let per_chain = scale.pick(25, 125);
    let modified = run_chains(&spec, 100..108, &ChainSchedule::new(per_chain).thin(20 * n))?;
    let draws = modified.len();
    let gaussian = tridiagonal_draws(n, 2.0, 5, draws)?;
    let mu_g = solve_field(&ExternalField::gaussian(), 2.0, default_grid(2.0), 1e-10)?.mu;

    let st = StatisticsConfig::default();
    let mut parts = Vec::new();
    let mut pair_estimate = None;
    for k in [1, 2] {
        let f = st.test_function(k);
        let m = averaged_correlation(&modified, &sc.mu, 0.0, st.xi, &f)?;
        let g = averaged_correlation(&gaussian, &mu_g, 0.0, st.xi, &f)?;
        let combined = (m.std_error.powi(2) + g.std_error.powi(2)).sqrt();
        let z = (m.value - g.value) / combined;
        let v = c.mark(&format!("k={k} difference"), z.abs() <= 3.0);
        parts.push(format!(
            "k={k}: {:.4} +- {:.4} vs Gaussian {:.4} +- {:.4}, z {z:+.2} ({v})",
            m.value, m.std_error, g.value, g.std_error,
        ));
        if k == 2 {
            pair_estimate = Some((m, f));
        }
    }
    let (m, f) = pair_estimate.expect("k = 2 evaluated");
    let sine = sine_kernel_reference(&f)?;
    let v = c.mark("sine kernel", (m.value - sine).abs() <= 3.0 * m.std_error);
    parts.push(format!("sine-kernel value {sine:.4} ({v})"));

    let quartic = tridiagonal_draws(n, 4.0, 6, draws)?;
    let mu_4 = solve_field(&ExternalField::gaussian(), 4.0, default_grid(4.0), 1e-10)?.mu;
    let gaps = bulk_gaps(&modified, &sc.mu)?;
    let ks_same = ks_two_sample(&gaps, &bulk_gaps(&gaussian, &mu_g)?);
    let ks_control = ks_two_sample(&gaps, &bulk_gaps(&quartic, &mu_4)?);
    let v = c.mark(NEGATIVE_CONTROL, ks_control > 0.1);
    parts.push(format!(
        "spacing KS vs beta=2 {ks_same:.4}, negative control vs beta=4 {ks_control:.4} (needs > 0.1, {v})"
    ));
    Ok((c, format!("N={n}, {draws} samples; {}", parts.join("; "))))
}

fn dirichlet_and_moment(scale: Scale) -> Result<(Checks, String)> {
    let mut c = Checks::default();
    let sc = solve_modified(0.5, 1e-6)?;
    let h = InteractionPotential::gaussian(0.5, 1.0);
    let zero = InteractionPotential::zero();
    let field = EffectiveField::new(ExternalField::gaussian(), h.clone(), sc.mu.clone());
    let per_chain = scale.pick(100, 500);
    let mut dirichlet = Vec::new();
    let mut moments = Vec::new();
    let mut exact_one = true;
    for n in [25, 50, 100] {
        let schedule = ChainSchedule::new(per_chain).thin(10 * n);
        let runs = (0..4u64)
            .into_par_iter()
            .map(|s| metropolis_chain_for(Target::new(&field, 2.0, &zero), n, 300 + s, &schedule))
            .collect::<Result<Vec<_>>>()?;
        let samples: Vec<Configuration> = runs.into_iter().flat_map(|r| r.samples).collect();
        dirichlet.push((n, estimate_dirichlet(&samples, &h, &sc.mu, GradientMode::Analytic)?));
        moments.push((n, exp_moment_diagnostic(&samples, &h, &sc.mu, 1.0)?));
        exact_one &= exp_moment_diagnostic(&samples, &zero, &sc.mu, 1.0)?.estimate == 1.0;
    }
    let spread = |v: &[f64]| {
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    };
    let d_spread = spread(&dirichlet.iter().map(|d| d.1.value).collect::<Vec<_>>());
    let m_spread = spread(&moments.iter().map(|m| m.1.estimate).collect::<Vec<_>>());
    let d_ok = c.mark("Dirichlet trend", d_spread <= 2.0);
    let m_ok = c.mark(
        "exponential moment",
        m_spread <= 2.0 && moments.iter().all(|m| m.1.estimate.is_finite()),
    );
    let one = c.mark("h=0 moment", exact_one);
    let d_parts: Vec<String> = dirichlet
        .iter()
        .map(|(n, d)| format!("N={n} {:.4}+-{:.4}", d.value, d.std_error))
        .collect();
    let m_parts: Vec<String> = moments
        .iter()
        .map(|(n, m)| format!("N={n} {:.4}+-{:.4}", m.estimate, m.std_error))
        .collect();
    let detail = format!(
        "Dirichlet {} (max/min {d_spread:.2}, {d_ok}); E exp(U) {} (max/min {m_spread:.2}, {m_ok}); h=0 gives exactly 1 ({one})",
        d_parts.join(", "),
        m_parts.join(", "),
    );
    Ok((c, detail))
}

fn concentration(scale: Scale) -> Result<(Checks, String)> {
    let mut c = Checks::default();
    let mu = GridMeasure::from_cdf(Grid::symmetric(2.0, 1024)?, semicircle_cdf(2f64.sqrt()))?;
    let count = scale.pick(400, 2000);
    let sets = [25, 50, 100, 200]
        .into_par_iter()
        .map(|n| tridiagonal_draws(n, 2.0, 900 + n as u64, count))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(&[Configuration], &GridMeasure)> = sets.iter().map(|s| (s.as_slice(), &mu)).collect();
    let report = concentration_check(&SmoothFunction::Cos { frequency: 1.0 }, &pairs)?;
    let parts: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("N={} {:.4}+-{:.4}", r.n, r.variance, r.variance_std_error))
        .collect();
    let v = c.mark("bounded variance", report.bounded);
    let detail = format!(
        "Var sum cos(x_j): {} (max/min {:.2}, limit 2, {v})",
        parts.join(", "),
        report.spread
    );
    Ok((c, detail))
}

fn relative_deviation(exact: &[f64], approx: &[f64]) -> f64 {
    let scale = exact.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diff = exact.iter().zip(approx).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    diff / scale.max(f64::MIN_POSITIVE)
}

fn central_difference(x: &[f64], f: impl Fn(&[f64]) -> Result<f64>) -> Result<Vec<f64>> {
    (0..x.len())
        .map(|l| {
            let step = 1e-6 * x[l].abs().max(1.0);
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[l] += step;
            down[l] -= step;
            Ok((f(&up)? - f(&down)?) / (2.0 * step))
        })
        .collect()
}

fn gradient_checks(_: Scale) -> Result<(Checks, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let fields = [
        ExternalField::gaussian(),
        ExternalField::quadratic(0.7),
        ExternalField::gaussian_plus_bump(1.0, 0.3, 0.5),
    ];
    let (mut worst_h, mut worst_u): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let n = rng.random_range(2..=20);
        let h = random_interaction(&mut rng);
        let spec = EnsembleSpec {
            n,
            beta: rng.random_range(0.5..4.0),
            field: fields[i % fields.len()].clone(),
            interaction: h.clone(),
        };
        let x = random_positions(&mut rng, n, 2.5, 1e-2);
        let g = grad_hamiltonian(&Configuration::new(x.clone()), &spec)?;
        let fd = central_difference(&x, |y| hamiltonian(&Configuration::new(y.to_vec()), &spec))?;
        worst_h = worst_h.max(relative_deviation(&g, &fd));

        let mu = random_measure(&mut rng);
        let g = grad_u(&Configuration::new(x.clone()), &h, &mu)?;
        let fd = central_difference(&x, |y| u_direct(&Configuration::new(y.to_vec()), &h, &mu))?;
        worst_u = worst_u.max(relative_deviation(&g, &fd));
    }
    let mut c = Checks::default();
    let vh = c.mark("Hamiltonian gradient", worst_h <= 1e-5);
    let vu = c.mark("U gradient", worst_u <= 1e-5);
    Ok((
        c,
        format!("worst relative error: Hamiltonian {worst_h:.2e} ({vh}), U {worst_u:.2e} ({vu}) over 100 instances (limit 1e-5)"),
    ))
}
