//! Minimizes `I(w) = <V, w> + (beta / 2) <w, K w>` over the probability simplex.
//!
//! Each iteration takes a projected-gradient step with Armijo backtracking and
//! then an exact Newton step on the current face (the set of cells carrying
//! mass). Both steps are only accepted when they do not increase the
//! objective, so the objective is monotone over iterations. Correctness is
//! certified afterwards by the Euler-Lagrange residual.

use nalgebra::{DMatrix, DVector};

use super::kernel::LogKernel;
use crate::error::{invalid, Error, Result};
use crate::model::measure::{Grid, GridMeasure, DEFAULT_SUPPORT_THRESHOLD};

/// Fraction of cells on each side that must stay (essentially) empty.
pub const EDGE_FRACTION: f64 = 0.05;
/// Largest mass allowed in the edge cells.
pub const EDGE_MASS_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EquilibriumProblem {
    grid: Grid,
    potential: Vec<f64>,
    beta: f64,
    kernel: LogKernel,
}

impl EquilibriumProblem {
    /// `potential` holds `V` at the cell midpoints.
    pub fn new(grid: Grid, potential: Vec<f64>, beta: f64) -> Result<Self> {
        if potential.len() != grid.n_cells {
            return Err(invalid("potential length does not match the grid"));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(invalid("potential must be finite on the grid"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid("beta must be positive"));
        }
        Ok(Self {
            grid,
            potential,
            beta,
            kernel: LogKernel::new(grid),
        })
    }

    pub fn from_fn(grid: Grid, potential: impl Fn(f64) -> f64, beta: f64) -> Result<Self> {
        let values = grid.midpoints().into_iter().map(potential).collect();
        Self::new(grid, values, beta)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn kernel(&self) -> &LogKernel {
        &self.kernel
    }

    /// Effective potential `F = V + beta K w`, the gradient of `I`.
    pub fn effective_potential(&self, w: &[f64]) -> Vec<f64> {
        self.kernel
            .apply(w)
            .iter()
            .zip(&self.potential)
            .map(|(kw, v)| v + self.beta * kw)
            .collect()
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        let f = self.effective_potential(w);
        objective_from(&self.potential, &f, w)
    }
}

/// `I(w) = (<V, w> + <F, w>) / 2` since `F = V + beta K w`.
fn objective_from(v: &[f64], f: &[f64], w: &[f64]) -> f64 {
    0.5 * w
        .iter()
        .zip(v.iter().zip(f))
        .map(|(wi, (vi, fi))| wi * (vi + fi))
        .sum::<f64>()
}

#[derive(Clone, Debug)]
pub struct EquilibriumSolution {
    pub mu: GridMeasure,
    pub effective_potential: Vec<f64>,
    pub lagrange_constant: f64,
    pub el_residual: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Objective after every accepted step.
    pub objective_history: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub armijo: f64,
    pub check_window: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            armijo: 1e-4,
            check_window: true,
        }
    }
}

/// Euler-Lagrange deviation of `w` given its effective potential `f`.
///
/// The constant is the midrange of `f` on the support; the residual is the
/// half-range there plus the worst undershoot of `f` below the constant off the
/// support.
pub fn residual_from_effective(w: &[f64], f: &[f64]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (wi, fi) in w.iter().zip(f) {
        if *wi > DEFAULT_SUPPORT_THRESHOLD {
            lo = lo.min(*fi);
            hi = hi.max(*fi);
        }
    }
    if lo > hi {
        return (f64::INFINITY, f64::NAN);
    }
    let lambda = 0.5 * (lo + hi);
    let off = w
        .iter()
        .zip(f)
        .filter(|(wi, _)| **wi <= DEFAULT_SUPPORT_THRESHOLD)
        .map(|(_, fi)| (lambda - fi).max(0.0))
        .fold(0.0, f64::max);
    (0.5 * (hi - lo) + off, lambda)
}

/// `(residual, lagrange_constant)` for a measure against a potential on its grid.
pub fn euler_lagrange_residual(mu: &GridMeasure, potential: &[f64], beta: f64) -> Result<(f64, f64)> {
    let problem = EquilibriumProblem::new(mu.grid(), potential.to_vec(), beta)?;
    let f = problem.effective_potential(mu.weights());
    Ok(residual_from_effective(mu.weights(), &f))
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(u: &[f64]) -> Vec<f64> {
    let mut sorted = u.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, v) in sorted.iter().enumerate() {
        cumulative += v;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    let mut w: Vec<f64> = u.iter().map(|v| (v - theta).max(0.0)).collect();
    renormalize(&mut w);
    w
}

fn renormalize(w: &mut [f64]) {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
}

pub fn solve_equilibrium(problem: &EquilibriumProblem, tol: f64) -> Result<EquilibriumSolution> {
    solve_equilibrium_with(problem, tol, None, &SolverOptions::default())
}

/// Solver entry point with an optional warm start.
pub fn solve_equilibrium_with(
    problem: &EquilibriumProblem,
    tol: f64,
    initial: Option<&[f64]>,
    options: &SolverOptions,
) -> Result<EquilibriumSolution> {
    let n = problem.grid.n_cells;
    if n < 64 {
        return Err(invalid("equilibrium solves need at least 64 cells"));
    }
    let mut w = match initial {
        Some(w0) if w0.len() == n => project_simplex(w0),
        Some(_) => return Err(invalid("warm start has the wrong length")),
        None => vec![1.0 / n as f64; n],
    };
    let v = problem.potential.as_slice();
    let mut f = problem.effective_potential(&w);
    let mut obj = objective_from(v, &f, &w);
    let mut history = vec![obj];
    let mut step = 1.0 / (problem.beta * problem.kernel.entry(0, 0).abs().max(1.0));
    let (mut residual, mut lambda) = residual_from_effective(&w, &f);
    let mut iterations = 0;

    while residual > tol {
        if iterations >= options.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                residual,
            });
        }
        iterations += 1;

        // Projected gradient with Armijo backtracking.
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> =
                project_simplex(&w.iter().zip(&f).map(|(wi, fi)| wi - step * fi).collect::<Vec<_>>());
            let decrease: f64 = f.iter().zip(trial.iter().zip(&w)).map(|(g, (a, b))| g * (a - b)).sum();
            let f_trial = problem.effective_potential(&trial);
            let obj_trial = objective_from(v, &f_trial, &trial);
            if obj_trial <= obj + options.armijo * decrease {
                w = trial;
                f = f_trial;
                obj = obj_trial;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if accepted {
            history.push(obj);
        }

        // Exact minimization on the current face.
        if let Some((trial, f_trial, obj_trial)) = face_step(problem, &w, obj) {
            w = trial;
            f = f_trial;
            obj = obj_trial;
            history.push(obj);
        } else if !accepted {
            let (residual, _) = residual_from_effective(&w, &f);
            return Err(Error::NonConvergence {
                iterations,
                residual,
            });
        }
        (residual, lambda) = residual_from_effective(&w, &f);
    }

    let mu = GridMeasure::new(problem.grid, w)?;
    if options.check_window {
        let edge = mu.edge_mass(EDGE_FRACTION);
        if edge >= EDGE_MASS_LIMIT {
            return Err(Error::WindowTooSmall {
                left: problem.grid.left,
                right: problem.grid.right,
                edge_mass: edge,
            });
        }
    }
    Ok(EquilibriumSolution {
        mu,
        effective_potential: f,
        lagrange_constant: lambda,
        el_residual: residual,
        objective: obj,
        iterations,
        objective_history: history,
    })
}

/// Newton step restricted to `{c : w_c > 0}` with the mass constraint.
///
/// Tries the full step projected back onto the simplex first and falls back to
/// the longest feasible step along the Newton direction. Returns `None` when
/// neither lowers the objective.
fn face_step(problem: &EquilibriumProblem, w: &[f64], obj: f64) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let face: Vec<usize> = (0..w.len()).filter(|&c| w[c] > 0.0).collect();
    let m = face.len();
    if m < 2 {
        return None;
    }
    let beta = problem.beta;
    let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut rhs = DVector::<f64>::zeros(m + 1);
    for (i, &c) in face.iter().enumerate() {
        for (j, &d) in face.iter().enumerate() {
            a[(i, j)] = beta * problem.kernel.entry(c, d);
        }
        a[(i, m)] = 1.0;
        a[(m, i)] = 1.0;
        rhs[i] = -problem.potential[c];
    }
    rhs[m] = 1.0;
    let sol = a.lu().solve(&rhs)?;
    if sol.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let v = problem.potential.as_slice();

    let mut target = vec![0.0; w.len()];
    for (i, &c) in face.iter().enumerate() {
        target[c] = sol[i];
    }
    if target.iter().all(|x| *x >= 0.0) {
        let f = problem.effective_potential(&target);
        let o = objective_from(v, &f, &target);
        if o <= obj {
            return Some((target, f, o));
        }
        return None;
    }

    let projected = project_simplex(&target);
    let f = problem.effective_potential(&projected);
    let o = objective_from(v, &f, &projected);
    if o <= obj {
        return Some((projected, f, o));
    }

    // Longest step towards the face minimizer that stays feasible.
    let mut alpha = 1.0f64;
    for &c in &face {
        let d = target[c] - w[c];
        if d < 0.0 {
            alpha = alpha.min(w[c] / -d);
        }
    }
    if alpha <= 0.0 {
        return None;
    }
    let mut trial: Vec<f64> = w
        .iter()
        .zip(&target)
        .map(|(wi, ti)| (wi + alpha * (ti - wi)).max(0.0))
        .collect();
    for &c in &face {
        if target[c] < w[c] && (w[c] / (w[c] - target[c]) - alpha).abs() <= 1e-15 * alpha {
            trial[c] = 0.0;
        }
    }
    renormalize(&mut trial);
    let f = problem.effective_potential(&trial);
    let o = objective_from(v, &f, &trial);
    (o <= obj).then_some((trial, f, o))
}
