use std::path::PathBuf;

use pyo3::exceptions::{PyFileNotFoundError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::betagas::equilibrium::{self, EffectiveField, SelfConsistentOptions};
use ::betagas::harness::{self, ExperimentConfig, SampleOptions};
use ::betagas::model::{self, Configuration, EnsembleSpec, ExternalField, GaussianTerm, GridMeasure, InteractionPotential};
use ::betagas::samplers::{self, ChainRun, ChainSchedule, Target};
use ::betagas::statistics::{self, GradientMode, TestFunction};
use ::betagas::validation::{self, Scale};
use ::betagas::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::Config(_) | Error::Incompatible(_) | Error::Coincidence(..) | Error::Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::MissingArtifact(_) => PyFileNotFoundError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn configs(samples: Vec<Vec<f64>>) -> Vec<Configuration> {
    samples.into_iter().map(Configuration::new).collect()
}

fn positions(samples: Vec<Configuration>) -> Vec<Vec<f64>> {
    samples.into_iter().map(|c| c.positions).collect()
}

/// One-body field Q.
#[pyclass(name = "Field", frozen, from_py_object)]
#[derive(Clone)]
struct PyField(ExternalField);

#[pymethods]
impl PyField {
    /// Q(t) = t^2.
    #[staticmethod]
    fn gaussian() -> Self {
        Self(ExternalField::gaussian())
    }

    #[staticmethod]
    fn quadratic(c: f64) -> Self {
        Self(ExternalField::quadratic(c))
    }

    /// Q(t) = sum_k c_k t^(2k + 2).
    #[staticmethod]
    fn even_polynomial(coefficients: Vec<f64>) -> Self {
        Self(ExternalField::even_polynomial(coefficients))
    }

    #[staticmethod]
    fn gaussian_plus_bump(c: f64, amplitude: f64, width: f64) -> Self {
        Self(ExternalField::gaussian_plus_bump(c, amplitude, width))
    }

    fn value(&self, t: f64) -> f64 {
        model::OneBody::value(&self.0, t)
    }

    fn derivative(&self, t: f64) -> f64 {
        model::OneBody::derivative(&self.0, t)
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.0.descriptor())
    }
}

/// Pair interaction h, a sum of Gaussians a exp(-w t^2).
#[pyclass(name = "Interaction", frozen, from_py_object)]
#[derive(Clone)]
struct PyInteraction(InteractionPotential);

#[pymethods]
impl PyInteraction {
    #[new]
    #[pyo3(signature = (terms=Vec::new()))]
    fn new(terms: Vec<(f64, f64)>) -> PyResult<Self> {
        let h = InteractionPotential::from_terms(terms.into_iter().map(|(a, w)| GaussianTerm::new(a, w)).collect());
        h.validate().map_err(err)?;
        Ok(Self(h))
    }

    #[staticmethod]
    fn gaussian(amplitude: f64, width: f64) -> PyResult<Self> {
        Self::new(vec![(amplitude, width)])
    }

    fn value(&self, t: f64) -> f64 {
        self.0.value(t)
    }

    fn fourier(&self, t: f64) -> f64 {
        self.0.fourier(t)
    }

    fn is_positive_semidefinite(&self) -> bool {
        self.0.is_positive_semidefinite()
    }

    fn __repr__(&self) -> String {
        format!("Interaction({})", self.0.descriptor())
    }
}

/// A probability measure with piecewise-constant density on a uniform grid.
#[pyclass(name = "Measure", frozen, from_py_object)]
#[derive(Clone)]
struct PyMeasure(GridMeasure);

#[pymethods]
impl PyMeasure {
    #[getter]
    fn midpoints(&self) -> Vec<f64> {
        self.0.midpoints()
    }

    #[getter]
    fn densities(&self) -> Vec<f64> {
        self.0.densities()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    fn density_at(&self, x: f64) -> f64 {
        self.0.density_at(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }

    #[pyo3(signature = (threshold=0.0))]
    fn support(&self, threshold: f64) -> Option<(f64, f64)> {
        self.0.support(threshold)
    }

    fn l1_distance(&self, other: &PyMeasure) -> f64 {
        self.0.l1_distance(&other.0)
    }

    fn __repr__(&self) -> String {
        format!("Measure([{:.4}, {:.4}], {} cells)", self.0.left(), self.0.right(), self.0.n_cells())
    }
}

/// The N-particle ensemble with field, inverse temperature and interaction.
#[pyclass(name = "Ensemble", frozen, from_py_object)]
#[derive(Clone)]
struct PyEnsemble(EnsembleSpec);

#[pymethods]
impl PyEnsemble {
    #[new]
    #[pyo3(signature = (n, beta, field=None, interaction=None))]
    fn new(n: usize, beta: f64, field: Option<PyField>, interaction: Option<PyInteraction>) -> PyResult<Self> {
        let field = field.map_or_else(ExternalField::gaussian, |f| f.0);
        let h = interaction.map_or_else(InteractionPotential::zero, |h| h.0);
        EnsembleSpec::new(n, beta, field, h).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }

    fn hamiltonian(&self, x: Vec<f64>) -> PyResult<f64> {
        model::hamiltonian(&Configuration::new(x), &self.0).map_err(err)
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        model::grad_hamiltonian(&Configuration::new(x), &self.0).map_err(err)
    }

    /// The fluctuation term U of a configuration around `mu`.
    fn fluctuation(&self, x: Vec<f64>, mu: &PyMeasure) -> PyResult<f64> {
        model::u_direct(&Configuration::new(x), &self.0.interaction, &mu.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Ensemble(n={}, beta={}, field={}, interaction={})",
            self.0.n,
            self.0.beta,
            self.0.field.descriptor(),
            self.0.interaction.descriptor()
        )
    }
}

/// Equilibrium measure of `field` at inverse temperature `beta`.
///
/// Returns `(measure, euler_lagrange_residual)`.
#[pyfunction]
#[pyo3(signature = (field, beta, tol=1e-10))]
fn solve_field(py: Python<'_>, field: PyField, beta: f64, tol: f64) -> PyResult<(PyMeasure, f64)> {
    let sol = py
        .detach(|| equilibrium::solve_field(&field.0, beta, equilibrium::default_grid(beta), tol))
        .map_err(err)?;
    Ok((PyMeasure(sol.mu), sol.el_residual))
}

/// Fixed point of mu = EqMeasure(Q + h * mu).
///
/// Returns `(measure, fixed_point_residual, iterations)`.
#[pyfunction]
#[pyo3(signature = (ensemble, tol=1e-4, damping=0.5))]
fn self_consistent(py: Python<'_>, ensemble: PyEnsemble, tol: f64, damping: f64) -> PyResult<(PyMeasure, f64, usize)> {
    let spec = ensemble.0;
    let options = SelfConsistentOptions { tol, damping, ..Default::default() };
    let sol = py
        .detach(|| {
            let grid = equilibrium::default_grid(spec.beta);
            equilibrium::self_consistent_solve(&spec.field, &spec.interaction, spec.beta, grid, &options)
        })
        .map_err(err)?;
    Ok((PyMeasure(sol.mu), sol.residual, sol.iterations))
}

fn schedule(n_samples: usize, burn_in: Option<usize>, thin: Option<usize>) -> ChainSchedule {
    let mut s = ChainSchedule::new(n_samples);
    if let Some(b) = burn_in {
        s = s.burn_in(b);
    }
    if let Some(t) = thin {
        s = s.thin(t);
    }
    s
}

fn chain_result(run: ChainRun) -> (Vec<Vec<f64>>, f64) {
    (positions(run.samples), run.acceptance_rate)
}

/// Random-walk Metropolis chain on the ensemble, or on the comparison
/// ensemble with field Q + h * mu when `effective` is given.
///
/// Returns `(samples, acceptance_rate)`; samples are sorted configurations.
#[pyfunction]
#[pyo3(signature = (ensemble, seed, n_samples, burn_in=None, thin=None, effective=None, mala=false))]
#[allow(clippy::too_many_arguments)]
fn sample_chain(
    py: Python<'_>,
    ensemble: PyEnsemble,
    seed: u64,
    n_samples: usize,
    burn_in: Option<usize>,
    thin: Option<usize>,
    effective: Option<PyMeasure>,
    mala: bool,
) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let spec = ensemble.0;
    let schedule = schedule(n_samples, burn_in, thin);
    let run = py.detach(|| match effective {
        None if mala => samplers::mala_chain(&spec, seed, &schedule),
        None => samplers::metropolis_chain(&spec, seed, &schedule),
        Some(mu) => {
            if mala && spec.beta < 1.0 {
                return Err(Error::Unsupported("Langevin moves need beta >= 1".into()));
            }
            let v = EffectiveField::new(spec.field.clone(), spec.interaction.clone(), mu.0);
            let none = InteractionPotential::zero();
            let target = Target::new(&v, spec.beta, &none);
            if mala {
                samplers::mala_chain_for(target, spec.n, seed, &schedule)
            } else {
                samplers::metropolis_chain_for(target, spec.n, seed, &schedule)
            }
        }
    });
    run.map(chain_result).map_err(err)
}

/// Exact draws of the Gaussian beta-ensemble (Q = t^2, h = 0).
#[pyfunction]
fn tridiagonal(py: Python<'_>, n: usize, beta: f64, seed: u64, count: usize) -> PyResult<Vec<Vec<f64>>> {
    py.detach(|| samplers::tridiagonal_draws(n, beta, seed, count))
        .map(positions)
        .map_err(err)
}

/// Rescaled k-point correlation statistic with batch-means error.
///
/// k = 1 is the one-point bump, k = 2 the pair test function at offset `r`.
/// Returns `(value, std_error)`.
#[pyfunction]
#[pyo3(signature = (samples, mu, k=2, center=0.0, xi=0.5, r=2.0))]
fn correlation(
    py: Python<'_>,
    samples: Vec<Vec<f64>>,
    mu: PyMeasure,
    k: usize,
    center: f64,
    xi: f64,
    r: f64,
) -> PyResult<(f64, f64)> {
    let f = match k {
        1 => TestFunction::one_point(),
        2 => TestFunction::pair(r),
        _ => return Err(PyValueError::new_err("k must be 1 or 2")),
    };
    let samples = configs(samples);
    let e = py
        .detach(|| statistics::averaged_correlation(&samples, &mu.0, center, xi, &f))
        .map_err(err)?;
    Ok((e.value, e.std_error))
}

/// Sine-kernel value of the same statistic (`beta = 2` bulk limit).
#[pyfunction]
#[pyo3(signature = (k=2, r=2.0))]
fn sine_kernel_reference(k: usize, r: f64) -> PyResult<f64> {
    let f = if k == 1 { TestFunction::one_point() } else { TestFunction::pair(r) };
    statistics::sine_kernel_reference(&f).map_err(err)
}

/// Unfolded nearest-neighbour gaps in the bulk, pooled over samples.
#[pyfunction]
fn bulk_gaps(samples: Vec<Vec<f64>>, mu: PyMeasure) -> PyResult<Vec<f64>> {
    statistics::bulk_gaps(&configs(samples), &mu.0).map_err(err)
}

#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> f64 {
    statistics::ks_two_sample(&a, &b)
}

/// Kernel density estimate of the one-point marginal on the grid of `mu`.
#[pyfunction]
#[pyo3(signature = (samples, mu, bandwidth=None))]
fn empirical_density(samples: Vec<Vec<f64>>, mu: PyMeasure, bandwidth: Option<f64>) -> PyResult<PyMeasure> {
    statistics::empirical_density(&configs(samples), mu.0.grid(), bandwidth)
        .map(PyMeasure)
        .map_err(err)
}

/// Self-normalized Dirichlet-form estimate from comparison-ensemble samples.
///
/// Returns `(value, std_error, effective_sample_size)`.
#[pyfunction]
fn dirichlet(py: Python<'_>, samples: Vec<Vec<f64>>, interaction: PyInteraction, mu: PyMeasure) -> PyResult<(f64, f64, f64)> {
    let samples = configs(samples);
    let e = py
        .detach(|| statistics::estimate_dirichlet(&samples, &interaction.0, &mu.0, GradientMode::Analytic))
        .map_err(err)?;
    Ok((e.value, e.std_error, e.effective_sample_size))
}

fn experiment(config: Option<PathBuf>, out: Option<PathBuf>) -> PyResult<(ExperimentConfig, PathBuf)> {
    let mut c = match config {
        Some(p) => ExperimentConfig::load(&p).map_err(err)?,
        None => ExperimentConfig::desk_scale(),
    };
    if let Some(o) = out {
        c.output_dir = Some(o);
    }
    let dir = c.output_dir.clone().unwrap_or_else(|| PathBuf::from("run"));
    Ok((c, dir))
}

/// Runs one pipeline stage (`eqsolve`, `sample`, `stats` or `compare`) like
/// the command-line tool and returns its report lines.
///
/// For `compare` the last line holds the verdict.
#[pyfunction]
#[pyo3(signature = (stage, config=None, out=None))]
fn run_stage(py: Python<'_>, stage: &str, config: Option<PathBuf>, out: Option<PathBuf>) -> PyResult<Vec<String>> {
    let (c, dir) = experiment(config, out)?;
    let stage = stage.to_owned();
    py.detach(move || match stage.as_str() {
        "eqsolve" => harness::cmd_eqsolve(&c, &dir).map(|v| v.iter().map(|s| s.line()).collect()),
        "sample" => harness::cmd_sample(&c, &dir, SampleOptions::default()).map(|v| v.iter().map(|s| s.line()).collect()),
        "stats" => harness::cmd_stats(&c, &dir).map(|v| v.iter().map(|r| r.csv()).collect()),
        "compare" => harness::cmd_compare(&c, &dir).map(|r| r.lines()),
        other => Err(Error::InvalidInput(format!("unknown stage {other:?}"))),
    })
    .map_err(err)
}

/// Runs acceptance criteria and returns `(id, passed, line)` per criterion.
#[pyfunction]
#[pyo3(signature = (only=Vec::new(), quick=true))]
fn validate(py: Python<'_>, only: Vec<usize>, quick: bool) -> Vec<(usize, bool, String)> {
    let scale = if quick { Scale::Quick } else { Scale::Full };
    py.detach(|| validation::run_criteria(scale, &only))
        .into_iter()
        .map(|r| (r.id, r.passed, r.line()))
        .collect()
}

#[pymodule]
fn betagas(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyInteraction>()?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_function(wrap_pyfunction!(solve_field, m)?)?;
    m.add_function(wrap_pyfunction!(self_consistent, m)?)?;
    m.add_function(wrap_pyfunction!(sample_chain, m)?)?;
    m.add_function(wrap_pyfunction!(tridiagonal, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(sine_kernel_reference, m)?)?;
    m.add_function(wrap_pyfunction!(bulk_gaps, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_density, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet, m)?)?;
    m.add_function(wrap_pyfunction!(run_stage, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
