//! The `eqsolve`, `sample`, `stats` and `compare` commands. Each writes its
//! artifacts into the run directory together with a manifest.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{Estimator, ExperimentConfig, SampleTarget, SamplerKind, SolveMode};
use super::manifest::{short_hash, Manifest};
use crate::equilibrium::{
    io::write_solution_csv, self_consistent_solve, solve_equilibrium_with, EffectiveField, EquilibriumProblem,
    EquilibriumSolution, SolverOptions,
};
use crate::error::{Error, Result};
use crate::model::ensemble::{Configuration, EnsembleSpec};
use crate::model::field::OneBody;
use crate::model::interaction::InteractionPotential;
use crate::model::measure::{GridMeasure, DEFAULT_SUPPORT_THRESHOLD};
use crate::numerics::batch_means;
use crate::samplers::{
    mala_chain_for, read_samples, tridiagonal_draws, write_samples, ChainSchedule, ChainState, MetropolisChain,
    SampleHeader, SampleSet, Target,
};
use crate::statistics::plot::{histogram_plot, line_plot, Series};
use crate::statistics::{
    averaged_correlation, bulk_gaps, concentration_check, empirical_density, estimate_dirichlet,
    exp_moment_diagnostic, ks_two_sample, poisson_spacing_cdf, spacing_histogram, CorrelationEstimate,
    GradientMode,
};

pub const MEASURE_FILE: &str = "measure.json";
pub const REFERENCE_MEASURE_FILE: &str = "reference_measure.json";
pub const EQUILIBRIUM_CSV: &str = "equilibrium.csv";
pub const REFERENCE_EQUILIBRIUM_CSV: &str = "reference_equilibrium.csv";
pub const SAMPLE_DIR: &str = "samples";
pub const STATS_CSV: &str = "stats.csv";
pub const STATS_HEADER: &str = "statistic,target,n,spec_hash,value,std_error,n_samples";
pub const COMPARE_CSV: &str = "compare.csv";
pub const COMPARE_HEADER: &str = "check,modified,reference,difference,combined_error,threshold,passed";

fn missing(what: &str, command: &str) -> Error {
    Error::MissingArtifact(format!("{what} not found; run `betagas {command}` with the same --config and --out first"))
}

/// Writes `mu` with its effective potential under `potential`.
fn write_measure(dir: &Path, csv: &str, json_name: &str, mu: &GridMeasure, potential: Vec<f64>, beta: f64) -> Result<()> {
    let problem = EquilibriumProblem::new(mu.grid(), potential, beta)?;
    let solution = EquilibriumSolution {
        effective_potential: problem.effective_potential(mu.weights()),
        objective: problem.objective(mu.weights()),
        mu: mu.clone(),
        lagrange_constant: 0.0,
        el_residual: 0.0,
        iterations: 0,
        objective_history: Vec::new(),
    };
    let mut out = BufWriter::new(fs::File::create(dir.join(csv))?);
    write_solution_csv(&solution, &mut out)?;
    fs::write(dir.join(json_name), serde_json::to_string(mu)? + "\n")?;
    Ok(())
}

pub fn load_measure(dir: &Path, name: &str) -> Result<GridMeasure> {
    let text = fs::read_to_string(dir.join(name)).map_err(|_| missing(name, "eqsolve"))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveSummary {
    pub label: String,
    pub mode: String,
    pub support: (f64, f64),
    pub cell_width: f64,
    pub el_residual: f64,
    pub fixed_point_residual: f64,
    pub iterations: usize,
}

impl SolveSummary {
    pub fn line(&self) -> String {
        format!(
            "{}: {} solve, support [{:.6}, {:.6}] (cell {:.2e}), Euler-Lagrange residual {:.3e}, fixed-point residual {:.3e}, {} iterations",
            self.label,
            self.mode,
            self.support.0,
            self.support.1,
            self.cell_width,
            self.el_residual,
            self.fixed_point_residual,
            self.iterations
        )
    }
}

pub fn cmd_eqsolve(config: &ExperimentConfig, dir: &Path) -> Result<Vec<SolveSummary>> {
    fs::create_dir_all(dir)?;
    let spec = &config.ensemble;
    let grid = config.grid.grid(spec.beta)?;
    let mut summaries = Vec::new();
    let mut manifest_files = Vec::new();

    let (mu, potential, el, fixed, iterations, mode) = match config.solver.mode {
        SolveMode::SelfConsistent => {
            let sc = self_consistent_solve(
                &spec.field,
                &spec.interaction,
                spec.beta,
                grid,
                &config.solver.self_consistent_options(),
            )?;
            (sc.mu, sc.potential, sc.el_residual, sc.residual, sc.iterations, "self-consistent")
        }
        SolveMode::Plain => {
            let potential: Vec<f64> = grid.midpoints().iter().map(|&t| spec.field.value(t)).collect();
            let problem = EquilibriumProblem::new(grid, potential.clone(), spec.beta)?;
            let s = solve_equilibrium_with(&problem, config.solver.tol, None, &SolverOptions::default())?;
            (s.mu, potential, s.el_residual, 0.0, s.iterations, "plain")
        }
    };
    write_measure(dir, EQUILIBRIUM_CSV, MEASURE_FILE, &mu, potential, spec.beta)?;
    manifest_files.extend([EQUILIBRIUM_CSV, MEASURE_FILE]);
    summaries.push(SolveSummary {
        label: "ensemble".into(),
        mode: mode.into(),
        support: mu.support(DEFAULT_SUPPORT_THRESHOLD).unwrap_or((f64::NAN, f64::NAN)),
        cell_width: grid.cell_width(),
        el_residual: el,
        fixed_point_residual: fixed,
        iterations,
    });

    if let Some(reference) = config.reference_spec() {
        let rgrid = config.grid.grid(reference.beta)?;
        let potential: Vec<f64> = rgrid.midpoints().iter().map(|t| t * t).collect();
        let problem = EquilibriumProblem::new(rgrid, potential.clone(), reference.beta)?;
        let s = solve_equilibrium_with(&problem, config.solver.tol, None, &SolverOptions::default())?;
        write_measure(dir, REFERENCE_EQUILIBRIUM_CSV, REFERENCE_MEASURE_FILE, &s.mu, potential, reference.beta)?;
        manifest_files.extend([REFERENCE_EQUILIBRIUM_CSV, REFERENCE_MEASURE_FILE]);
        summaries.push(SolveSummary {
            label: "reference".into(),
            mode: "plain".into(),
            support: s.mu.support(DEFAULT_SUPPORT_THRESHOLD).unwrap_or((f64::NAN, f64::NAN)),
            cell_width: rgrid.cell_width(),
            el_residual: s.el_residual,
            fixed_point_residual: 0.0,
            iterations: s.iterations,
        });
    }

    let mut manifest = Manifest::new(
        "eqsolve",
        config,
        json!({
            "grid": grid,
            "el_tolerance": config.solver.tol,
            "fixed_point_tolerance": config.solver.fixed_point_tol,
            "solves": summaries,
        }),
    )?;
    for f in manifest_files {
        manifest.add_artifact(dir, f)?;
    }
    manifest.write(dir)?;
    Ok(summaries)
}

/// Options that only affect how a sampling run is executed, never its output.
#[derive(Clone, Copy, Debug, Default)]
pub struct SampleOptions {
    /// Continue chains from persisted states.
    pub resume: bool,
    /// Stop every chain after this many new samples (simulated interruption).
    pub stop_after: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleSummary {
    pub target: SampleTarget,
    pub seed: u64,
    pub file: PathBuf,
    pub sampler: String,
    pub n: usize,
    pub beta: f64,
    pub samples: usize,
    pub complete: bool,
    pub acceptance_rate: Option<f64>,
    /// Mean over samples of `(1/N) sum x_j^2`, with its standard error.
    pub second_moment: f64,
    pub second_moment_se: f64,
    /// False when `alpha_Q > sup(-h'')` fails or `h` is not positive
    /// semi-definite; the comparison is not certified there.
    pub certified: bool,
}

impl SampleSummary {
    pub fn line(&self) -> String {
        let regime = if self.certified { "" } else { " [outside certified regime]" };
        let status = if self.complete { "" } else { " (interrupted; rerun with --resume)" };
        format!(
            "{} seed {}: {} samples of N={} beta={} via {}, second moment {:.5} +- {:.5}{}{regime}{status}",
            self.target.name(),
            self.seed,
            self.samples,
            self.n,
            self.beta,
            self.sampler,
            self.second_moment,
            self.second_moment_se,
            self.acceptance_rate.map_or(String::new(), |a| format!(", acceptance {a:.3}")),
        )
    }
}

struct Job {
    target: SampleTarget,
    seed: u64,
    spec: EnsembleSpec,
    sampler: SamplerKind,
    schedule: ChainSchedule,
}

pub fn sample_file(target: SampleTarget, seed: u64) -> PathBuf {
    Path::new(SAMPLE_DIR).join(format!("{}_seed{seed}.csv", target.name()))
}

fn state_file(target: SampleTarget, seed: u64) -> PathBuf {
    Path::new(SAMPLE_DIR).join(format!("{}_seed{seed}.state.json", target.name()))
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    state: ChainState,
    samples: Vec<Vec<f64>>,
}

fn jobs(config: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for target in config.sample_targets() {
        match target {
            SampleTarget::Modified | SampleTarget::Effective => {
                let mut spec = config.ensemble.clone();
                if target == SampleTarget::Effective {
                    spec.interaction = InteractionPotential::zero();
                }
                for &seed in &config.chain.seeds {
                    out.push(Job {
                        target,
                        seed,
                        spec: spec.clone(),
                        sampler: config.chain.sampler,
                        schedule: config.chain.schedule(),
                    });
                }
            }
            SampleTarget::Reference => {
                let r = config.reference.as_ref().expect("validated");
                let spec = config.reference_spec().expect("validated");
                let schedule = ChainSchedule {
                    n_samples: config.reference_samples_per_seed(),
                    ..config.chain.schedule()
                };
                for &seed in &r.seeds {
                    out.push(Job {
                        target,
                        seed,
                        spec: spec.clone(),
                        sampler: r.sampler,
                        schedule: schedule.clone(),
                    });
                }
            }
        }
    }
    out
}

fn write_json_atomic(path: &Path, value: &impl Serialize) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_vec(value)?)?;
    fs::rename(tmp, path)?;
    Ok(())
}

fn run_job(job: &Job, config: &ExperimentConfig, dir: &Path, effective: Option<&EffectiveField>, options: SampleOptions) -> Result<SampleSummary> {
    let n = job.spec.n;
    let zero = InteractionPotential::zero();
    let (target, field_descriptor) = match job.target {
        SampleTarget::Effective => (
            Target::new(effective.expect("loaded for effective jobs"), job.spec.beta, &zero),
            format!("{} + h*mu [{}]", job.spec.field.descriptor(), config.ensemble.interaction.descriptor()),
        ),
        _ => (
            Target::new(&job.spec.field, job.spec.beta, &job.spec.interaction),
            job.spec.field.descriptor(),
        ),
    };
    let mut step_size = None;
    let mut acceptance = None;
    let mut complete = true;
    let samples: Vec<Configuration> = match job.sampler {
        SamplerKind::Tridiagonal => tridiagonal_draws(n, job.spec.beta, job.seed, job.schedule.n_samples)?,
        SamplerKind::Mala => {
            let run = mala_chain_for(target, n, job.seed, &job.schedule)?;
            step_size = Some(run.step_size);
            acceptance = Some(run.acceptance_rate);
            run.samples
        }
        SamplerKind::Metropolis => {
            let state_path = dir.join(state_file(job.target, job.seed));
            let (mut chain, mut kept) = match (options.resume, state_path.exists()) {
                (true, true) => {
                    let cp: Checkpoint = serde_json::from_slice(&fs::read(&state_path)?)?;
                    info!("resuming {} from {} samples", state_path.display(), cp.samples.len());
                    (MetropolisChain::from_state(target, job.schedule.clone(), cp.state), cp.samples)
                }
                _ => (MetropolisChain::new(target, n, job.seed, job.schedule.clone())?, Vec::new()),
            };
            let mut fresh = 0;
            while kept.len() < job.schedule.n_samples {
                if options.stop_after == Some(fresh) {
                    complete = false;
                    break;
                }
                kept.push(chain.next_sample()?.positions);
                fresh += 1;
                if kept.len() % config.chain.checkpoint_every == 0 && kept.len() < job.schedule.n_samples {
                    write_json_atomic(&state_path, &Checkpoint { state: chain.state().clone(), samples: kept.clone() })?;
                }
            }
            if !complete {
                write_json_atomic(&state_path, &Checkpoint { state: chain.state().clone(), samples: kept.clone() })?;
            } else if state_path.exists() {
                fs::remove_file(&state_path)?;
            }
            let run = chain.finish(Vec::new());
            step_size = Some(run.step_size);
            acceptance = Some(run.acceptance_rate);
            kept.into_iter().map(Configuration::new).collect()
        }
    };
    let m2: Vec<f64> = samples
        .iter()
        .map(|c| c.positions.iter().map(|x| x * x).sum::<f64>() / n as f64)
        .collect();
    let (second_moment, second_moment_se) = batch_means(&m2, 20);
    let file = sample_file(job.target, job.seed);
    if complete {
        let header = SampleHeader {
            n,
            beta: job.spec.beta,
            field: field_descriptor,
            interaction: job.spec.interaction.descriptor(),
            sampler: job.sampler.name().into(),
            seed: job.seed,
            schedule: (job.sampler != SamplerKind::Tridiagonal).then(|| job.schedule.clone()),
            step_size,
            acceptance_rate: acceptance,
        };
        write_samples(&dir.join(&file), &SampleSet::new(header, samples.clone()))?;
    }
    Ok(SampleSummary {
        target: job.target,
        seed: job.seed,
        file,
        sampler: job.sampler.name().into(),
        n,
        beta: job.spec.beta,
        samples: samples.len(),
        complete,
        acceptance_rate: acceptance,
        second_moment,
        second_moment_se,
        certified: job.spec.admissibility().certified,
    })
}

pub fn cmd_sample(config: &ExperimentConfig, dir: &Path, options: SampleOptions) -> Result<Vec<SampleSummary>> {
    fs::create_dir_all(dir.join(SAMPLE_DIR))?;
    let targets = config.sample_targets();
    let effective = if targets.contains(&SampleTarget::Effective) {
        let mu = load_measure(dir, MEASURE_FILE)?;
        Some(EffectiveField::new(config.ensemble.field.clone(), config.ensemble.interaction.clone(), mu))
    } else {
        None
    };
    let jobs = jobs(config);
    let summaries = jobs
        .par_iter()
        .map(|job| run_job(job, config, dir, effective.as_ref(), options))
        .collect::<Result<Vec<_>>>()?;
    if summaries.iter().all(|s| s.complete) {
        let mut manifest = Manifest::new("sample", config, json!({ "runs": summaries }))?;
        for s in &summaries {
            manifest.add_artifact(dir, &s.file)?;
        }
        manifest.write(dir)?;
    }
    Ok(summaries)
}

/// All sample files of a target, concatenated in configured seed order.
pub fn load_target(config: &ExperimentConfig, dir: &Path, target: SampleTarget) -> Result<SampleSet> {
    let seeds = match target {
        SampleTarget::Reference => config
            .reference
            .as_ref()
            .map(|r| r.seeds.clone())
            .ok_or_else(|| Error::Config("no [reference] section".into()))?,
        _ => config.chain.seeds.clone(),
    };
    let sets = seeds
        .iter()
        .map(|&s| {
            let path = dir.join(sample_file(target, s));
            if !path.exists() {
                return Err(missing(&path.display().to_string(), "sample"));
            }
            read_samples(&path)
        })
        .collect::<Result<Vec<_>>>()?;
    SampleSet::merge(&sets)
}

fn target_measure(dir: &Path, target: SampleTarget) -> Result<GridMeasure> {
    match target {
        SampleTarget::Reference => load_measure(dir, REFERENCE_MEASURE_FILE),
        _ => load_measure(dir, MEASURE_FILE),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub statistic: String,
    pub target: String,
    pub n: usize,
    pub spec_hash: String,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl StatRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.statistic, self.target, self.n, self.spec_hash, self.value, self.std_error, self.n_samples
        )
    }
}

fn spec_of(config: &ExperimentConfig, target: SampleTarget) -> EnsembleSpec {
    match target {
        SampleTarget::Modified => config.ensemble.clone(),
        SampleTarget::Effective => EnsembleSpec {
            interaction: InteractionPotential::zero(),
            ..config.ensemble.clone()
        },
        SampleTarget::Reference => config.reference_spec().expect("reference configured"),
    }
}

fn correlation_center(config: &ExperimentConfig, target: SampleTarget) -> f64 {
    match target {
        SampleTarget::Reference => config.statistics.reference_center,
        _ => config.statistics.center,
    }
}

fn density_series(mu: &GridMeasure, label: &str) -> Series {
    Series::new(label, mu.midpoints().into_iter().zip(mu.densities()).collect())
}

pub fn cmd_stats(config: &ExperimentConfig, dir: &Path) -> Result<Vec<StatRow>> {
    let st = &config.statistics;
    let mut rows = Vec::new();
    let mut files = vec![PathBuf::from(STATS_CSV)];
    for target in config.sample_targets() {
        let set = load_target(config, dir, target)?;
        let mu = target_measure(dir, target)?;
        let samples = &set.samples;
        let n = set.header.n;
        let hash = short_hash(&spec_of(config, target));
        let row = |statistic: String, value: f64, std_error: f64| StatRow {
            statistic,
            target: target.name().into(),
            n,
            spec_hash: hash.clone(),
            value,
            std_error,
            n_samples: samples.len(),
        };
        if st.uses(Estimator::Density) {
            let kde = empirical_density(samples, mu.grid(), st.bandwidth)?;
            rows.push(row("density_l1".into(), kde.l1_distance(&mu), f64::NAN));
            let plot = PathBuf::from(format!("density_{}.svg", target.name()));
            line_plot(
                &dir.join(&plot),
                &format!("one-point density ({}, N={n})", target.name()),
                "x",
                &[density_series(&kde, "empirical"), density_series(&mu, "equilibrium")],
            )?;
            files.push(plot);
        }
        if st.uses(Estimator::Spacing) {
            let gaps = bulk_gaps(samples, &mu)?;
            let (mean, se) = batch_means(&gaps, 20);
            rows.push(row("mean_bulk_gap".into(), mean, se));
            let hist = spacing_histogram(&gaps, st.spacing_bins, st.spacing_max);
            rows.push(row("gap_mass_below_0.1".into(), hist.ecdf(0.1), f64::NAN));
            let plot = PathBuf::from(format!("spacing_{}.svg", target.name()));
            let poisson: Vec<(f64, f64)> = (0..=200).map(|i| {
                let s = st.spacing_max * i as f64 / 200.0;
                (s, (-s).exp())
            }).collect();
            histogram_plot(&dir.join(&plot), &format!("bulk spacings ({}, N={n})", target.name()), &hist, &[Series::new("Poisson", poisson)])?;
            files.push(plot);
        }
        if st.uses(Estimator::Correlation) {
            for &k in &st.k {
                let e = averaged_correlation(samples, &mu, correlation_center(config, target), st.xi, &st.test_function(k))?;
                rows.push(row(format!("correlation_k{k}"), e.value, e.std_error));
            }
        }
        if st.uses(Estimator::Concentration) {
            let report = concentration_check(&st.linear_statistic, &[(samples.as_slice(), &mu)])?;
            let r = &report.rows[0];
            rows.push(row(format!("variance[{}]", report.function), r.variance, r.variance_std_error));
        }
        if target == SampleTarget::Effective && !config.ensemble.interaction.is_zero() {
            let h = &config.ensemble.interaction;
            if st.uses(Estimator::Dirichlet) {
                let d = estimate_dirichlet(samples, h, &mu, GradientMode::Analytic)?;
                rows.push(row("dirichlet".into(), d.value, d.std_error));
            }
            if st.uses(Estimator::ExpMoment) {
                let m = exp_moment_diagnostic(samples, h, &mu, st.exp_lambda)?;
                rows.push(row(format!("exp_moment[lambda={}]", st.exp_lambda), m.estimate, m.std_error));
            }
        }
    }
    let mut text = String::from(STATS_HEADER);
    text.push('\n');
    for r in &rows {
        text.push_str(&r.csv());
        text.push('\n');
    }
    fs::write(dir.join(STATS_CSV), text)?;
    let mut manifest = Manifest::new("stats", config, json!({ "rows": rows.len() }))?;
    for f in files {
        manifest.add_artifact(dir, f)?;
    }
    manifest.write(dir)?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub modified: f64,
    pub reference: f64,
    pub difference: f64,
    pub combined_error: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.name, self.modified, self.reference, self.difference, self.combined_error, self.threshold, self.passed
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub negative_control: bool,
    pub checks: Vec<Check>,
    pub spacing_ks: f64,
    pub passed: bool,
}

impl CompareReport {
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{:<24} modified {:>10.5} reference {:>10.5} diff {:>+10.5} (err {:.5}, threshold {:.4}) {}",
                    c.name,
                    c.modified,
                    c.reference,
                    c.difference,
                    c.combined_error,
                    c.threshold,
                    if c.passed { "PASS" } else { "FAIL" }
                )
            })
            .collect();
        let label = if self.negative_control { " (negative control)" } else { "" };
        out.push(format!("verdict: {}{label}", if self.passed { "PASS" } else { "FAIL" }));
        out
    }
}

fn correlation_check(k: usize, m: &CorrelationEstimate, r: &CorrelationEstimate, z: f64) -> Check {
    let combined = (m.std_error.powi(2) + r.std_error.powi(2)).sqrt();
    let difference = m.value - r.value;
    Check {
        name: format!("correlation_k{k}"),
        modified: m.value,
        reference: r.value,
        difference,
        combined_error: combined,
        threshold: z * combined,
        passed: difference.abs() <= z * combined,
    }
}

pub fn cmd_compare(config: &ExperimentConfig, dir: &Path) -> Result<CompareReport> {
    let reference_cfg = config
        .reference
        .as_ref()
        .ok_or_else(|| Error::Config("compare needs a [reference] section".into()))?;
    let modified = load_target(config, dir, SampleTarget::Modified)?;
    let reference = load_target(config, dir, SampleTarget::Reference)?;
    let (hm, hr) = (&modified.header, &reference.header);
    if (hm.n != hr.n || hm.beta != hr.beta) && !reference_cfg.negative_control {
        return Err(Error::Incompatible(format!(
            "modified ensemble has N={} beta={}, reference has N={} beta={}; set negative_control = true to compare anyway",
            hm.n, hm.beta, hr.n, hr.beta
        )));
    }
    let mu = load_measure(dir, MEASURE_FILE)?;
    let mu_ref = load_measure(dir, REFERENCE_MEASURE_FILE)?;
    let st = &config.statistics;
    let mut checks = Vec::new();
    for &k in &st.k {
        let f = st.test_function(k);
        let m = averaged_correlation(&modified.samples, &mu, st.center, st.xi, &f)?;
        let r = averaged_correlation(&reference.samples, &mu_ref, st.reference_center, st.xi, &f)?;
        checks.push(correlation_check(k, &m, &r, st.z_threshold));
    }
    let gaps_m = bulk_gaps(&modified.samples, &mu)?;
    let gaps_r = bulk_gaps(&reference.samples, &mu_ref)?;
    let ks = ks_two_sample(&gaps_m, &gaps_r);
    checks.push(Check {
        name: "spacing_ks".into(),
        modified: f64::NAN,
        reference: f64::NAN,
        difference: ks,
        combined_error: f64::NAN,
        threshold: st.ks_threshold,
        passed: ks <= st.ks_threshold,
    });
    let kde = empirical_density(&modified.samples, mu.grid(), st.bandwidth)?;
    let l1 = kde.l1_distance(&mu);
    checks.push(Check {
        name: "density_l1".into(),
        modified: l1,
        reference: f64::NAN,
        difference: l1,
        combined_error: f64::NAN,
        threshold: st.density_l1_tolerance,
        passed: l1 <= st.density_l1_tolerance,
    });
    let passed = checks.iter().all(|c| c.passed);
    let report = CompareReport {
        negative_control: reference_cfg.negative_control,
        checks,
        spacing_ks: ks,
        passed,
    };

    let mut csv = String::from(COMPARE_HEADER);
    csv.push('\n');
    for c in &report.checks {
        csv.push_str(&c.csv());
        csv.push('\n');
    }
    fs::write(dir.join(COMPARE_CSV), csv)?;
    fs::write(dir.join("compare_report.txt"), report.lines().join("\n") + "\n")?;
    let ecdf = |gaps: &[f64]| -> Vec<(f64, f64)> {
        let mut g = gaps.to_vec();
        g.sort_by(f64::total_cmp);
        let len = g.len() as f64;
        g.iter().enumerate().step_by((g.len() / 400).max(1)).map(|(i, &s)| (s, (i + 1) as f64 / len)).collect()
    };
    let poisson: Vec<(f64, f64)> = (0..=100).map(|i| {
        let s = st.spacing_max * i as f64 / 100.0;
        (s, poisson_spacing_cdf(s))
    }).collect();
    line_plot(
        &dir.join("compare_spacing_cdf.svg"),
        "bulk spacing distribution functions",
        "unfolded gap",
        &[
            Series::new(format!("modified (beta={})", hm.beta), ecdf(&gaps_m)),
            Series::new(format!("reference (beta={})", hr.beta), ecdf(&gaps_r)),
            Series::new("Poisson", poisson),
        ],
    )?;
    line_plot(
        &dir.join("compare_density.svg"),
        "one-point density of the modified ensemble",
        "x",
        &[density_series(&kde, "empirical"), density_series(&mu, "self-consistent limit")],
    )?;
    let mut manifest = Manifest::new("compare", config, serde_json::to_value(&report)?)?;
    for f in [COMPARE_CSV, "compare_report.txt", "compare_spacing_cdf.svg", "compare_density.svg"] {
        manifest.add_artifact(dir, f)?;
    }
    manifest.write(dir)?;
    Ok(report)
}
