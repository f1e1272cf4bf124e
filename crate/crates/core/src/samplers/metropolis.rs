//! Random-scan single-coordinate Metropolis chain targeting `exp(-H)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::target::Target;
use crate::error::{invalid, Error, Result};
use crate::model::ensemble::{Configuration, EnsembleSpec};
use crate::model::field::OneBody;

/// Acceptance rate the step size is tuned to during burn-in.
pub const TARGET_ACCEPTANCE: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSchedule {
    /// Number of retained configurations.
    pub n_samples: usize,
    /// Single-site proposals before the first retained sample; defaults to
    /// `10 * N * 1000`.
    #[serde(default)]
    pub burn_in: Option<usize>,
    /// Proposals between retained samples; defaults to `N`.
    #[serde(default)]
    pub thin: Option<usize>,
    /// Initial proposal scale; defaults to the starting spread divided by `N`.
    #[serde(default)]
    pub initial_step: Option<f64>,
    #[serde(default = "default_true")]
    pub adapt: bool,
}

fn default_true() -> bool {
    true
}

impl ChainSchedule {
    pub fn new(n_samples: usize) -> Self {
        Self {
            n_samples,
            burn_in: None,
            thin: None,
            initial_step: None,
            adapt: true,
        }
    }

    pub fn burn_in(mut self, steps: usize) -> Self {
        self.burn_in = Some(steps);
        self
    }

    pub fn thin(mut self, steps: usize) -> Self {
        self.thin = Some(steps);
        self
    }

    pub fn initial_step(mut self, step: f64) -> Self {
        self.initial_step = Some(step);
        self
    }

    pub fn fixed_step(mut self) -> Self {
        self.adapt = false;
        self
    }

    pub fn burn_in_steps(&self, n: usize) -> usize {
        self.burn_in.unwrap_or(10 * n * 1000)
    }

    pub fn thin_steps(&self, n: usize) -> usize {
        self.thin.unwrap_or(n).max(1)
    }
}

/// Result of a finished chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRun {
    pub seed: u64,
    pub n: usize,
    pub step_size: f64,
    pub burn_in: usize,
    pub thin: usize,
    pub n_steps: usize,
    /// Acceptance after the step size was frozen.
    pub acceptance_rate: f64,
    pub burn_in_acceptance: f64,
    /// Sorted retained configurations.
    pub samples: Vec<Configuration>,
}

/// Starting spread `r = sqrt(2 beta / Q''(0))`, the semicircle radius of the
/// quadratic approximation of the field.
pub fn initial_radius(field: &dyn OneBody, beta: f64) -> f64 {
    let d = 1e-3;
    let curvature = (field.value(d) - 2.0 * field.value(0.0) + field.value(-d)) / (d * d);
    (2.0 * beta / curvature.max(1e-3)).sqrt()
}

/// Evenly spaced starting configuration on `[-0.9 r, 0.9 r]`.
pub fn initial_configuration(n: usize, radius: f64) -> Vec<f64> {
    (0..n)
        .map(|i| 0.9 * radius * (2.0 * (i as f64 + 0.5) / n as f64 - 1.0))
        .collect()
}

/// Persistable state of a single-site chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainState {
    pub seed: u64,
    pub positions: Vec<f64>,
    pub rng: ChaCha8Rng,
    pub log_step: f64,
    pub proposals: u64,
    pub accepted: u64,
    pub burn_in_done: bool,
    pub burn_in_accepted: u64,
    pub post_proposals: u64,
    pub post_accepted: u64,
    pub retained: usize,
}

/// Stepwise random-walk Metropolis chain.
pub struct MetropolisChain<'a> {
    target: Target<'a>,
    schedule: ChainSchedule,
    state: ChainState,
}

impl<'a> MetropolisChain<'a> {
    pub fn new(target: Target<'a>, n: usize, seed: u64, schedule: ChainSchedule) -> Result<Self> {
        if n == 0 {
            return Err(invalid("chain needs at least one particle"));
        }
        let radius = initial_radius(target.field, target.beta);
        let step = schedule.initial_step.unwrap_or(radius / n as f64);
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("initial step must be positive"));
        }
        let state = ChainState {
            seed,
            positions: initial_configuration(n, radius),
            rng: ChaCha8Rng::seed_from_u64(seed),
            log_step: step.ln(),
            proposals: 0,
            accepted: 0,
            burn_in_done: false,
            burn_in_accepted: 0,
            post_proposals: 0,
            post_accepted: 0,
            retained: 0,
        };
        Ok(Self {
            target,
            schedule,
            state,
        })
    }

    pub fn from_state(target: Target<'a>, schedule: ChainSchedule, state: ChainState) -> Self {
        Self {
            target,
            schedule,
            state,
        }
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn step_size(&self) -> f64 {
        self.state.log_step.exp()
    }

    fn propose(&mut self) -> bool {
        let n = self.state.positions.len();
        let l = self.state.rng.random_range(0..n);
        let z: f64 = self.state.rng.sample(StandardNormal);
        let y = self.state.positions[l] + self.step_size() * z;
        let delta = self.target.delta_single(&self.state.positions, l, y);
        let u: f64 = self.state.rng.random();
        // accept with probability min(1, exp(-delta))
        let accept = delta <= 0.0 || u < (-delta).exp();
        if accept {
            self.state.positions[l] = y;
        }
        self.state.proposals += 1;
        accept
    }

    /// Runs the burn-in phase (idempotent once completed).
    pub fn burn_in(&mut self) -> Result<()> {
        if self.state.burn_in_done {
            return Ok(());
        }
        let n = self.state.positions.len();
        let total = self.schedule.burn_in_steps(n);
        let window = (10 * n).max(100);
        let mut in_window = 0;
        let mut window_accepted = 0;
        let mut adapt_round = 0.0_f64;
        while self.state.proposals < total as u64 {
            let accepted = self.propose();
            if accepted {
                self.state.burn_in_accepted += 1;
                window_accepted += 1;
            }
            in_window += 1;
            if self.schedule.adapt && in_window == window {
                adapt_round += 1.0;
                let rate = window_accepted as f64 / window as f64;
                self.state.log_step += (rate - TARGET_ACCEPTANCE) * 2.0 / adapt_round.sqrt();
                in_window = 0;
                window_accepted = 0;
            }
        }
        if total > 0 && self.state.burn_in_accepted == 0 {
            return Err(Error::StepSizeCollapse);
        }
        self.state.burn_in_done = true;
        Ok(())
    }

    /// Advances `thin` proposals and returns the sorted configuration.
    pub fn next_sample(&mut self) -> Result<Configuration> {
        self.burn_in()?;
        let thin = self.schedule.thin_steps(self.state.positions.len());
        for _ in 0..thin {
            let accepted = self.propose();
            self.state.post_proposals += 1;
            if accepted {
                self.state.post_accepted += 1;
            }
        }
        self.state.retained += 1;
        Ok(Configuration::new(self.state.positions.clone()).sorted())
    }

    pub fn run(mut self) -> Result<ChainRun> {
        let mut samples = Vec::with_capacity(self.schedule.n_samples);
        while self.state.retained < self.schedule.n_samples {
            samples.push(self.next_sample()?);
        }
        Ok(self.finish(samples))
    }

    pub fn finish(&self, samples: Vec<Configuration>) -> ChainRun {
        let n = self.state.positions.len();
        let burn_in = self.schedule.burn_in_steps(n);
        ChainRun {
            seed: self.state.seed,
            n,
            step_size: self.step_size(),
            burn_in,
            thin: self.schedule.thin_steps(n),
            n_steps: self.state.proposals as usize,
            acceptance_rate: ratio(self.state.post_accepted, self.state.post_proposals),
            burn_in_acceptance: ratio(self.state.burn_in_accepted, burn_in as u64),
            samples,
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

/// Runs a full chain for `spec`.
pub fn metropolis_chain(spec: &EnsembleSpec, seed: u64, schedule: &ChainSchedule) -> Result<ChainRun> {
    spec.validate()?;
    let target = Target::new(&spec.field, spec.beta, &spec.interaction);
    MetropolisChain::new(target, spec.n, seed, schedule.clone())?.run()
}

/// Chain for an arbitrary one-body field (e.g. the effective field `Q + h_mu`).
pub fn metropolis_chain_for(target: Target<'_>, n: usize, seed: u64, schedule: &ChainSchedule) -> Result<ChainRun> {
    MetropolisChain::new(target, n, seed, schedule.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::interaction::InteractionPotential;

    /// Metropolis kernel on three states with a symmetric uniform proposal.
    fn transition_matrix(energy: [f64; 3]) -> [[f64; 3]; 3] {
        let mut p = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let delta = energy[j] - energy[i];
                    let acc = if delta <= 0.0 { 1.0 } else { (-delta).exp() };
                    p[i][j] = acc / 3.0;
                }
            }
            p[i][i] = 1.0 - p[i].iter().sum::<f64>();
        }
        p
    }

    #[test]
    fn acceptance_rule_satisfies_detailed_balance() {
        let energy = [0.3, 1.7, -0.4];
        let p = transition_matrix(energy);
        let z: f64 = energy.iter().map(|e| (-e).exp()).sum();
        let pi: Vec<f64> = energy.iter().map(|e| (-e).exp() / z).collect();
        for i in 0..3 {
            for j in 0..3 {
                assert!((pi[i] * p[i][j] - pi[j] * p[j][i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let spec = EnsembleSpec::gaussian(5, 2.0).unwrap();
        let schedule = ChainSchedule::new(20).burn_in(2000);
        let a = metropolis_chain(&spec, 42, &schedule).unwrap();
        let b = metropolis_chain(&spec, 42, &schedule).unwrap();
        assert_eq!(a, b);
        let c = metropolis_chain(&spec, 43, &schedule).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn resumed_chain_matches_uninterrupted() {
        let spec = EnsembleSpec::gaussian(4, 1.0).unwrap();
        let schedule = ChainSchedule::new(30).burn_in(500);
        let target = Target::new(&spec.field, spec.beta, &spec.interaction);
        let full = MetropolisChain::new(target, 4, 9, schedule.clone()).unwrap().run().unwrap();

        let mut first = MetropolisChain::new(target, 4, 9, schedule.clone()).unwrap();
        let mut samples: Vec<_> = (0..12).map(|_| first.next_sample().unwrap()).collect();
        let saved = serde_json::to_string(first.state()).unwrap();
        let state: ChainState = serde_json::from_str(&saved).unwrap();
        let mut second = MetropolisChain::from_state(target, schedule, state);
        while second.state().retained < 30 {
            samples.push(second.next_sample().unwrap());
        }
        assert_eq!(second.finish(samples), full);
    }

    #[test]
    fn adaptation_lands_in_band() {
        let spec = EnsembleSpec::gaussian(20, 2.0).unwrap();
        let run = metropolis_chain(&spec, 1, &ChainSchedule::new(200)).unwrap();
        assert!((0.15..=0.6).contains(&run.acceptance_rate), "{}", run.acceptance_rate);
    }

    #[test]
    fn collapse_is_reported() {
        // A huge fixed step never lands inside the confining well.
        let spec = EnsembleSpec::new(
            3,
            2.0,
            crate::model::field::ExternalField::quadratic(1e6),
            InteractionPotential::zero(),
        )
        .unwrap();
        let schedule = ChainSchedule::new(1).burn_in(200).initial_step(1e8).fixed_step();
        assert!(matches!(metropolis_chain(&spec, 0, &schedule), Err(Error::StepSizeCollapse)));
    }

    #[test]
    fn one_particle_variance() {
        // Target exp(-x^2): variance 1/2.
        let spec = EnsembleSpec::gaussian(1, 2.0).unwrap();
        let run = metropolis_chain(&spec, 3, &ChainSchedule::new(100_000).burn_in(5000).thin(5)).unwrap();
        let xs: Vec<f64> = run.samples.iter().map(|c| c.positions[0]).collect();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (m, se) = crate::numerics::batch_means(&sq, 50);
        assert!((m - 0.5).abs() < 3.0 * se, "{m} +- {se}");
    }
}
