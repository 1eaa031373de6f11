//! The identify → track pipeline and the model-based reference run.

use nmpk::koopman::{build_dictionary, identify_k, monte_carlo_collect, sample_times, KoopmanOperator, MonteCarloReport};
use nmpk::lti::{hyperbolic_split, normal_form, DEFAULT_HYPERBOLIC_MARGIN, DEFAULT_RELATIVE_DEGREE_TOL};
use nmpk::signals::{noise_rng, Disturbances, SignalSpec};
use nmpk::sim::{simulate, steady_state_error, ErrorMetrics, SimGrid, Trajectory};
use nmpk::stable_inverse::StableInverse;
use nmpk::{Dictionary64, KoopmanOperator64, StateSpace64};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Noise stream reserved for tracking runs; identification rows use streams `0..atoms`.
pub const TRACKING_STREAM: u64 = u64::MAX;

/// Resolved, validated experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub plant: StateSpace64,
    pub trajectory: SignalSpec<f64>,
    pub half_width: usize,
    pub dt: f64,
    pub derivatives: usize,
    pub sample_times: Vec<f64>,
    pub step: f64,
    pub t_end: f64,
    pub id_trials: usize,
    pub id_disturbances: Disturbances<f64>,
    pub track_disturbances: Disturbances<f64>,
    pub window: [f64; 2],
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Identified {
    pub operator: KoopmanOperator64,
    pub residual: f64,
    /// `residual / ‖O_d‖`.
    pub relative_residual: f64,
    pub monte_carlo: MonteCarloReport<f64>,
}

#[derive(Debug, Clone)]
pub struct Tracked {
    pub trajectory: Trajectory<f64>,
    pub metrics: ErrorMetrics<f64>,
}

impl Experiment {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let plant = cfg.plant.build()?;
        let r = plant.relative_degree(DEFAULT_RELATIVE_DEGREE_TOL)?;
        Ok(Self {
            plant,
            trajectory: cfg.trajectory.clone(),
            half_width: cfg.dictionary.half_width,
            dt: cfg.dictionary.dt,
            derivatives: cfg.dictionary.derivatives.unwrap_or(r),
            sample_times: sample_times(cfg.samples.t1, cfg.samples.count, cfg.samples.spacing),
            step: cfg.simulation.step,
            t_end: cfg.simulation.t_end,
            id_trials: cfg.identification.trials,
            id_disturbances: cfg.identification.disturbances,
            track_disturbances: cfg.tracking.disturbances,
            window: cfg.tracking.steady_state,
            seed: cfg.seed,
        })
    }

    pub fn dictionary(&self) -> Result<Dictionary64, CliError> {
        Ok(build_dictionary(self.trajectory.clone(), self.half_width, self.dt, self.derivatives)?)
    }

    /// Identification runs stop at the last sample time.
    pub fn identification_grid(&self) -> Result<SimGrid<f64>, CliError> {
        let last = self.sample_times.last().copied().unwrap_or(self.step);
        Ok(SimGrid::covering(self.step, last)?)
    }

    pub fn tracking_grid(&self) -> Result<SimGrid<f64>, CliError> {
        Ok(SimGrid::new(self.step, self.t_end)?)
    }

    pub fn identify(&self) -> Result<Identified, CliError> {
        let dict = self.dictionary()?;
        let mc = monte_carlo_collect(
            &self.plant,
            &dict,
            &self.sample_times,
            &self.id_disturbances,
            self.identification_grid()?,
            self.id_trials,
            self.seed,
        )?;
        let id = identify_k(&mc.mean)?;
        let scale = mc.mean.desired.iter().map(|v| v * v).sum::<f64>().sqrt();
        let relative_residual = if scale > 0.0 { id.residual / scale } else { id.residual };
        Ok(Identified {
            operator: KoopmanOperator::new(dict, id.k)?,
            residual: id.residual,
            relative_residual,
            monte_carlo: mc,
        })
    }

    fn run<F: Fn(f64) -> f64>(&self, input: F, x0: &[f64]) -> Result<Tracked, CliError> {
        let mut rng = noise_rng(self.seed, TRACKING_STREAM);
        let trajectory = simulate(&self.plant, input, &self.track_disturbances, self.tracking_grid()?, x0, &mut rng)?;
        let metrics = steady_state_error(&trajectory, |t| self.trajectory.eval(t, 0).unwrap_or(f64::NAN), self.window[0], self.window[1])?;
        Ok(Tracked { trajectory, metrics })
    }

    /// Simulates `u = ⟨K, Φ⟩` from rest.
    pub fn track(&self, op: &KoopmanOperator64) -> Result<Tracked, CliError> {
        if op.dictionary().len() != 2 * self.half_width + self.derivatives {
            return Err(CliError::Validation(format!(
                "operator has {} atoms, configuration expects {}",
                op.dictionary().len(),
                2 * self.half_width + self.derivatives
            )));
        }
        self.run(|t| op.apply(t), &vec![0.0; self.plant.order()])
    }

    pub fn stable_inverse(&self) -> Result<StableInverse<f64>, CliError> {
        let nf = normal_form(&self.plant)?;
        let split = hyperbolic_split(&nf.a4, DEFAULT_HYPERBOLIC_MARGIN)?;
        Ok(StableInverse::new(nf, &split, self.trajectory.clone(), self.half_width, self.dt)?)
    }

    /// Simulates the model-based feedforward from the matched initial state.
    pub fn track_oracle(&self, inv: &StableInverse<f64>) -> Result<Tracked, CliError> {
        self.run(|t| inv.input(t), &inv.matched_state(0.0))
    }
}
