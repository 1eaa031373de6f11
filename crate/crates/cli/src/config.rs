//! Experiment configuration (TOML). Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use nmpk::lti::StateSpace;
use nmpk::signals::{Disturbances, SignalSpec};
use nmpk::StateSpace64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const BENCHMARK_PRESET: &str = "paper-eq32";
const BENCHMARK_PRESET_TOML: &str = include_str!("../presets/paper-eq32.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub plant: PlantConfig,
    pub trajectory: SignalSpec<f64>,
    pub dictionary: DictionaryConfig,
    pub samples: SampleConfig,
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub identification: IdentificationConfig,
    #[serde(default)]
    pub tracking: TrackingConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

/// Either a named preset or inline matrices (`a` row-major nested, vectors for `b`, `c`, `g`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub preset: Option<String>,
    pub a: Option<Vec<Vec<f64>>>,
    pub b: Option<Vec<f64>>,
    pub c: Option<Vec<f64>>,
    /// Defaults to `b` when omitted.
    pub g: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryConfig {
    /// Preview half-width `N`.
    pub half_width: usize,
    pub dt: f64,
    /// Number of derivative atoms; defaults to the plant's relative degree.
    #[serde(default)]
    pub derivatives: Option<usize>,
}

/// Identification sample times `t1 + i·spacing`, `i = 0..count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub t1: f64,
    pub count: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub step: f64,
    /// Horizon of tracking and oracle runs.
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentificationConfig {
    /// Monte Carlo trials averaged into the output matrix.
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub disturbances: Disturbances<f64>,
}

impl Default for IdentificationConfig {
    fn default() -> Self {
        Self { trials: 1, disturbances: Disturbances::none() }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingConfig {
    /// Metrics window `[start, end]` in seconds.
    #[serde(default = "default_window")]
    pub steady_state: [f64; 2],
    #[serde(default)]
    pub disturbances: Disturbances<f64>,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self { steady_state: default_window(), disturbances: Disturbances::none() }
    }
}

fn default_window() -> [f64; 2] {
    [50.0, 100.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    HalfWidth,
    Dt,
    MonteCarlo,
    /// Multiplicative fraction applied to both identification disturbances.
    Disturbance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// On the `dt` axis, rescale `N` so the preview window `N·dt` stays fixed.
    #[serde(default)]
    pub keep_window: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        match name {
            BENCHMARK_PRESET => Self::from_toml(BENCHMARK_PRESET_TOML),
            other => Err(CliError::Validation(format!("unknown preset '{other}' (available: {BENCHMARK_PRESET})"))),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        self.plant.build()?;
        if self.dictionary.half_width == 0 {
            return bad("dictionary.half_width must be at least 1".into());
        }
        if !(self.dictionary.dt > 0.0 && self.dictionary.dt.is_finite()) {
            return bad(format!("dictionary.dt must be positive, got {}", self.dictionary.dt));
        }
        if self.dictionary.derivatives == Some(0) {
            return bad("dictionary.derivatives must be at least 1".into());
        }
        if self.samples.count == 0 || !(self.samples.spacing > 0.0) || !(self.samples.t1 >= 0.0) {
            return bad("samples need count ≥ 1, spacing > 0 and t1 ≥ 0".into());
        }
        if !(self.simulation.step > 0.0) || !(self.simulation.t_end > 0.0) {
            return bad("simulation step and t_end must be positive".into());
        }
        if self.identification.trials == 0 {
            return bad("identification.trials must be at least 1".into());
        }
        self.identification.disturbances.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        self.tracking.disturbances.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        let [a, b] = self.tracking.steady_state;
        if !(a >= 0.0 && b > a) {
            return bad(format!("tracking.steady_state must satisfy 0 ≤ start < end, got [{a}, {b}]"));
        }
        if b > self.simulation.t_end + 1e-9 {
            return bad(format!("steady-state window ends at {b}, after simulation.t_end = {}", self.simulation.t_end));
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() || sw.repetitions == 0 {
                return bad("sweep needs at least one value and one repetition".into());
            }
            for &v in &sw.values {
                let integral = matches!(sw.axis, SweepAxis::HalfWidth | SweepAxis::MonteCarlo);
                if !(v.is_finite() && v >= 0.0) || (integral && (v < 1.0 || v.fract() != 0.0)) || (sw.axis == SweepAxis::Dt && v == 0.0) {
                    return bad(format!("invalid value {v} on sweep axis {:?}", sw.axis));
                }
            }
        }
        Ok(())
    }
}

impl PlantConfig {
    pub fn build(&self) -> Result<StateSpace64, CliError> {
        let inline = self.a.is_some() || self.b.is_some() || self.c.is_some() || self.g.is_some();
        match (&self.preset, inline) {
            (Some(_), true) => Err(CliError::Validation("plant: give either a preset or matrices, not both".into())),
            (Some(name), false) if name == BENCHMARK_PRESET => Ok(StateSpace::benchmark_plant()),
            (Some(name), false) => Err(CliError::Validation(format!("unknown plant preset '{name}'"))),
            (None, false) => Err(CliError::Validation("plant: missing preset or matrices".into())),
            (None, true) => {
                let (Some(a), Some(b), Some(c)) = (&self.a, &self.b, &self.c) else {
                    return Err(CliError::Validation("plant: inline form needs a, b and c".into()));
                };
                let n = b.len();
                if a.len() != n || a.iter().any(|row| row.len() != n) {
                    return Err(CliError::Validation(format!("plant: a must be {n}x{n}")));
                }
                let flat: Vec<f64> = a.iter().flatten().copied().collect();
                let g = self.g.as_ref().unwrap_or(b);
                StateSpace::from_slices(&flat, b, c, g).map_err(|e| CliError::Validation(format!("plant: {e}")))
            }
        }
    }
}
