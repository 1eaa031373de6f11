//! Desired-output trajectories with analytic derivatives, and bounded disturbance draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Highest derivative order any signal variant evaluates.
pub const MAX_DERIVATIVE_ORDER: usize = 16;

/// Analytic signal family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalSpec<T> {
    /// `amplitude · sin(frequency · t + phase)`, frequency in rad/s.
    Sinusoid { amplitude: T, frequency: T, phase: T },
    /// `Σ cᵢ tⁱ`, coefficients in ascending powers.
    Polynomial { coefficients: Vec<T> },
    Sum { terms: Vec<SignalSpec<T>> },
    /// `base(t + offset)`.
    Shifted { base: Box<SignalSpec<T>>, offset: T },
}

impl<T: Scalar> SignalSpec<T> {
    pub fn sinusoid(amplitude: T, frequency: T, phase: T) -> Self {
        SignalSpec::Sinusoid { amplitude, frequency, phase }
    }

    pub fn zero() -> Self {
        SignalSpec::Polynomial { coefficients: vec![] }
    }

    pub fn shifted(self, offset: T) -> Self {
        SignalSpec::Shifted { base: Box::new(self), offset }
    }

    pub fn scaled(&self, c: T) -> Self {
        match self {
            SignalSpec::Sinusoid { amplitude, frequency, phase } => {
                SignalSpec::Sinusoid { amplitude: *amplitude * c, frequency: *frequency, phase: *phase }
            }
            SignalSpec::Polynomial { coefficients } => {
                SignalSpec::Polynomial { coefficients: coefficients.iter().map(|&v| v * c).collect() }
            }
            SignalSpec::Sum { terms } => SignalSpec::Sum { terms: terms.iter().map(|s| s.scaled(c)).collect() },
            SignalSpec::Shifted { base, offset } => SignalSpec::Shifted { base: Box::new(base.scaled(c)), offset: *offset },
        }
    }

    /// Value of the `order`-th derivative at `t`.
    pub fn eval(&self, t: T, order: usize) -> Result<T> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::Capability(format!(
                "derivative order {order} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}"
            )));
        }
        Ok(self.eval_unchecked(t, order))
    }

    pub(crate) fn eval_unchecked(&self, t: T, order: usize) -> T {
        match self {
            SignalSpec::Sinusoid { amplitude, frequency, phase } => {
                let quarter_turns = T::from_usize_lossy(order) * T::FRAC_PI_2();
                *amplitude * frequency.powi(order as i32) * (*frequency * t + *phase + quarter_turns).sin()
            }
            SignalSpec::Polynomial { coefficients } => {
                let mut acc = T::zero();
                for i in (order..coefficients.len()).rev() {
                    let falling: T = (i - order + 1..=i).fold(T::one(), |f, m| f * T::from_usize_lossy(m));
                    acc = acc * t + coefficients[i] * falling;
                }
                acc
            }
            SignalSpec::Sum { terms } => terms.iter().map(|s| s.eval_unchecked(t, order)).sum(),
            SignalSpec::Shifted { base, offset } => base.eval_unchecked(t + *offset, order),
        }
    }

    /// A constant `M` with `|y(t)| ≤ M` for all real `t`, when one exists.
    pub fn bound(&self) -> Option<T> {
        match self {
            SignalSpec::Sinusoid { amplitude, .. } => Some(amplitude.abs()),
            SignalSpec::Polynomial { coefficients } => match coefficients.iter().rposition(|&c| c != T::zero()) {
                None => Some(T::zero()),
                Some(0) => Some(coefficients[0].abs()),
                Some(_) => None,
            },
            SignalSpec::Sum { terms } => terms.iter().map(|s| s.bound()).sum(),
            SignalSpec::Shifted { base, .. } => base.bound(),
        }
    }
}

/// Bounded disturbance process, drawn independently at every simulation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DisturbanceKind<T> {
    #[default]
    None,
    /// `U[ρ·|envelope|]`, where the envelope is the signal the disturbance rides on.
    UniformMultiplicative { fraction: T },
    /// `U[bound]`.
    UniformAbsolute { bound: T },
}

impl<T: Scalar> DisturbanceKind<T> {
    pub fn validate(&self) -> Result<()> {
        let v = match self {
            DisturbanceKind::None => return Ok(()),
            DisturbanceKind::UniformMultiplicative { fraction } => *fraction,
            DisturbanceKind::UniformAbsolute { bound } => *bound,
        };
        if v.is_finite() && v >= T::zero() {
            Ok(())
        } else {
            Err(Error::Contract(format!("disturbance magnitude must be finite and nonnegative, got {v}")))
        }
    }

    pub fn is_none(&self) -> bool {
        match self {
            DisturbanceKind::None => true,
            DisturbanceKind::UniformMultiplicative { fraction } => *fraction == T::zero(),
            DisturbanceKind::UniformAbsolute { bound } => *bound == T::zero(),
        }
    }

    /// Half-width of the uniform support for a given envelope.
    pub fn half_width(&self, envelope: T) -> T {
        match self {
            DisturbanceKind::None => T::zero(),
            DisturbanceKind::UniformMultiplicative { fraction } => *fraction * envelope.abs(),
            DisturbanceKind::UniformAbsolute { bound } => *bound,
        }
    }
}

/// Input-side (`w`) and output-side (`h`) disturbances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Disturbances<T> {
    #[serde(default)]
    pub input: DisturbanceKind<T>,
    #[serde(default)]
    pub output: DisturbanceKind<T>,
}

impl<T: Scalar> Disturbances<T> {
    pub fn none() -> Self {
        Self { input: DisturbanceKind::None, output: DisturbanceKind::None }
    }

    pub fn multiplicative(fraction: T) -> Self {
        Self {
            input: DisturbanceKind::UniformMultiplicative { fraction },
            output: DisturbanceKind::UniformMultiplicative { fraction },
        }
    }

    pub fn is_none(&self) -> bool {
        self.input.is_none() && self.output.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        self.input.validate()?;
        self.output.validate()
    }
}

/// Generator used for all disturbance draws.
pub type NoiseRng = ChaCha8Rng;

/// Deterministic generator for `(seed, stream)`; streams are independent.
pub fn noise_rng(seed: u64, stream: u64) -> NoiseRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw from the disturbance process. Draws nothing from `rng` when the kind is inactive.
pub fn sample_disturbance<T: Scalar, R: Rng + ?Sized>(kind: &DisturbanceKind<T>, rng: &mut R, envelope: T) -> T {
    if kind.is_none() {
        return T::zero();
    }
    let width = kind.half_width(envelope);
    let unit: f64 = rng.gen_range(-1.0..=1.0);
    T::lit(unit) * width
}
