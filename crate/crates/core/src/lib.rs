//! Feedforward output tracking for non-minimum-phase SISO LTI plants.
//!
//! The crate provides a model-based stable-inversion reference and a
//! data-driven Koopman-type operator `u(t) = ⟨K, Φ(t)⟩`, where `Φ` stacks
//! previewed shifts and derivatives of the desired output and `K` is
//! identified from measured plant responses with a pseudoinverse.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod error;
pub mod koopman;
pub mod lti;
pub mod numkit;
pub mod scalar;
pub mod signals;
pub mod sim;
pub mod stable_inverse;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = numkit::Matrix<f64>;
pub type StateSpace64 = lti::StateSpace<f64>;
pub type NormalForm64 = lti::NormalForm<f64>;
pub type HyperbolicSplit64 = lti::HyperbolicSplit<f64>;
pub type SignalSpec64 = signals::SignalSpec<f64>;
pub type Trajectory64 = sim::Trajectory<f64>;
pub type Dictionary64 = koopman::Dictionary<f64>;
pub type KoopmanOperator64 = koopman::KoopmanOperator<f64>;
pub type OutputMatrix64 = koopman::OutputMatrix<f64>;
