//! Data-driven feedforward operator `u(t) = ⟨K, Φ(t)⟩`.
//!
//! Every atom of `Φ` is fed to the plant as an input; the sampled responses
//! form the output matrix `O`, and `K` is the minimum-norm solution of
//! `min ‖O_d − KᵀO‖` over the desired samples `O_d`.

mod dictionary;
mod montecarlo;
mod operator;

pub use dictionary::{build_dictionary, Atom, Dictionary};
pub use montecarlo::{chebyshev_radius, monte_carlo_collect, trial_seed, MonteCarloReport, TRIAL_SEED_STRIDE};
pub use operator::{
    apply_operator, collect_output_matrix, identify_k, identify_k_with_cutoff, residual, sample_times, Identification,
    KoopmanOperator, OutputMatrix,
};
