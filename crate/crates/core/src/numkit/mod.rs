//! Dense real-matrix kernel: exponential, pseudoinverse, spectra, polynomial roots.

mod eigen;
mod expm;
mod matrix;
mod poly;
mod qr;
mod svd;

pub use eigen::{eigenvalues, real_schur, spectrum, RealSchur, SpectralForm, Spectrum};
pub use expm::mat_exp;
pub use matrix::Matrix;
pub use poly::{companion, poly_eval, poly_eval_matrix, poly_roots, resolvent, Resolvent};
pub use qr::{complement_basis, householder_q};
pub use svd::{default_cutoff, norm_2, pinv, pinv_with_cutoff, rank, svd, Svd};
