use num_complex::Complex;

use super::{eigenvalues, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Companion matrix of a monic polynomial given by descending coefficients
/// `[1, c_{n-1}, ..., c_0]`; last row is `(-c_0, ..., -c_{n-1})`.
pub fn companion<T: Scalar>(monic_desc: &[T]) -> Matrix<T> {
    let n = monic_desc.len().saturating_sub(1);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        m[(i, i + 1)] = T::one();
    }
    for j in 0..n {
        m[(n - 1, j)] = -monic_desc[n - j];
    }
    m
}

fn normalize<T: Scalar>(coeffs: &[T]) -> Result<Vec<T>> {
    if coeffs.is_empty() {
        return Err(Error::InvalidPolynomial("no coefficients"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidPolynomial("non-finite coefficient"));
    }
    let start = coeffs
        .iter()
        .position(|&c| c != T::zero())
        .ok_or(Error::InvalidPolynomial("all coefficients are zero"))?;
    let lead = coeffs[start];
    Ok(coeffs[start..].iter().map(|&c| c / lead).collect())
}

/// Roots of a real polynomial (descending coefficients) via companion-matrix eigenvalues.
///
/// Leading zero coefficients are dropped; a nonzero constant has no roots.
pub fn poly_roots<T: Scalar>(coeffs: &[T]) -> Result<Vec<Complex<T>>> {
    let monic = normalize(coeffs)?;
    if monic.len() == 1 {
        return Ok(Vec::new());
    }
    eigenvalues(&companion(&monic))
}

/// Horner evaluation at a complex point.
pub fn poly_eval<T: Scalar>(coeffs: &[T], z: Complex<T>) -> Complex<T> {
    coeffs
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + Complex::new(c, T::zero()))
}

/// Evaluates a polynomial (descending coefficients) at a square matrix.
pub fn poly_eval_matrix<T: Scalar>(coeffs: &[T], m: &Matrix<T>) -> Matrix<T> {
    let n = m.rows();
    coeffs.iter().fold(Matrix::zeros(n, n), |acc, &c| &(&acc * m) + &Matrix::identity(n).scale(c))
}

/// Leverrier–Faddeev resolvent expansion of a square matrix.
///
/// `(sI − A)⁻¹ = (Σₖ Nₖ s^{n−1−k}) / det(sI − A)` with `N₀ = I`,
/// `Nₖ = A·Nₖ₋₁ + cₖ I`, `cₖ = −tr(A·Nₖ₋₁)/k`.
#[derive(Debug, Clone)]
pub struct Resolvent<T> {
    /// Characteristic polynomial, monic, descending: `[1, c_1, ..., c_n]`.
    pub char_poly: Vec<T>,
    /// Adjugate coefficient matrices `N_0 .. N_{n-1}`.
    pub adjugates: Vec<Matrix<T>>,
}

pub fn resolvent<T: Scalar>(a: &Matrix<T>) -> Result<Resolvent<T>> {
    if !a.is_square() {
        return Err(Error::Dimension("resolvent of a non-square matrix".into()));
    }
    let n = a.rows();
    let mut char_poly = Vec::with_capacity(n + 1);
    char_poly.push(T::one());
    let mut adjugates = Vec::with_capacity(n);
    let mut nk = Matrix::identity(n);
    for k in 1..=n {
        let an = a * &nk;
        let ck = -an.trace() / T::from_usize_lossy(k);
        char_poly.push(ck);
        adjugates.push(nk);
        nk = &an + &Matrix::identity(n).scale(ck);
    }
    Ok(Resolvent { char_poly, adjugates })
}
