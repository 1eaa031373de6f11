use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Full orthogonal factor of a Householder QR of an `n x k` matrix (`k ≤ n`).
pub fn householder_q<T: Scalar>(x: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let (n, k) = x.shape();
    if k > n {
        return Err(Error::Dimension(format!("QR of a wide {n}x{k} matrix")));
    }
    let mut r = x.clone();
    let mut q = Matrix::identity(n);
    for j in 0..k {
        let norm: T = (j..n).map(|i| r[(i, j)] * r[(i, j)]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if r[(j, j)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (j..n).map(|i| r[(i, j)]).collect();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&a| a * a).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for c in 0..k {
            let dot: T = (j..n).map(|i| v[i - j] * r[(i, c)]).sum();
            let f = two * dot / vnorm2;
            for i in j..n {
                r[(i, c)] = r[(i, c)] - f * v[i - j];
            }
        }
        // Q ← Q·H
        for row in 0..n {
            let dot: T = (j..n).map(|i| q[(row, i)] * v[i - j]).sum();
            let f = two * dot / vnorm2;
            for i in j..n {
                q[(row, i)] = q[(row, i)] - f * v[i - j];
            }
        }
    }
    Ok((q, r))
}

/// Orthonormal basis (as columns) of the orthogonal complement of the column space of `x`.
///
/// Requires `x` to have full column rank.
pub fn complement_basis<T: Scalar>(x: &Matrix<T>) -> Result<Matrix<T>> {
    let (n, k) = x.shape();
    let (q, r) = householder_q(x)?;
    let scale = x.max_abs().max(T::min_positive_value());
    let tol = T::from_usize_lossy(n) * T::epsilon() * scale * T::lit(100.0);
    if (0..k).any(|j| r[(j, j)].abs() <= tol) {
        return Err(Error::NumericalFailure("rank-deficient input to complement_basis".into()));
    }
    Ok(q.block(0, k, n, n - k))
}
