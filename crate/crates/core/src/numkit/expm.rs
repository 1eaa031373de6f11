use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const PADE_DEGREE: usize = 8;

/// Matrix exponential `e^{M t}` by scaling and squaring around a diagonal Padé core.
pub fn mat_exp<T: Scalar>(m: &Matrix<T>, t: T) -> Result<Matrix<T>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("mat_exp of a {}x{} matrix", m.rows(), m.cols())));
    }
    if !m.is_finite() || !t.is_finite() {
        return Err(Error::NonFinite("mat_exp input"));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let a = m.scale(t);
    let norm = a.norm_one();
    let half = T::lit(0.5);
    let mut squarings = 0i32;
    if norm > half {
        squarings = (norm / half).log2().ceil().to_i32().unwrap_or(0).max(0);
    }
    let x = a.scale(T::lit(2.0).powi(-squarings));

    // c_k = c_{k-1} (q - k + 1) / (k (2q - k + 1))
    let q = PADE_DEGREE;
    let mut c = T::one();
    let id = Matrix::identity(n);
    let mut num = id.clone();
    let mut den = id.clone();
    let mut xk = id;
    for k in 1..=q {
        c = c * T::from_usize_lossy(q - k + 1) / T::from_usize_lossy(k * (2 * q - k + 1));
        xk = &xk * &x;
        let term = xk.scale(c);
        num = &num + &term;
        den = if k % 2 == 0 { &den + &term } else { &den - &term };
    }
    let mut e = den.solve(&num)?;
    for _ in 0..squarings {
        e = &e * &e;
    }
    Ok(e)
}
