//! Real Schur form and eigenvalues of small dense matrices.
//!
//! Householder reduction to upper Hessenberg form followed by Francis
//! double-shift QR, with the orthogonal similarity accumulated so that
//! `M = Q · S · Qᵀ` where `S` is quasi-upper-triangular (1x1 blocks for real
//! eigenvalues, 2x2 blocks for complex conjugate pairs).

use num_complex::Complex;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the basis of a [`Spectrum`] relates the matrix to its eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralForm {
    /// Basis columns are (unit-norm) real eigenvectors.
    Diagonalizable,
    /// Basis is the orthogonal Schur basis.
    RealSchur,
}

#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<Complex<T>>,
    pub basis: Matrix<T>,
    pub form: SpectralForm,
}

#[derive(Debug, Clone)]
pub struct RealSchur<T> {
    /// Orthogonal Schur vectors.
    pub q: Matrix<T>,
    /// Quasi-upper-triangular factor.
    pub s: Matrix<T>,
    pub eigenvalues: Vec<Complex<T>>,
}

const ITERATIONS_PER_EIGENVALUE: usize = 60;

fn hessenberg<T: Scalar>(h: &mut Matrix<T>) -> Matrix<T> {
    let n = h.rows();
    let mut ort = vec![T::zero(); n];
    let high = n.saturating_sub(1);
    for m in 1..high {
        let scale: T = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == T::zero() {
            continue;
        }
        let mut hh = T::zero();
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh = hh + ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh = hh - ort[m] * g;
        ort[m] = ort[m] - g;
        for j in m..n {
            let mut f = T::zero();
            for i in (m..=high).rev() {
                f = f + ort[i] * h[(i, j)];
            }
            f = f / hh;
            for i in m..=high {
                h[(i, j)] = h[(i, j)] - f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = T::zero();
            for j in (m..=high).rev() {
                f = f + ort[j] * h[(i, j)];
            }
            f = f / hh;
            for j in m..=high {
                h[(i, j)] = h[(i, j)] - f * ort[j];
            }
        }
        ort[m] = scale * ort[m];
        h[(m, m - 1)] = scale * g;
    }

    let mut v = Matrix::identity(n);
    for m in (1..high).rev() {
        if h[(m, m - 1)] == T::zero() {
            continue;
        }
        for i in m + 1..=high {
            ort[i] = h[(i, m - 1)];
        }
        for j in m..=high {
            let mut g = T::zero();
            for i in m..=high {
                g = g + ort[i] * v[(i, j)];
            }
            g = (g / ort[m]) / h[(m, m - 1)];
            for i in m..=high {
                v[(i, j)] = v[(i, j)] + g * ort[i];
            }
        }
    }
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            h[(i, j)] = T::zero();
        }
    }
    v
}

/// Real Schur decomposition.
pub fn real_schur<T: Scalar>(m: &Matrix<T>) -> Result<RealSchur<T>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigenvalues of a {}x{} matrix", m.rows(), m.cols())));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eigenvalue input"));
    }
    let nn = m.rows();
    if nn == 0 {
        return Ok(RealSchur { q: Matrix::zeros(0, 0), s: Matrix::zeros(0, 0), eigenvalues: vec![] });
    }
    let mut h = m.clone();
    let mut v = hessenberg(&mut h);
    let mut d = vec![T::zero(); nn];
    let mut e = vec![T::zero(); nn];

    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut exshift = T::zero();
    let (mut p, mut q, mut r, mut s, mut z): (T, T, T, T, T);
    let (mut w, mut x, mut y);

    let mut norm = T::zero();
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm = norm + h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    let max_total = ITERATIONS_PER_EIGENVALUE * nn;

    while n >= 0 {
        let nu = n as usize;
        // look for a single small sub-diagonal element
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == T::zero() {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] = h[(nu, nu)] + exshift;
            d[nu] = h[(nu, nu)];
            e[nu] = T::zero();
            if nu > 0 {
                h[(nu, nu - 1)] = T::zero();
            }
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / two;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] = h[(nu, nu)] + exshift;
            h[(nu - 1, nu - 1)] = h[(nu - 1, nu - 1)] + exshift;
            x = h[(nu, nu)];
            if q >= T::zero() {
                z = if p >= T::zero() { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != T::zero() {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = T::zero();
                e[nu] = T::zero();
                x = h[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p = p / r;
                q = q / r;
                for j in nu - 1..nn {
                    z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                for i in 0..nn {
                    z = v[(i, nu - 1)];
                    v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                    v[(i, nu)] = q * v[(i, nu)] - p * z;
                }
                h[(nu, nu - 1)] = T::zero();
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = T::zero();
            w = T::zero();
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            // exceptional shifts
            if iter == 10 {
                exshift = exshift + x;
                for i in 0..=nu {
                    h[(i, i)] = h[(i, i)] - x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) / two;
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / two + s);
                    for i in 0..=nu {
                        h[(i, i)] = h[(i, i)] - s;
                    }
                    exshift = exshift + s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total_iter += 1;
            if total_iter > max_total {
                return Err(Error::NumericalFailure(format!(
                    "QR iteration did not converge after {total_iter} steps ({} eigenvalues unresolved)",
                    nu + 1
                )));
            }

            // look for two consecutive small sub-diagonal elements
            let mut mm = nu - 2;
            loop {
                z = h[(mm, mm)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(mm + 1, mm)] + h[(mm, mm + 1)];
                q = h[(mm + 1, mm + 1)] - z - r - s;
                r = h[(mm + 2, mm + 1)];
                s = p.abs() + q.abs() + r.abs();
                p = p / s;
                q = q / s;
                r = r / s;
                if mm == l {
                    break;
                }
                if h[(mm, mm - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(mm - 1, mm - 1)].abs() + z.abs() + h[(mm + 1, mm + 1)].abs()))
                {
                    break;
                }
                mm -= 1;
            }
            for i in mm + 2..=nu {
                h[(i, i - 2)] = T::zero();
                if i > mm + 2 {
                    h[(i, i - 3)] = T::zero();
                }
            }

            // double QR step on rows l..=n, columns mm..=n
            let mut k = mm;
            while k < nu {
                let notlast = k != nu - 1;
                if k != mm {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { T::zero() };
                    x = p.abs() + q.abs() + r.abs();
                    if x == T::zero() {
                        k += 1;
                        continue;
                    }
                    p = p / x;
                    q = q / x;
                    r = r / x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s != T::zero() {
                    if k != mm {
                        h[(k, k - 1)] = -s * x;
                    } else if l != mm {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p = p + s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q = q / p;
                    r = r / p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p = p + r * h[(k + 2, j)];
                            h[(k + 2, j)] = h[(k + 2, j)] - p * z;
                        }
                        h[(k, j)] = h[(k, j)] - p * x;
                        h[(k + 1, j)] = h[(k + 1, j)] - p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p = p + z * h[(i, k + 2)];
                            h[(i, k + 2)] = h[(i, k + 2)] - p * r;
                        }
                        h[(i, k)] = h[(i, k)] - p;
                        h[(i, k + 1)] = h[(i, k + 1)] - p * q;
                    }
                    for i in 0..nn {
                        p = x * v[(i, k)] + y * v[(i, k + 1)];
                        if notlast {
                            p = p + z * v[(i, k + 2)];
                            v[(i, k + 2)] = v[(i, k + 2)] - p * r;
                        }
                        v[(i, k)] = v[(i, k)] - p;
                        v[(i, k + 1)] = v[(i, k + 1)] - p * q;
                    }
                }
                k += 1;
            }
        }
        if h.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite value during QR iteration".into()));
        }
    }

    for i in 0..nn {
        for j in 0..i {
            let in_complex_block = j + 1 == i && e[j] != T::zero() && e[j] == -e[i];
            if !in_complex_block {
                h[(i, j)] = T::zero();
            }
        }
    }

    let eigenvalues = pair_conjugates(d.into_iter().zip(e).map(|(re, im)| Complex::new(re, im)).collect());
    Ok(RealSchur { q: v, s: h, eigenvalues })
}

/// Symmetrizes imaginary parts of conjugate pairs so pairing is exact.
fn pair_conjugates<T: Scalar>(mut ev: Vec<Complex<T>>) -> Vec<Complex<T>> {
    let mut i = 0;
    while i < ev.len() {
        if ev[i].im != T::zero() && i + 1 < ev.len() {
            let re = (ev[i].re + ev[i + 1].re) / T::lit(2.0);
            let im = (ev[i].im.abs() + ev[i + 1].im.abs()) / T::lit(2.0);
            ev[i] = Complex::new(re, im);
            ev[i + 1] = Complex::new(re, -im);
            i += 2;
        } else {
            i += 1;
        }
    }
    ev
}

/// Eigenvalues of a square matrix, conjugate pairs adjacent (positive imaginary part first).
pub fn eigenvalues<T: Scalar>(m: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    Ok(real_schur(m)?.eigenvalues)
}

/// Eigenvalues with a basis: eigenvectors when all eigenvalues are real and
/// well separated, the Schur vectors otherwise.
pub fn spectrum<T: Scalar>(m: &Matrix<T>) -> Result<Spectrum<T>> {
    let RealSchur { q, s, eigenvalues } = real_schur(m)?;
    let n = s.rows();
    let scale = s.max_abs().max(T::one());
    let sep_tol = T::epsilon().sqrt() * scale;
    let all_real = eigenvalues.iter().all(|z| z.im == T::zero());
    let separated = all_real
        && (0..n).all(|i| (i + 1..n).all(|j| (eigenvalues[i].re - eigenvalues[j].re).abs() > sep_tol));
    if !separated {
        return Ok(Spectrum { eigenvalues, basis: q, form: SpectralForm::RealSchur });
    }
    // eigenvectors of the triangular factor by back-substitution
    let mut x = Matrix::zeros(n, n);
    for k in 0..n {
        let lambda = s[(k, k)];
        x[(k, k)] = T::one();
        for i in (0..k).rev() {
            let acc: T = (i + 1..=k).map(|j| s[(i, j)] * x[(j, k)]).sum();
            x[(i, k)] = -acc / (s[(i, i)] - lambda);
        }
    }
    let mut basis = &q * &x;
    for k in 0..n {
        let norm: T = (0..n).map(|i| basis[(i, k)] * basis[(i, k)]).sum::<T>().sqrt();
        for i in 0..n {
            basis[(i, k)] = basis[(i, k)] / norm;
        }
    }
    let eigenvalues = (0..n).map(|k| Complex::new(s[(k, k)], T::zero())).collect();
    Ok(Spectrum { eigenvalues, basis, form: SpectralForm::Diagonalizable })
}
