use super::Matrix;
use crate::scalar::Scalar;

/// Thin singular value decomposition `M = U · diag(σ) · Vᵀ`, σ sorted descending.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
}

const MAX_SWEEPS: usize = 80;

/// One-sided Jacobi SVD. Works on the taller orientation and transposes back.
pub fn svd<T: Scalar>(m: &Matrix<T>) -> Svd<T> {
    if m.rows() < m.cols() {
        let Svd { u, sigma, v } = svd(&m.transpose());
        return Svd { u: v, sigma, v: u };
    }
    let (rows, cols) = m.shape();
    // work column-major: a[j] is column j
    let mut a: Vec<Vec<T>> = (0..cols).map(|j| m.col_vec(j)).collect();
    let mut v: Vec<Vec<T>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..rows {
                    let (x, y) = (a[p][i], a[q][i]);
                    alpha = alpha + x * x;
                    beta = beta + y * y;
                    gamma = gamma + x * y;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<T> = a.iter().map(|col| col.iter().map(|&x| x * x).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap_or(std::cmp::Ordering::Equal));

    let u = Matrix::from_fn(rows, cols, |i, k| {
        let j = order[k];
        if sigma[j] > T::zero() {
            a[j][i] / sigma[j]
        } else {
            T::zero()
        }
    });
    let vm = Matrix::from_fn(cols, cols, |i, k| v[order[k]][i]);
    sigma = order.iter().map(|&j| sigma[j]).collect();
    Svd { u, sigma, v: vm }
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Default singular-value cutoff: `max(rows, cols) · ε · σ_max`.
pub fn default_cutoff<T: Scalar>(rows: usize, cols: usize, sigma_max: T) -> T {
    T::from_usize_lossy(rows.max(cols)) * T::epsilon() * sigma_max
}

/// Moore–Penrose pseudoinverse with the default cutoff.
pub fn pinv<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    pinv_with_cutoff(m, None)
}

/// Moore–Penrose pseudoinverse; singular values at or below `cutoff` are treated as zero.
pub fn pinv_with_cutoff<T: Scalar>(m: &Matrix<T>, cutoff: Option<T>) -> Matrix<T> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Matrix::zeros(cols, rows);
    }
    let Svd { u, sigma, v } = svd(m);
    let smax = sigma.first().copied().unwrap_or_else(T::zero);
    let tau = cutoff.unwrap_or_else(|| default_cutoff(rows, cols, smax));
    let k = sigma.len();
    let mut out = Matrix::zeros(cols, rows);
    for (idx, &s) in sigma.iter().enumerate().take(k) {
        if s <= tau || s == T::zero() {
            continue;
        }
        let inv = T::one() / s;
        for i in 0..cols {
            let vi = v[(i, idx)] * inv;
            if vi == T::zero() {
                continue;
            }
            for j in 0..rows {
                out[(i, j)] = out[(i, j)] + vi * u[(j, idx)];
            }
        }
    }
    out
}

/// Numerical rank under the default cutoff.
pub fn rank<T: Scalar>(m: &Matrix<T>) -> usize {
    let s = svd(m).sigma;
    let smax = s.first().copied().unwrap_or_else(T::zero);
    let tau = default_cutoff(m.rows(), m.cols(), smax);
    s.iter().filter(|&&x| x > tau).count()
}

/// Spectral norm (largest singular value).
pub fn norm_2<T: Scalar>(m: &Matrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    svd(m).sigma[0]
}
