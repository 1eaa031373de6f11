use crate::error::{Error, Result};
use crate::numkit::{eigenvalues, svd, Matrix};
use crate::scalar::Scalar;

/// Real similarity `basis⁻¹ · A4 · basis = blockdiag(A4−, A4+)`.
#[derive(Debug, Clone)]
pub struct HyperbolicSplit<T> {
    pub basis: Matrix<T>,
    pub basis_inv: Matrix<T>,
    /// All eigenvalues with real part below `−margin`.
    pub stable: Matrix<T>,
    /// All eigenvalues with real part above `+margin`.
    pub unstable: Matrix<T>,
}

impl<T: Scalar> HyperbolicSplit<T> {
    pub fn dims(&self) -> (usize, usize) {
        (self.stable.rows(), self.unstable.rows())
    }

    pub fn dim(&self) -> usize {
        self.stable.rows() + self.unstable.rows()
    }

    /// `blockdiag(A4−, A4+)`.
    pub fn block_form(&self) -> Matrix<T> {
        Matrix::block_diag(&self.stable, &self.unstable)
    }
}

const SIGN_MAX_ITER: usize = 100;

/// Matrix sign function by scaled Newton iteration.
fn matrix_sign<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    let mut s = a.clone();
    let tol = T::lit(100.0) * T::from_usize_lossy(n) * T::epsilon();
    let half = T::lit(0.5);
    for _ in 0..SIGN_MAX_ITER {
        let inv = s.inverse()?;
        let det = s.determinant()?.abs();
        let mu = if det > T::zero() && det.is_finite() {
            det.powf(-T::one() / T::from_usize_lossy(n))
        } else {
            T::one()
        };
        let next = (&s.scale(mu) + &inv.scale(T::one() / mu)).scale(half);
        let change = (&next - &s).norm_fro();
        let size = next.norm_fro();
        s = next;
        if change <= tol * size {
            return Ok(s);
        }
        if change <= T::epsilon().sqrt() * size {
            // quadratic convergence: one more unscaled step settles it
            let inv = s.inverse()?;
            return Ok((&s + &inv).scale(half));
        }
    }
    Err(Error::NumericalFailure("matrix sign iteration did not converge".into()))
}

/// Orthonormal basis of the range of a projector of known rank, sign-normalized per column.
fn range_basis<T: Scalar>(p: &Matrix<T>, rank: usize) -> Matrix<T> {
    let n = p.rows();
    let mut u = svd(p).u.block(0, 0, n, rank);
    for j in 0..rank {
        let (mut best, mut val) = (0, T::zero());
        for i in 0..n {
            if u[(i, j)].abs() > val.abs() + T::epsilon() {
                best = i;
                val = u[(i, j)];
            }
        }
        if u[(best, j)] < T::zero() {
            for i in 0..n {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
    u
}

/// Separates the internal dynamics into strictly stable and strictly antistable blocks.
///
/// Spectral projectors come from the matrix sign function; the basis is
/// `[range(P−) | range(P+)]` with orthonormal columns inside each block.
pub fn hyperbolic_split<T: Scalar>(a4: &Matrix<T>, margin: T) -> Result<HyperbolicSplit<T>> {
    if !a4.is_square() {
        return Err(Error::Dimension("hyperbolic split of a non-square matrix".into()));
    }
    let n = a4.rows();
    let ev = eigenvalues(a4)?;
    for z in &ev {
        if z.re.abs() <= margin {
            return Err(Error::HyperbolicityViolation { re: z.re.to_f64_lossy(), margin: margin.to_f64_lossy() });
        }
    }
    let n_stable = ev.iter().filter(|z| z.re < T::zero()).count();
    if n == 0 || n_stable == n || n_stable == 0 {
        let empty = Matrix::zeros(0, 0);
        let (stable, unstable) = if n_stable == n { (a4.clone(), empty) } else { (empty, a4.clone()) };
        return Ok(HyperbolicSplit { basis: Matrix::identity(n), basis_inv: Matrix::identity(n), stable, unstable });
    }

    let sign = matrix_sign(a4)?;
    let id = Matrix::identity(n);
    let p_stable = (&id - &sign).scale(T::lit(0.5));
    let p_unstable = (&id + &sign).scale(T::lit(0.5));
    let vs = range_basis(&p_stable, n_stable);
    let vu = range_basis(&p_unstable, n - n_stable);
    let basis = Matrix::hstack(&[&vs, &vu]);
    let basis_inv = basis.inverse()?;
    let block = &(&basis_inv * a4) * &basis;

    let off = block.block(0, n_stable, n_stable, n - n_stable).max_abs()
        .max(block.block(n_stable, 0, n - n_stable, n_stable).max_abs());
    if off > T::lit(1e-8) * a4.norm_fro().max(T::one()) {
        return Err(Error::NumericalFailure(format!("block decoupling residual {off}")));
    }
    let stable = block.block(0, 0, n_stable, n_stable);
    let unstable = block.block(n_stable, n_stable, n - n_stable, n - n_stable);
    Ok(HyperbolicSplit { basis, basis_inv, stable, unstable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{normal_form, StateSpace};

    #[test]
    fn diagonal_split_uses_identity_basis() {
        let sp = hyperbolic_split(&Matrix::<f64>::diag(&[-2.0, 1.0]), 1e-6).unwrap();
        assert_eq!(sp.dims(), (1, 1));
        assert!((&sp.basis - &Matrix::identity(2)).max_abs() < 1e-12);
        assert!((sp.stable[(0, 0)] + 2.0).abs() < 1e-12);
        assert!((sp.unstable[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn benchmark_internal_dynamics() {
        let nf = normal_form(&StateSpace::<f64>::benchmark_plant()).unwrap();
        let sp = hyperbolic_split(&nf.a4, 1e-6).unwrap();
        assert_eq!(sp.dims(), (1, 1));
        assert!((sp.stable[(0, 0)] + 2.0).abs() < 1e-10);
        assert!((sp.unstable[(0, 0)] - 1.0).abs() < 1e-10);
        let recon = &(&sp.basis * &sp.block_form()) * &sp.basis_inv;
        assert!((&recon - &nf.a4).max_abs() < 1e-10);
    }

    #[test]
    fn all_stable() {
        let a = Matrix::from_rows(&[vec![-1.0, 3.0], vec![0.0, -2.0]]).unwrap();
        let sp = hyperbolic_split(&a, 1e-6).unwrap();
        assert_eq!(sp.dims(), (2, 0));
        assert!(sp.unstable.is_empty());
    }

    #[test]
    fn complex_pairs_split() {
        // eigenvalues −1 ± 2i and 0.5 ± i
        let a = Matrix::<f64>::from_rows(&[
            vec![-1.0, 2.0, 0.3, 0.1],
            vec![-2.0, -1.0, 0.0, 0.4],
            vec![0.0, 0.0, 0.5, 1.0],
            vec![0.0, 0.0, -1.0, 0.5],
        ])
        .unwrap();
        let sp = hyperbolic_split(&a, 1e-6).unwrap();
        assert_eq!(sp.dims(), (2, 2));
        assert!(eigenvalues(&sp.stable).unwrap().iter().all(|z| (z.re + 1.0).abs() < 1e-10));
        assert!(eigenvalues(&sp.unstable).unwrap().iter().all(|z| (z.re - 0.5).abs() < 1e-10));
    }

    #[test]
    fn axis_eigenvalue_rejected() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(hyperbolic_split(&a, 1e-6), Err(Error::HyperbolicityViolation { .. })));
    }
}
