use super::StateSpace;
use crate::error::{Error, Result};
use crate::numkit::{poly_eval_matrix, Matrix};
use crate::scalar::Scalar;

/// Output/internal decomposition `z = T x = (ξ, η)`:
///
/// ```text
/// ξ̇ = A1 ξ + A2 η + B1 u + G1 w     ξ = (y_e, ẏ_e, …, y_e^{(r−1)})
/// η̇ = A3 y_e + A4 η + G2 w
/// ```
///
/// `A1` is the integrator chain with last row `rᵀ`, `A2` is zero except its
/// last row `sᵀ`, `B1 = (0, …, 0, k)ᵀ`. `A4` is the companion matrix of the
/// transfer-function numerator, so its eigenvalues are the plant zeros.
#[derive(Debug, Clone)]
pub struct NormalForm<T> {
    pub r: usize,
    pub a1: Matrix<T>,
    pub a2: Matrix<T>,
    /// `(n − r) x 1`.
    pub a3: Matrix<T>,
    pub a4: Matrix<T>,
    pub r_vec: Vec<T>,
    pub s_vec: Vec<T>,
    pub k: T,
    pub g: T,
    /// Disturbance gains on the ξ chain; `(0, …, 0, g)` when `G` shares the input's relative degree.
    pub g1: Vec<T>,
    pub g2: Matrix<T>,
    pub transform: Matrix<T>,
    transform_inv: Matrix<T>,
}

impl<T: Scalar> NormalForm<T> {
    pub fn xi_dim(&self) -> usize {
        self.r
    }

    pub fn eta_dim(&self) -> usize {
        self.a4.rows()
    }

    pub fn order(&self) -> usize {
        self.transform.rows()
    }

    pub fn transform_inv(&self) -> &Matrix<T> {
        &self.transform_inv
    }

    /// Plant dynamics matrix in the original coordinates, `T⁻¹ Ā T`.
    pub fn plant_matrix(&self) -> Result<Matrix<T>> {
        let abar = self.as_state_space()?;
        Ok(&(&self.transform_inv * abar.a()) * &self.transform)
    }

    /// Original state from normal-form coordinates.
    pub fn to_state(&self, xi: &[T], eta: &[T]) -> Vec<T> {
        let z: Vec<T> = xi.iter().chain(eta).copied().collect();
        self.transform_inv.mul_vec(&z)
    }

    /// `(ξ, η)` from an original state.
    pub fn from_state(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let mut z = self.transform.mul_vec(x);
        let eta = z.split_off(self.r);
        (z, eta)
    }

    /// Reassembles a state-space model in `(ξ, η)` coordinates from the stored blocks.
    pub fn as_state_space(&self) -> Result<StateSpace<T>> {
        let (r, m) = (self.r, self.eta_dim());
        let n = r + m;
        let mut a = Matrix::zeros(n, n);
        a.set_block(0, 0, &self.a1);
        a.set_block(0, r, &self.a2);
        a.set_block(r, r, &self.a4);
        for i in 0..m {
            a[(r + i, 0)] = self.a3[(i, 0)];
        }
        let mut b = Matrix::zeros(n, 1);
        b[(r - 1, 0)] = self.k;
        let mut g = Matrix::zeros(n, 1);
        for (i, &v) in self.g1.iter().enumerate() {
            g[(i, 0)] = v;
        }
        g.set_block(r, 0, &self.g2);
        let mut c = Matrix::zeros(1, n);
        c[(0, 0)] = T::one();
        StateSpace::new(a, b, c, g)
    }
}

/// Computes the normal form.
///
/// The internal coordinates are `η_i = w₁ A^{i−1} x` with `w₁ = (C/k)·p_b(A)⁻¹`,
/// `p_b` the monic numerator; this makes `η` the zero dynamics driven only by `y_e`.
pub fn normal_form<T: Scalar>(ss: &StateSpace<T>) -> Result<NormalForm<T>> {
    let tf = ss.to_transfer()?;
    let n = ss.order();
    let r = tf.relative_degree();
    let m = n - r;
    let k = tf.gain;
    let a = ss.a();

    let markov = ss.markov_rows(r);
    let mut rows: Vec<Matrix<T>> = markov.clone();
    if m > 0 {
        let pb = poly_eval_matrix(&tf.numerator, a);
        let rhs = ss.c().transpose().scale(T::one() / k);
        let w1 = pb
            .transpose()
            .solve(&rhs)
            .map_err(|_| Error::TransformationFailure("numerator polynomial of A is singular (pole-zero cancellation)".into()))?
            .transpose();
        let mut w = w1;
        for _ in 0..m {
            let next = &w * a;
            rows.push(w);
            w = next;
        }
    }
    let refs: Vec<&Matrix<T>> = rows.iter().collect();
    let transform = Matrix::vstack(&refs);
    let transform_inv = transform
        .inverse()
        .map_err(|_| Error::TransformationFailure("change of basis is singular".into()))?;

    let abar = &(&transform * a) * &transform_inv;
    let bbar = &transform * ss.b();
    let gbar = &transform * ss.g();

    let scale = abar.max_abs().max(T::one());
    let tol = T::lit(1e-8) * scale;
    let check = |ok: bool, what: &str| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::TransformationFailure(format!("{what} does not have normal-form structure")))
        }
    };

    let a1 = abar.block(0, 0, r, r);
    let a2 = abar.block(0, r, r, m);
    let a3_full = abar.block(r, 0, m, r);
    let a4 = abar.block(r, r, m, m);

    for i in 0..r.saturating_sub(1) {
        for j in 0..r {
            let want = if j == i + 1 { T::one() } else { T::zero() };
            check((a1[(i, j)] - want).abs() <= tol, "A1")?;
        }
        for j in 0..m {
            check(a2[(i, j)].abs() <= tol, "A2")?;
        }
    }
    for i in 0..m {
        for j in 1..r {
            check(a3_full[(i, j)].abs() <= tol, "A3")?;
        }
    }
    for i in 0..r - 1 {
        check(bbar[(i, 0)].abs() <= tol * k.abs().max(T::one()), "B1")?;
    }
    for i in 0..m {
        check(bbar[(r + i, 0)].abs() <= tol * k.abs().max(T::one()), "internal input gain")?;
    }

    let mut a1 = a1;
    let mut a2 = a2;
    for i in 0..r.saturating_sub(1) {
        for j in 0..r {
            a1[(i, j)] = if j == i + 1 { T::one() } else { T::zero() };
        }
        for j in 0..m {
            a2[(i, j)] = T::zero();
        }
    }
    let r_vec = a1.row_slice(r - 1).to_vec();
    let s_vec = a2.row_slice(r - 1).to_vec();
    let a3 = a3_full.block(0, 0, m, 1);
    let g1: Vec<T> = (0..r).map(|i| gbar[(i, 0)]).collect();
    let g2 = gbar.block(r, 0, m, 1);

    Ok(NormalForm {
        r,
        a1,
        a2,
        a3,
        a4,
        r_vec,
        s_vec,
        k,
        g: g1[r - 1],
        g1,
        g2,
        transform,
        transform_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::eigenvalues;

    #[test]
    fn benchmark_normal_form() {
        let nf = normal_form(&StateSpace::<f64>::benchmark_plant()).unwrap();
        assert_eq!(nf.r, 2);
        assert_eq!(nf.eta_dim(), 2);
        assert!((nf.k - 1.0).abs() < 1e-12);
        assert!((nf.g - 1.0).abs() < 1e-12);
        let mut ev: Vec<f64> = eigenvalues(&nf.a4).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 2.0).abs() < 1e-10 && (ev[1] - 1.0).abs() < 1e-10);
        // internal dynamics driven through the last coordinate by y/k
        assert!(nf.a3[(0, 0)].abs() < 1e-10);
        assert!((nf.a3[(1, 0)] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_relative_degree_has_no_internal_dynamics() {
        let ss = StateSpace::<f64>::from_slices(
            &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -6.0, -11.0, -6.0],
            &[0.0, 0.0, 2.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0],
        )
        .unwrap();
        let nf = normal_form(&ss).unwrap();
        assert_eq!(nf.r, 3);
        assert_eq!(nf.eta_dim(), 0);
        assert_eq!(nf.a4.shape(), (0, 0));
        assert!((nf.k - 2.0).abs() < 1e-12);
        assert!((nf.r_vec[0] + 6.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_lag() {
        let ss = StateSpace::from_slices(&[-1.0], &[1.0], &[1.0], &[1.0]).unwrap();
        let nf = normal_form(&ss).unwrap();
        assert_eq!((nf.r, nf.eta_dim()), (1, 0));
        assert_eq!(nf.k, 1.0);
        assert_eq!(nf.r_vec, vec![-1.0]);
    }

    #[test]
    fn pole_zero_cancellation_fails() {
        // (s + 1) / ((s + 1)(s + 2)) realised in controllable form
        let ss = StateSpace::from_slices(&[0.0, 1.0, -2.0, -3.0], &[0.0, 1.0], &[1.0, 1.0], &[0.0, 1.0]).unwrap();
        assert!(matches!(normal_form(&ss), Err(Error::TransformationFailure(_))));
    }

    #[test]
    fn coordinates_round_trip() {
        let nf = normal_form(&StateSpace::<f64>::benchmark_plant()).unwrap();
        let x = [0.3, -1.0, 2.0, 0.5];
        let (xi, eta) = nf.from_state(&x);
        let back = nf.to_state(&xi, &eta);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        // ξ₁ is the output
        assert!((xi[0] - (-2.0 * 0.3 - 1.0 + 2.0)).abs() < 1e-12);
    }
}
