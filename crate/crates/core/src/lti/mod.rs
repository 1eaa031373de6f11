//! SISO plant representation and structural analysis.

mod normal_form;
mod split;

use num_complex::Complex;

pub use normal_form::{normal_form, NormalForm};
pub use split::{hyperbolic_split, HyperbolicSplit};

use crate::error::{Error, Result};
use crate::numkit::{poly_roots, resolvent, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_RELATIVE_DEGREE_TOL: f64 = 1e-9;
pub const DEFAULT_HYPERBOLIC_MARGIN: f64 = 1e-6;

/// `ẋ = A x + B u + G w`, `y = C x + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace<T> {
    a: Matrix<T>,
    b: Matrix<T>,
    c: Matrix<T>,
    g: Matrix<T>,
}

impl<T: Scalar> StateSpace<T> {
    pub fn new(a: Matrix<T>, b: Matrix<T>, c: Matrix<T>, g: Matrix<T>) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() || n == 0 {
            return Err(Error::Dimension(format!("A must be square and non-empty, got {:?}", a.shape())));
        }
        if b.shape() != (n, 1) {
            return Err(Error::Dimension(format!("B must be {n}x1, got {:?}", b.shape())));
        }
        if c.shape() != (1, n) {
            return Err(Error::Dimension(format!("C must be 1x{n}, got {:?}", c.shape())));
        }
        if g.shape() != (n, 1) {
            return Err(Error::Dimension(format!("G must be {n}x1, got {:?}", g.shape())));
        }
        if !(a.is_finite() && b.is_finite() && c.is_finite() && g.is_finite()) {
            return Err(Error::NonFinite("state-space matrices"));
        }
        Ok(Self { a, b, c, g })
    }

    /// Builds a plant from plain slices: `a` row-major `n x n`, vectors of length `n`.
    pub fn from_slices(a: &[T], b: &[T], c: &[T], g: &[T]) -> Result<Self> {
        let n = b.len();
        Self::new(
            Matrix::from_row_slice(n, n, a)?,
            Matrix::from_row_slice(n, 1, b)?,
            Matrix::from_row_slice(1, n, c)?,
            Matrix::from_row_slice(n, 1, g)?,
        )
    }

    /// Controllable-canonical plant with numerator `s² + s − 2` over
    /// `s⁴ + 3.5s³ + 5.5s² + 4s + 1`, disturbance entering with the input.
    pub fn benchmark_plant() -> Self {
        let l = T::lit;
        let a = [
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            -1.0, -4.0, -5.5, -3.5,
        ]
        .map(l);
        let b = [0.0, 0.0, 0.0, 1.0].map(l);
        let c = [-2.0, 1.0, 1.0, 0.0].map(l);
        Self::from_slices(&a, &b, &c, &b).expect("benchmark plant is well formed")
    }

    pub fn order(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }

    pub fn c(&self) -> &Matrix<T> {
        &self.c
    }

    pub fn g(&self) -> &Matrix<T> {
        &self.g
    }

    /// Similarity transform `x' = P x`.
    pub fn transformed(&self, p: &Matrix<T>) -> Result<Self> {
        let pinv = p.inverse()?;
        Self::new(&(p * &self.a) * &pinv, p * &self.b, &self.c * &pinv, p * &self.g)
    }

    /// Row vectors `C·A^i` for `i = 0..count`.
    pub(crate) fn markov_rows(&self, count: usize) -> Vec<Matrix<T>> {
        let mut rows = Vec::with_capacity(count);
        let mut cur = self.c.clone();
        for _ in 0..count {
            let next = &cur * &self.a;
            rows.push(cur);
            cur = next;
        }
        rows
    }

    /// Smallest `r ≥ 1` with `|C·A^{r−1}·B| > tol · ‖C‖‖B‖·max(1, ‖A‖)^{r−1}`.
    pub fn relative_degree(&self, tol: T) -> Result<usize> {
        let n = self.order();
        let base = self.c.norm_fro() * self.b.norm_fro();
        let growth = self.a.norm_fro().max(T::one());
        let mut scale = base;
        for (i, row) in self.markov_rows(n).iter().enumerate() {
            let markov = (row * &self.b)[(0, 0)];
            if markov.abs() > tol * scale {
                return Ok(i + 1);
            }
            scale = scale * growth;
        }
        Err(Error::DegenerateSystem { order: n })
    }

    /// Transfer function `C(sI − A)⁻¹B` via the Leverrier–Faddeev resolvent recursion.
    pub fn to_transfer(&self) -> Result<TransferFunction<T>> {
        let r = self.relative_degree(T::lit(DEFAULT_RELATIVE_DEGREE_TOL))?;
        let res = resolvent(&self.a)?;
        let full: Vec<T> = res.adjugates.iter().map(|nk| (&(&self.c * nk) * &self.b)[(0, 0)]).collect();
        // CN_kB vanishes for k < r − 1 and equals C·A^{r−1}·B at k = r − 1
        let gain = (&self.markov_rows(r)[r - 1] * &self.b)[(0, 0)];
        let numerator: Vec<T> = full[r - 1..].iter().enumerate().map(|(i, &v)| if i == 0 { T::one() } else { v / gain }).collect();
        Ok(TransferFunction { gain, numerator, denominator: res.char_poly })
    }

    pub fn zeros(&self) -> Result<Vec<Complex<T>>> {
        poly_roots(&self.to_transfer()?.numerator)
    }

    pub fn poles(&self) -> Result<Vec<Complex<T>>> {
        poly_roots(&resolvent(&self.a)?.char_poly)
    }

    /// Phase class; rejects zeros on (or within `margin` of) the imaginary axis and
    /// poles that are not strictly stable.
    pub fn classify_phase(&self, margin: T) -> Result<Phase> {
        for p in self.poles()? {
            if p.re >= -margin {
                return Err(Error::UnstablePlant { re: p.re.to_f64_lossy(), im: p.im.to_f64_lossy(), margin: margin.to_f64_lossy() });
            }
        }
        let mut nmp = false;
        for z in self.zeros()? {
            if z.re.abs() <= margin {
                return Err(Error::BoundaryZero { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy(), margin: margin.to_f64_lossy() });
            }
            nmp |= z.re > margin;
        }
        Ok(if nmp { Phase::NonMinimumPhase } else { Phase::MinimumPhase })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    MinimumPhase,
    NonMinimumPhase,
}

/// `k · (s^{n−r} + b_{n−r−1}s^{n−r−1} + … + b_0) / (s^n + a_{n−1}s^{n−1} + … + a_0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction<T> {
    pub gain: T,
    /// Monic numerator, descending powers, length `n − r + 1`.
    pub numerator: Vec<T>,
    /// Monic denominator, descending powers, length `n + 1`.
    pub denominator: Vec<T>,
}

impl<T: Scalar> TransferFunction<T> {
    /// `b_0 .. b_{n−r−1}` in ascending order.
    pub fn b(&self) -> Vec<T> {
        self.numerator[1..].iter().rev().copied().collect()
    }

    /// `a_0 .. a_{n−1}` in ascending order.
    pub fn a(&self) -> Vec<T> {
        self.denominator[1..].iter().rev().copied().collect()
    }

    pub fn relative_degree(&self) -> usize {
        self.denominator.len() - self.numerator.len()
    }

    /// Frequency response at `s = jω`.
    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        use crate::numkit::poly_eval;
        poly_eval(&self.numerator, s) / poly_eval(&self.denominator, s) * self.gain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_lag() -> StateSpace<f64> {
        StateSpace::from_slices(&[-1.0], &[1.0], &[1.0], &[1.0]).unwrap()
    }

    fn chain(n: usize) -> StateSpace<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n - 1 {
            a[i * n + i + 1] = 1.0;
        }
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        let mut c = vec![0.0; n];
        c[0] = 1.0;
        StateSpace::from_slices(&a, &b, &c, &b).unwrap()
    }

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        let key = |z: &Complex<f64>| ((z.re * 1e6).round(), (z.im * 1e6).round());
        v.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        v
    }

    #[test]
    fn relative_degrees() {
        assert_eq!(StateSpace::<f64>::benchmark_plant().relative_degree(1e-9).unwrap(), 2);
        assert_eq!(scalar_lag().relative_degree(1e-9).unwrap(), 1);
        assert_eq!(chain(4).relative_degree(1e-9).unwrap(), 4);
    }

    #[test]
    fn degenerate_system() {
        let ss = StateSpace::from_slices(&[-1.0, 0.0, 0.0, -2.0], &[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!(matches!(ss.relative_degree(1e-9), Err(Error::DegenerateSystem { order: 2 })));
    }

    #[test]
    fn benchmark_transfer_function() {
        let tf = StateSpace::<f64>::benchmark_plant().to_transfer().unwrap();
        assert!((tf.gain - 1.0).abs() < 1e-12);
        for (got, want) in tf.numerator.iter().zip([1.0, 1.0, -2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in tf.denominator.iter().zip([1.0, 3.5, 5.5, 4.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(tf.b().len(), 2);
        assert!((tf.b()[0] + 2.0).abs() < 1e-12);
        assert_eq!(tf.relative_degree(), 2);
    }

    #[test]
    fn simple_transfer_functions() {
        let tf = scalar_lag().to_transfer().unwrap();
        assert_eq!(tf.numerator, vec![1.0]);
        assert_eq!(tf.denominator, vec![1.0, 1.0]);
        let tf = chain(2).to_transfer().unwrap();
        assert_eq!(tf.gain, 1.0);
        assert_eq!(tf.denominator, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn benchmark_zeros_and_poles() {
        let ss = StateSpace::<f64>::benchmark_plant();
        let z = sorted(ss.zeros().unwrap());
        assert!((z[0].re + 2.0).abs() < 1e-10 && (z[1].re - 1.0).abs() < 1e-10);
        let p = sorted(ss.poles().unwrap());
        let want = [(-1.0, -1.0), (-1.0, 0.0), (-1.0, 1.0), (-0.5, 0.0)];
        for (got, (re, im)) in p.iter().zip(want) {
            assert!((got.re - re).abs() < 1e-8 && (got.im - im).abs() < 1e-8, "{got}");
        }
        assert_eq!(ss.classify_phase(1e-6).unwrap(), Phase::NonMinimumPhase);
    }

    #[test]
    fn lag_is_minimum_phase() {
        let ss = scalar_lag();
        assert!(ss.zeros().unwrap().is_empty());
        assert_eq!(ss.poles().unwrap().len(), 1);
        assert_eq!(ss.classify_phase(1e-6).unwrap(), Phase::MinimumPhase);
    }

    #[test]
    fn zero_at_origin_is_rejected() {
        // numerator s, denominator s² + 3s + 2
        let ss = StateSpace::from_slices(&[0.0, 1.0, -2.0, -3.0], &[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert!(matches!(ss.classify_phase(1e-6), Err(Error::BoundaryZero { .. })));
    }

    #[test]
    fn unstable_plant_is_rejected() {
        let ss = StateSpace::from_slices(&[0.5], &[1.0], &[1.0], &[1.0]).unwrap();
        assert!(matches!(ss.classify_phase(1e-6), Err(Error::UnstablePlant { .. })));
    }

    #[test]
    fn construction_checks_dimensions() {
        let a = Matrix::<f64>::identity(2);
        let bad = StateSpace::new(a.clone(), Matrix::zeros(3, 1), Matrix::zeros(1, 2), Matrix::zeros(2, 1));
        assert!(matches!(bad, Err(Error::Dimension(_))));
    }
}
