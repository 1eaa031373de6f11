//! Model-based stable inversion.
//!
//! The bounded internal state solves `η̇ = A4 η + A3 y_d` in both time
//! directions at once: the stable block is integrated forward from the past,
//! the antistable block backward from the future. Truncating that bilateral
//! integral to a window of half-width `N·Δt` and replacing it with a
//! trapezoidal sum gives `η̂_N`, and the feedforward input follows from the
//! last row of the output chain.

use crate::error::{Error, Result};
use crate::lti::{HyperbolicSplit, NormalForm};
use crate::numkit::{eigenvalues, mat_exp, norm_2, Matrix};
use crate::scalar::Scalar;
use crate::signals::SignalSpec;

/// Half-width of the symmetric sampling interval used to fit decay constants.
pub const DECAY_FIT_HORIZON: f64 = 20.0;
const DECAY_FIT_POINTS: usize = 400;

/// Green's kernel of the split internal dynamics.
///
/// `t > 0`: `blockdiag(e^{A−t}, 0)`; `t < 0`: `blockdiag(0, −e^{A+t})`; `t = 0`: `blockdiag(I, 0)`.
pub fn phi_kernel<T: Scalar>(split: &HyperbolicSplit<T>, t: T) -> Result<Matrix<T>> {
    let (ns, nu) = split.dims();
    let mut out = Matrix::zeros(ns + nu, ns + nu);
    if t >= T::zero() {
        out.set_block(0, 0, &mat_exp(&split.stable, t)?);
    } else {
        out.set_block(ns, ns, &-&mat_exp(&split.unstable, t)?);
    }
    Ok(out)
}

/// `‖e^{Mt}‖₂ ≤ κ e^{−αt}` for a Hurwitz block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDecay<T> {
    pub alpha: T,
    pub kappa: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEstimates<T> {
    /// Slowest decay rate of the kernel, `min(α₁, α₂)`.
    pub alpha: T,
    /// Transient amplification: sampled sup of `‖φ(t)‖·e^{α|t|}`.
    pub kappa: T,
    pub stable: Option<BlockDecay<T>>,
    pub unstable: Option<BlockDecay<T>>,
}

fn sample_times<T: Scalar>() -> impl Iterator<Item = T> {
    let h = T::lit(DECAY_FIT_HORIZON / DECAY_FIT_POINTS as f64);
    (0..=DECAY_FIT_POINTS).map(move |i| T::from_usize_lossy(i) * h)
}

/// Decay constants of a Hurwitz matrix: α is the spectral-abscissa margin,
/// κ the sampled sup of `‖e^{Mt}‖₂·e^{αt}` over `[0, DECAY_FIT_HORIZON]`.
pub fn block_decay<T: Scalar>(m: &Matrix<T>) -> Result<BlockDecay<T>> {
    let abscissa = eigenvalues(m)?.iter().map(|z| z.re).fold(T::neg_infinity(), T::max);
    if !(abscissa < T::zero()) {
        return Err(Error::NumericalFailure(format!("decay constants need a Hurwitz matrix, abscissa {abscissa}")));
    }
    let alpha = -abscissa;
    let mut kappa = T::zero();
    for t in sample_times::<T>() {
        kappa = kappa.max(norm_2(&mat_exp(m, t)?) * (alpha * t).exp());
    }
    Ok(BlockDecay { alpha, kappa })
}

pub fn decay_constants<T: Scalar>(split: &HyperbolicSplit<T>) -> Result<DecayEstimates<T>> {
    let stable = if split.stable.is_empty() { None } else { Some(block_decay(&split.stable)?) };
    let unstable = if split.unstable.is_empty() { None } else { Some(block_decay(&-&split.unstable)?) };
    let alpha = [stable, unstable].iter().flatten().map(|b| b.alpha).fold(T::infinity(), T::min);
    let mut kappa = T::zero();
    if alpha.is_finite() {
        for t in sample_times::<T>() {
            for s in [t, -t] {
                kappa = kappa.max(norm_2(&phi_kernel(split, s)?) * (alpha * t).exp());
            }
        }
    }
    Ok(DecayEstimates { alpha, kappa, stable, unstable })
}

/// Trapezoidal window of the bilateral integral, precomputed as shift weights:
/// `η̂_N(t) = Σₖ Sₖ·y_d(t − kΔt) + Σₖ Uₖ·y_d(t + kΔt)`, `k = 0..=N`.
#[derive(Debug, Clone)]
pub struct EtaWindow<T> {
    half_width: usize,
    dt: T,
    /// Weights in split coordinates, one `(n−r)`-vector per shift.
    past: Vec<Vec<T>>,
    future: Vec<Vec<T>>,
    basis: Matrix<T>,
}

impl<T: Scalar> EtaWindow<T> {
    pub fn new(nf: &NormalForm<T>, split: &HyperbolicSplit<T>, half_width: usize, dt: T) -> Result<Self> {
        if half_width == 0 || !(dt > T::zero()) {
            return Err(Error::Contract(format!("window needs N ≥ 1 and Δt > 0, got N = {half_width}, Δt = {dt}")));
        }
        if split.dim() != nf.eta_dim() {
            return Err(Error::Dimension("split does not match the internal dynamics".into()));
        }
        let (ns, nu) = split.dims();
        let a3 = split.basis_inv.mul_vec(&nf.a3.col_vec(0));
        let (a3s, a3u) = a3.split_at(ns);
        let m = ns + nu;
        let mut past = Vec::with_capacity(half_width + 1);
        let mut future = Vec::with_capacity(half_width + 1);
        let step_s = mat_exp(&split.stable, dt)?;
        let step_u = mat_exp(&split.unstable, -dt)?;
        let mut ps = Matrix::identity(ns);
        let mut pu = Matrix::identity(nu);
        for k in 0..=half_width {
            let w = if k == 0 || k == half_width { dt * T::lit(0.5) } else { dt };
            let mut s = vec![T::zero(); m];
            for (i, v) in ps.mul_vec(a3s).into_iter().enumerate() {
                s[i] = v * w;
            }
            let mut u = vec![T::zero(); m];
            for (i, v) in pu.mul_vec(a3u).into_iter().enumerate() {
                u[ns + i] = -v * w;
            }
            past.push(s);
            future.push(u);
            ps = &ps * &step_s;
            pu = &pu * &step_u;
        }
        Ok(Self { half_width, dt, past, future, basis: split.basis.clone() })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// `η̂_N(t)` in split coordinates.
    pub fn eval_split(&self, y_d: &SignalSpec<T>, t: T) -> Vec<T> {
        let m = self.basis.rows();
        let mut acc = vec![T::zero(); m];
        for k in 0..=self.half_width {
            let off = T::from_usize_lossy(k) * self.dt;
            let back = y_d.eval_unchecked(t - off, 0);
            let ahead = y_d.eval_unchecked(t + off, 0);
            for i in 0..m {
                acc[i] = acc[i] + self.past[k][i] * back + self.future[k][i] * ahead;
            }
        }
        acc
    }

    /// `η̂_N(t)` in normal-form coordinates.
    pub fn eval(&self, y_d: &SignalSpec<T>, t: T) -> Vec<T> {
        self.basis.mul_vec(&self.eval_split(y_d, t))
    }
}

/// Windowed, discretized internal state `η̂_N(t)` (disturbance-free).
pub fn eta_hat<T: Scalar>(
    nf: &NormalForm<T>,
    split: &HyperbolicSplit<T>,
    y_d: &SignalSpec<T>,
    half_width: usize,
    dt: T,
    t: T,
) -> Result<Vec<T>> {
    Ok(EtaWindow::new(nf, split, half_width, dt)?.eval(y_d, t))
}

fn check_gain<T: Scalar>(k: T) -> Result<()> {
    if k.abs() <= T::lit(1e-12) || !k.is_finite() {
        return Err(Error::SingularGain(k.to_f64_lossy()));
    }
    Ok(())
}

/// `û(t) = (y_d^{(r)} − rᵀξ_d − sᵀη) / k` with `ξ_d = (y_d, …, y_d^{(r−1)})`.
pub fn feedforward_input<T, F>(nf: &NormalForm<T>, y_d: &SignalSpec<T>, eta: F, t: T) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> Vec<T>,
{
    check_gain(nf.k)?;
    let mut u = y_d.eval(t, nf.r)?;
    for (i, &ri) in nf.r_vec.iter().enumerate() {
        u = u - ri * y_d.eval(t, i)?;
    }
    if nf.eta_dim() > 0 {
        let e = eta(t);
        for (&si, &ei) in nf.s_vec.iter().zip(&e) {
            u = u - si * ei;
        }
    }
    Ok(u / nf.k)
}

/// Ready-to-simulate stable inverse of one plant for one trajectory.
#[derive(Debug, Clone)]
pub struct StableInverse<T> {
    nf: NormalForm<T>,
    window: Option<EtaWindow<T>>,
    y_d: SignalSpec<T>,
}

impl<T: Scalar> StableInverse<T> {
    pub fn new(nf: NormalForm<T>, split: &HyperbolicSplit<T>, y_d: SignalSpec<T>, half_width: usize, dt: T) -> Result<Self> {
        check_gain(nf.k)?;
        if nf.r > crate::signals::MAX_DERIVATIVE_ORDER {
            return Err(Error::Capability(format!("relative degree {} exceeds derivative support", nf.r)));
        }
        let window = if nf.eta_dim() > 0 { Some(EtaWindow::new(&nf, split, half_width, dt)?) } else { None };
        Ok(Self { nf, window, y_d })
    }

    pub fn normal_form(&self) -> &NormalForm<T> {
        &self.nf
    }

    pub fn eta(&self, t: T) -> Vec<T> {
        match &self.window {
            Some(w) => w.eval(&self.y_d, t),
            None => Vec::new(),
        }
    }

    pub fn input(&self, t: T) -> T {
        let nf = &self.nf;
        let yd = &self.y_d;
        let mut u = yd.eval_unchecked(t, nf.r);
        for (i, &ri) in nf.r_vec.iter().enumerate() {
            u = u - ri * yd.eval_unchecked(t, i);
        }
        if let Some(w) = &self.window {
            for (&si, ei) in nf.s_vec.iter().zip(w.eval(yd, t)) {
                u = u - si * ei;
            }
        }
        u / nf.k
    }

    /// Initial state with `ξ = ξ_d(t0)` and `η = η̂_N(t0)`.
    pub fn matched_state(&self, t0: T) -> Vec<T> {
        let xi: Vec<T> = (0..self.nf.r).map(|i| self.y_d.eval_unchecked(t0, i)).collect();
        self.nf.to_state(&xi, &self.eta(t0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBoundReport<T> {
    pub alpha: T,
    /// `2M‖A3‖·max(κ₁/α₁, κ₂/α₂)`.
    pub beta: T,
    /// `‖G2‖·(κ₁/α₁ + κ₂/α₂)`.
    pub gamma: T,
    /// `(κ₃/α₃)(‖s‖γ + |g|)`, gain from `sup|w|` to the steady tracking error.
    pub delta: T,
    /// `β·e^{−αNΔt}`.
    pub window_term: T,
    pub plant_decay: BlockDecay<T>,
}

/// Numeric constants of the window-truncation and disturbance bounds.
pub fn error_bound<T: Scalar>(
    nf: &NormalForm<T>,
    split: &HyperbolicSplit<T>,
    y_d_bound: T,
    half_width: usize,
    dt: T,
) -> Result<ErrorBoundReport<T>> {
    let decay = decay_constants(split)?;
    let ratios: Vec<T> = [decay.stable, decay.unstable].iter().flatten().map(|b| b.kappa / b.alpha).collect();
    let a3 = split.basis_inv.mul_vec(&nf.a3.col_vec(0));
    let g2 = split.basis_inv.mul_vec(&nf.g2.col_vec(0));
    let vnorm = |v: &[T]| v.iter().map(|&x| x * x).sum::<T>().sqrt();

    let max_ratio = ratios.iter().copied().fold(T::zero(), T::max);
    let sum_ratio: T = ratios.iter().copied().sum();
    let beta = T::lit(2.0) * y_d_bound * vnorm(&a3) * max_ratio;
    let gamma = vnorm(&g2) * sum_ratio;
    let window_term = if beta == T::zero() {
        T::zero()
    } else {
        beta * (-decay.alpha * T::from_usize_lossy(half_width) * dt).exp()
    };

    let plant_decay = block_decay(&nf.plant_matrix()?)?;
    let delta = plant_decay.kappa / plant_decay.alpha * (vnorm(&nf.s_vec) * gamma + nf.g.abs());
    Ok(ErrorBoundReport { alpha: decay.alpha, beta, gamma, delta, window_term, plant_decay })
}
