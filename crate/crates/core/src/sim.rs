//! Fixed-step simulation of the disturbed plant with exact zero-order-hold steps.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::numkit::{mat_exp, Matrix};
use crate::scalar::Scalar;
use crate::signals::{sample_disturbance, Disturbances, NoiseRng};

/// Uniform time grid `0, h, 2h, …, t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid<T> {
    step: T,
    steps: usize,
}

impl<T: Scalar> SimGrid<T> {
    pub fn new(step: T, t_end: T) -> Result<Self> {
        if !(step > T::zero() && step.is_finite()) || !(t_end > T::zero() && t_end.is_finite()) {
            return Err(Error::Contract(format!("grid needs positive step and horizon, got h = {step}, t_end = {t_end}")));
        }
        let ratio = t_end / step;
        let steps = ratio.round();
        if (ratio - steps).abs() > T::lit(1e-6) * ratio.max(T::one()) {
            return Err(Error::Contract(format!("t_end = {t_end} is not a multiple of h = {step}")));
        }
        Ok(Self { step, steps: steps.to_usize().unwrap_or(0) })
    }

    /// Smallest grid of step `h` whose horizon covers `t_min`.
    pub fn covering(step: T, t_min: T) -> Result<Self> {
        let k = (t_min / step - T::lit(1e-9)).ceil().max(T::one());
        Self::new(step, k * step)
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_end(&self) -> T {
        self.time(self.steps)
    }

    #[inline]
    pub fn time(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.step
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Simulated time series. `y = y_e + h` at every grid time.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub grid: SimGrid<T>,
    pub times: Vec<T>,
    /// Row-major `len x n` state history.
    pub states: Vec<T>,
    pub order: usize,
    pub inputs: Vec<T>,
    /// Disturbance-free output `C x`.
    pub y_clean: Vec<T>,
    /// Measured output including the output disturbance.
    pub y: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[T] {
        &self.states[k * self.order..(k + 1) * self.order]
    }

    /// CSV with columns `time,u,y_e,y`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time,u,y_e,y")?;
        for k in 0..self.len() {
            writeln!(w, "{},{},{},{}", self.times[k], self.inputs[k], self.y_clean[k], self.y[k])?;
        }
        Ok(())
    }
}

/// Plant discretized on a fixed grid; reusable across many inputs.
#[derive(Debug, Clone)]
pub struct Simulator<T> {
    grid: SimGrid<T>,
    n: usize,
    phi: Vec<T>,
    gamma_b: Vec<T>,
    gamma_g: Vec<T>,
    c: Vec<T>,
}

impl<T: Scalar> Simulator<T> {
    /// Exact ZOH discretization from `exp([[A, B, G], [0, 0, 0]]·h)`.
    pub fn new(ss: &StateSpace<T>, grid: SimGrid<T>) -> Result<Self> {
        let n = ss.order();
        let mut aug = Matrix::zeros(n + 2, n + 2);
        aug.set_block(0, 0, ss.a());
        aug.set_block(0, n, ss.b());
        aug.set_block(0, n + 1, ss.g());
        let e = mat_exp(&aug, grid.step())?;
        Ok(Self {
            grid,
            n,
            phi: e.block(0, 0, n, n).as_slice().to_vec(),
            gamma_b: e.block(0, n, n, 1).as_slice().to_vec(),
            gamma_g: e.block(0, n + 1, n, 1).as_slice().to_vec(),
            c: ss.c().as_slice().to_vec(),
        })
    }

    pub fn grid(&self) -> SimGrid<T> {
        self.grid
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Runs the plant under `input`; inputs and disturbances are held over each step.
    pub fn run<F>(&self, input: F, dist: &Disturbances<T>, x0: &[T], rng: &mut NoiseRng) -> Result<Trajectory<T>>
    where
        F: Fn(T) -> T,
    {
        let n = self.n;
        if x0.len() != n {
            return Err(Error::Dimension(format!("initial state has length {}, plant order is {n}", x0.len())));
        }
        let len = self.grid.len();
        let mut traj = Trajectory {
            grid: self.grid,
            times: Vec::with_capacity(len),
            states: Vec::with_capacity(len * n),
            order: n,
            inputs: Vec::with_capacity(len),
            y_clean: Vec::with_capacity(len),
            y: Vec::with_capacity(len),
        };
        let mut x = x0.to_vec();
        let mut next = vec![T::zero(); n];
        for k in 0..len {
            let t = self.grid.time(k);
            let u = input(t);
            let ye: T = self.c.iter().zip(&x).map(|(&c, &xi)| c * xi).sum();
            let h = sample_disturbance(&dist.output, rng, ye);
            traj.times.push(t);
            traj.states.extend_from_slice(&x);
            traj.inputs.push(u);
            traj.y_clean.push(ye);
            traj.y.push(ye + h);
            if k + 1 == len {
                break;
            }
            let w = sample_disturbance(&dist.input, rng, u);
            for i in 0..n {
                let row = &self.phi[i * n..(i + 1) * n];
                let acc: T = row.iter().zip(&x).map(|(&a, &b)| a * b).sum();
                next[i] = acc + self.gamma_b[i] * u + self.gamma_g[i] * w;
            }
            std::mem::swap(&mut x, &mut next);
            if x.iter().any(|v| !v.is_finite()) || !u.is_finite() {
                return Err(Error::Divergence { time: self.grid.time(k + 1).to_f64_lossy() });
            }
        }
        Ok(traj)
    }
}

/// One-shot simulation; see [`Simulator::run`].
pub fn simulate<T, F>(
    ss: &StateSpace<T>,
    input: F,
    dist: &Disturbances<T>,
    grid: SimGrid<T>,
    x0: &[T],
    rng: &mut NoiseRng,
) -> Result<Trajectory<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    Simulator::new(ss, grid)?.run(input, dist, x0, rng)
}

/// Measured output at the requested times, linearly interpolated between grid points.
pub fn sample_outputs<T: Scalar>(traj: &Trajectory<T>, times: &[T]) -> Result<Vec<T>> {
    sample_series(&traj.grid, &traj.y, times)
}

pub(crate) fn sample_series<T: Scalar>(grid: &SimGrid<T>, series: &[T], times: &[T]) -> Result<Vec<T>> {
    let h = grid.step();
    let last = series.len() - 1;
    let snap = T::lit(1e-9);
    times
        .iter()
        .map(|&t| {
            let pos = t / h;
            if !(pos >= -snap) || pos > T::from_usize_lossy(last) + snap {
                return Err(Error::Range { time: t.to_f64_lossy(), horizon: grid.t_end().to_f64_lossy() });
            }
            let nearest = pos.round();
            if (pos - nearest).abs() <= snap {
                return Ok(series[nearest.to_usize().unwrap_or(0).min(last)]);
            }
            let k = pos.floor().to_usize().unwrap_or(0).min(last - 1);
            let frac = pos - T::from_usize_lossy(k);
            Ok(series[k] + (series[k + 1] - series[k]) * frac)
        })
        .collect()
}

/// Max and RMS of `|y − y_d|` over grid times inside `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ErrorMetrics<T> {
    pub max: T,
    pub rms: T,
    pub samples: usize,
}

pub fn steady_state_error<T, F>(traj: &Trajectory<T>, y_d: F, start: T, end: T) -> Result<ErrorMetrics<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let tol = traj.grid.step() * T::lit(1e-6);
    let (mut max, mut sq, mut samples) = (T::zero(), T::zero(), 0usize);
    for (k, &t) in traj.times.iter().enumerate() {
        if t + tol < start || t > end + tol {
            continue;
        }
        let e = (traj.y[k] - y_d(t)).abs();
        max = max.max(e);
        sq = sq + e * e;
        samples += 1;
    }
    if samples == 0 {
        return Err(Error::Contract(format!(
            "steady-state window [{start}, {end}] contains no samples of a run ending at {}",
            traj.grid.t_end()
        )));
    }
    Ok(ErrorMetrics { max, rms: (sq / T::from_usize_lossy(samples)).sqrt(), samples })
}
