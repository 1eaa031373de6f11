use rayon::prelude::*;

use super::dictionary::Dictionary;
use super::operator::{check_times, collect_with, OutputMatrix};
use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::numkit::Matrix;
use crate::scalar::Scalar;
use crate::signals::Disturbances;
use crate::sim::{SimGrid, Simulator};

/// Stride between per-trial seeds (the Mersenne prime 2⁶¹ − 1).
pub const TRIAL_SEED_STRIDE: u64 = (1 << 61) - 1;

pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add((trial as u64).wrapping_mul(TRIAL_SEED_STRIDE))
}

#[derive(Debug, Clone)]
pub struct MonteCarloReport<T> {
    pub trials: usize,
    /// Entrywise mean `Ō` over trials.
    pub mean: OutputMatrix<T>,
    /// Entrywise sample standard deviation of a single trial (zero for one trial).
    pub deviation: Matrix<T>,
    pub seeds: Vec<u64>,
}

impl<T: Scalar> MonteCarloReport<T> {
    /// Largest per-entry deviation; the variance bound `V̂` behind the concentration check.
    pub fn max_deviation(&self) -> T {
        self.deviation.max_abs()
    }
}

/// `n_mc` independent output matrices averaged in trial order.
pub fn monte_carlo_collect<T: Scalar>(
    ss: &StateSpace<T>,
    dict: &Dictionary<T>,
    times: &[T],
    dist: &Disturbances<T>,
    grid: SimGrid<T>,
    n_mc: usize,
    seed: u64,
) -> Result<MonteCarloReport<T>> {
    if n_mc == 0 {
        return Err(Error::Contract("Monte Carlo needs at least one trial".into()));
    }
    dist.validate()?;
    check_times(times)?;
    let sim = Simulator::new(ss, grid)?;
    let seeds: Vec<u64> = (0..n_mc).map(|n| trial_seed(seed, n)).collect();
    let trials: Vec<OutputMatrix<T>> = seeds
        .par_iter()
        .map(|&s| collect_with(&sim, dict, times, dist, s))
        .enumerate()
        .map(|(trial, r)| r.map_err(|e| Error::Trial { trial, source: Box::new(e) }))
        .collect::<Result<_>>()?;

    let (m, j) = trials[0].rows.shape();
    let n = T::from_usize_lossy(n_mc);
    let mut sum = Matrix::zeros(m, j);
    for o in &trials {
        sum = &sum + &o.rows;
    }
    let mean = sum.scale(T::one() / n);
    let mut deviation: Matrix<T> = Matrix::zeros(m, j);
    if n_mc > 1 {
        let mut ss_dev: Matrix<T> = Matrix::zeros(m, j);
        for o in &trials {
            let d = &o.rows - &mean;
            for a in 0..m {
                for b in 0..j {
                    ss_dev[(a, b)] = ss_dev[(a, b)] + d[(a, b)] * d[(a, b)];
                }
            }
        }
        let denom = T::from_usize_lossy(n_mc - 1);
        for a in 0..m {
            for b in 0..j {
                deviation[(a, b)] = (ss_dev[(a, b)] / denom).sqrt();
            }
        }
    }
    let first = trials.into_iter().next().expect("at least one trial");
    Ok(MonteCarloReport {
        trials: n_mc,
        mean: OutputMatrix::new(mean, first.desired, first.sample_times)?,
        deviation,
        seeds,
    })
}

/// Chebyshev radius `σ̂/√(N·p)` with `σ̂ = V̂·√(entries)`: with probability at least `1 − p`
/// the averaged matrix stays within this max-entry distance of its expectation.
pub fn chebyshev_radius<T: Scalar>(v_hat: T, entries: usize, trials: usize, p: T) -> T {
    let sigma = v_hat * T::from_usize_lossy(entries).sqrt();
    sigma / (T::from_usize_lossy(trials) * p).sqrt()
}
