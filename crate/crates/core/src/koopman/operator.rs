use std::io::{self, BufRead, Write};

use rayon::prelude::*;

use super::dictionary::{Atom, Dictionary};
use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::numkit::{pinv_with_cutoff, Matrix};
use crate::scalar::Scalar;
use crate::signals::{noise_rng, Disturbances};
use crate::sim::{sample_outputs, SimGrid, Simulator};

/// Linear map `u(t) = ⟨K, Φ(t)⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct KoopmanOperator<T> {
    dictionary: Dictionary<T>,
    k: Vec<T>,
}

impl<T: Scalar> KoopmanOperator<T> {
    pub fn new(dictionary: Dictionary<T>, k: Vec<T>) -> Result<Self> {
        if k.len() != dictionary.len() {
            return Err(Error::Contract(format!("K has {} entries, dictionary has {} atoms", k.len(), dictionary.len())));
        }
        Ok(Self { dictionary, k })
    }

    pub fn dictionary(&self) -> &Dictionary<T> {
        &self.dictionary
    }

    pub fn coefficients(&self) -> &[T] {
        &self.k
    }

    #[inline]
    pub fn apply(&self, t: T) -> T {
        self.k.iter().enumerate().map(|(i, &k)| k * self.dictionary.eval_atom(i, t)).sum()
    }

    /// CSV `atom,coefficient`, one row per atom in dictionary order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "atom,coefficient")?;
        for (a, k) in self.dictionary.atoms().iter().zip(&self.k) {
            writeln!(w, "{a},{k}")?;
        }
        Ok(())
    }

    /// Reads coefficients written by [`write_csv`](Self::write_csv); the atom column must match `dictionary`.
    pub fn read_csv<R: BufRead>(dictionary: Dictionary<T>, r: R) -> Result<Self> {
        let mut k = Vec::with_capacity(dictionary.len());
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "atom,coefficient" => {}
            _ => return Err(Error::Contract("K file must start with the header 'atom,coefficient'".into())),
        }
        for (idx, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Contract(format!("reading K file: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let (atom, value) = line
                .split_once(',')
                .ok_or_else(|| Error::Contract(format!("K file line {}: expected 'atom,coefficient'", idx + 2)))?;
            let atom: Atom = atom.parse()?;
            if dictionary.atoms().get(k.len()) != Some(&atom) {
                return Err(Error::Contract(format!("K file line {}: atom {atom} does not match the dictionary", idx + 2)));
            }
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Contract(format!("K file line {}: bad coefficient '{}'", idx + 2, value.trim())))?;
            if !v.is_finite() {
                return Err(Error::NonFinite("K coefficient"));
            }
            k.push(T::lit(v));
        }
        Self::new(dictionary, k)
    }
}

/// `⟨K, Φ(t)⟩`.
pub fn apply_operator<T: Scalar>(op: &KoopmanOperator<T>, t: T) -> T {
    op.apply(t)
}

/// Plant responses to every atom, sampled at `t_1 … t_j`, and the desired samples.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputMatrix<T> {
    /// `atoms x j`.
    pub rows: Matrix<T>,
    pub desired: Vec<T>,
    pub sample_times: Vec<T>,
}

impl<T: Scalar> OutputMatrix<T> {
    pub fn new(rows: Matrix<T>, desired: Vec<T>, sample_times: Vec<T>) -> Result<Self> {
        if rows.cols() != desired.len() || desired.len() != sample_times.len() {
            return Err(Error::Dimension(format!(
                "output matrix is {:?} with {} desired samples at {} times",
                rows.shape(),
                desired.len(),
                sample_times.len()
            )));
        }
        Ok(Self { rows, desired, sample_times })
    }

    /// Same responses against a scaled desired row.
    pub fn with_desired(&self, desired: Vec<T>) -> Result<Self> {
        Self::new(self.rows.clone(), desired, self.sample_times.clone())
    }
}

/// Sample times `t_1 + (i−1)·spacing`, `i = 1..=count`.
pub fn sample_times<T: Scalar>(t1: T, count: usize, spacing: T) -> Vec<T> {
    (0..count).map(|i| t1 + T::from_usize_lossy(i) * spacing).collect()
}

pub(crate) fn check_times<T: Scalar>(times: &[T]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Contract("no sample times".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Contract("sample times must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Rows are simulated independently; row `i` draws its disturbances from stream `i` of `seed`.
pub(crate) fn collect_with<T: Scalar>(
    sim: &Simulator<T>,
    dict: &Dictionary<T>,
    times: &[T],
    dist: &Disturbances<T>,
    seed: u64,
) -> Result<OutputMatrix<T>> {
    let x0 = vec![T::zero(); sim.order()];
    let rows: Vec<Vec<T>> = (0..dict.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = noise_rng(seed, i as u64);
            let traj = sim.run(|t| dict.eval_atom(i, t), dist, &x0, &mut rng)?;
            sample_outputs(&traj, times)
        })
        .enumerate()
        .map(|(row, r)| r.map_err(|e| Error::Row { row, source: Box::new(e) }))
        .collect::<Result<_>>()?;
    let mut o = Matrix::zeros(dict.len(), times.len());
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            o[(i, j)] = v;
        }
    }
    let desired = times.iter().map(|&t| dict.base().eval_unchecked(t, 0)).collect();
    OutputMatrix::new(o, desired, times.to_vec())
}

pub fn collect_output_matrix<T: Scalar>(
    ss: &StateSpace<T>,
    dict: &Dictionary<T>,
    times: &[T],
    dist: &Disturbances<T>,
    grid: SimGrid<T>,
    seed: u64,
) -> Result<OutputMatrix<T>> {
    check_times(times)?;
    dist.validate()?;
    let sim = Simulator::new(ss, grid)?;
    collect_with(&sim, dict, times, dist, seed)
}

/// Minimum-norm least-squares coefficients and the attained residual `‖O_d − KᵀO‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Identification<T> {
    pub k: Vec<T>,
    pub residual: T,
}

/// `K = (O†)ᵀ O_dᵀ` with the default SVD cutoff.
pub fn identify_k<T: Scalar>(om: &OutputMatrix<T>) -> Result<Identification<T>> {
    identify_k_with_cutoff(om, None)
}

pub fn identify_k_with_cutoff<T: Scalar>(om: &OutputMatrix<T>, cutoff: Option<T>) -> Result<Identification<T>> {
    if !om.rows.is_finite() || om.desired.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("output matrix"));
    }
    let pinv = pinv_with_cutoff(&om.rows, cutoff);
    let k = pinv.transpose().mul_vec(&om.desired);
    let residual = residual(om, &k);
    Ok(Identification { k, residual })
}

/// `‖O_d − KᵀO‖₂`.
pub fn residual<T: Scalar>(om: &OutputMatrix<T>, k: &[T]) -> T {
    let fit = om.rows.transpose().mul_vec(k);
    om.desired.iter().zip(&fit).map(|(&d, &f)| (d - f) * (d - f)).sum::<T>().sqrt()
}
