use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signals::{SignalSpec, MAX_DERIVATIVE_ORDER};

/// One dictionary function of the desired output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    /// `y_d(t + d·Δt)`.
    Shift(i64),
    /// `y_d^{(i)}(t)`, `i ≥ 1`.
    Derivative(usize),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Shift(d) => write!(f, "shift:{d:+}"),
            Atom::Derivative(i) => write!(f, "deriv:{i}"),
        }
    }
}

impl FromStr for Atom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Contract(format!("unrecognized atom descriptor '{s}'"));
        let (kind, arg) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "shift" => arg.parse().map(Atom::Shift).map_err(|_| bad()),
            "deriv" => match arg.parse() {
                Ok(i) if i >= 1 => Ok(Atom::Derivative(i)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

/// Ordered atom list `Φ` built on one desired output.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary<T> {
    half_width: usize,
    dt: T,
    derivatives: usize,
    atoms: Vec<Atom>,
    base: SignalSpec<T>,
}

/// `2N` shifts with offsets `(N−1)Δt` down to `−NΔt`, then derivatives `1..=r`.
pub fn build_dictionary<T: Scalar>(y_d: SignalSpec<T>, half_width: usize, dt: T, r: usize) -> Result<Dictionary<T>> {
    if half_width == 0 || !(dt > T::zero() && dt.is_finite()) || r == 0 {
        return Err(Error::Contract(format!("dictionary needs N ≥ 1, Δt > 0, r ≥ 1; got N = {half_width}, Δt = {dt}, r = {r}")));
    }
    if r > MAX_DERIVATIVE_ORDER {
        return Err(Error::Capability(format!("{r} derivative atoms exceed the supported order {MAX_DERIVATIVE_ORDER}")));
    }
    let n = half_width as i64;
    let atoms = (-n..n).rev().map(Atom::Shift).chain((1..=r).map(Atom::Derivative)).collect();
    Ok(Dictionary { half_width, dt, derivatives: r, atoms, base: y_d })
}

impl<T: Scalar> Dictionary<T> {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn derivatives(&self) -> usize {
        self.derivatives
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn base(&self) -> &SignalSpec<T> {
        &self.base
    }

    /// Value of atom `i` at `t`.
    #[inline]
    pub fn eval_atom(&self, i: usize, t: T) -> T {
        match self.atoms[i] {
            Atom::Shift(d) => self.base.eval_unchecked(t + T::lit(d as f64) * self.dt, 0),
            Atom::Derivative(k) => self.base.eval_unchecked(t, k),
        }
    }

    /// `Φ(t)`.
    pub fn evaluate(&self, t: T) -> Vec<T> {
        (0..self.len()).map(|i| self.eval_atom(i, t)).collect()
    }

    /// Same atoms on a different desired output.
    pub fn with_base(&self, base: SignalSpec<T>) -> Self {
        Self { base, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_dictionary_layout() {
        let d = build_dictionary(SignalSpec::sinusoid(1.0, 0.1, 0.0), 20, 0.5, 2).unwrap();
        assert_eq!(d.len(), 42);
        assert_eq!(d.atoms()[0], Atom::Shift(19));
        assert_eq!(d.atoms()[39], Atom::Shift(-20));
        assert_eq!(d.atoms()[40], Atom::Derivative(1));
        assert_eq!(d.atoms()[41], Atom::Derivative(2));
        // offsets +9.5 … −10 match y_d(t + 10 − 0.5 i), i = 1..40
        for i in 1..=40 {
            let want = (0.1f64 * (3.0 + 10.0 - 0.5 * i as f64)).sin();
            assert!((d.eval_atom(i - 1, 3.0) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn minimal_dictionary() {
        let d = build_dictionary(SignalSpec::sinusoid(1.0, 1.0, 0.0), 1, 0.1, 1).unwrap();
        assert_eq!(d.atoms(), &[Atom::Shift(0), Atom::Shift(-1), Atom::Derivative(1)]);
        assert_eq!(d.eval_atom(0, 0.7), 0.7f64.sin());
    }

    #[test]
    fn contract_violations() {
        assert!(build_dictionary(SignalSpec::<f64>::zero(), 0, 0.5, 2).is_err());
        assert!(build_dictionary(SignalSpec::<f64>::zero(), 2, 0.0, 2).is_err());
        assert!(build_dictionary(SignalSpec::<f64>::zero(), 2, 0.5, 0).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        for a in [Atom::Shift(19), Atom::Shift(0), Atom::Shift(-20), Atom::Derivative(2)] {
            assert_eq!(a.to_string().parse::<Atom>().unwrap(), a);
        }
        assert_eq!(Atom::Shift(3).to_string(), "shift:+3");
        assert!("deriv:0".parse::<Atom>().is_err());
        assert!("lag:1".parse::<Atom>().is_err());
    }
}
