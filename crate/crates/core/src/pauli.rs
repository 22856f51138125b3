//! Pauli strings on n qubits and their dense matrix realizations.
//!
//! Qubit 1 is the leftmost factor, so on two qubits `"IZ"` acts as Z on
//! qubit 2 and `"ZZ"` as Z on both. Strings serialize as compact text.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::invalid(format!("unknown Pauli symbol '{other}'"))),
        }
    }

    pub fn matrix(self) -> DMatrix<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let entries = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }

    /// Single-qubit product `self * other = phase * pauli`.
    fn mul(self, other: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (a, b) if a == b => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }
}

/// Tensor product of per-qubit Pauli factors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    factors: Vec<Pauli>,
}

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("Pauli string needs at least one factor"));
        }
        Ok(PauliString { factors })
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            factors: vec![Pauli::I; n_qubits.max(1)],
        }
    }

    /// Single non-identity factor `p` on `qubit` (0-based) of an n-qubit string.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::invalid(format!(
                "qubit index {qubit} out of range for {n_qubits} qubits"
            )));
        }
        let mut factors = vec![Pauli::I; n_qubits];
        factors[qubit] = p;
        PauliString::new(factors)
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    /// Hilbert-space dimension 2^n.
    pub fn dim(&self) -> usize {
        1 << self.factors.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|p| *p == Pauli::I)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.factors.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let mut m = self.factors[0].matrix();
        for p in &self.factors[1..] {
            m = m.kronecker(&p.matrix());
        }
        m
    }

    /// Product `self * other = phase * string`; the phase is in {±1, ±i}.
    pub fn product(&self, other: &PauliString) -> Result<(C64, PauliString)> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let mut phase = C64::new(1.0, 0.0);
        let mut factors = Vec::with_capacity(self.factors.len());
        for (a, b) in self.factors.iter().zip(&other.factors) {
            let (ph, p) = a.mul(*b);
            phase *= ph;
            factors.push(p);
        }
        Ok((phase, PauliString { factors }))
    }

    pub fn commutes_with(&self, other: &PauliString) -> Result<bool> {
        let (phase, _) = self.product(other)?;
        Ok(phase.im.abs() < 0.5)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.factors {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .chars()
            .map(Pauli::from_symbol)
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(factors)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All 4^n Pauli strings on `n_qubits`, in lexicographic (I, X, Y, Z) order.
pub fn all_pauli_strings(n_qubits: usize) -> impl Iterator<Item = PauliString> {
    let count = 4usize.pow(n_qubits as u32);
    (0..count).map(move |mut code| {
        let mut factors = vec![Pauli::I; n_qubits];
        for slot in factors.iter_mut().rev() {
            *slot = Pauli::ALL[code % 4];
            code /= 4;
        }
        PauliString { factors }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_roundtrip_and_order() {
        let zz: PauliString = "ZZ".parse().unwrap();
        assert_eq!(zz.to_string(), "ZZ");
        assert_eq!(zz.n_qubits(), 2);
        assert_eq!(zz.dim(), 4);
        let first: Vec<String> = all_pauli_strings(2).take(5).map(|p| p.to_string()).collect();
        assert_eq!(first, ["II", "IX", "IY", "IZ", "XI"]);
        assert_eq!(all_pauli_strings(2).count(), 16);
    }

    #[test]
    fn single_factor_placement() {
        let x2 = PauliString::single(2, 1, Pauli::X).unwrap();
        assert_eq!(x2.to_string(), "IX");
        assert!(PauliString::single(2, 2, Pauli::X).is_err());
    }

    #[test]
    fn products_carry_pauli_phases() {
        let x: PauliString = "X".parse().unwrap();
        let y: PauliString = "Y".parse().unwrap();
        let (phase, z) = x.product(&y).unwrap();
        assert_eq!(z.to_string(), "Z");
        assert!((phase - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(!x.commutes_with(&y).unwrap());

        let zz: PauliString = "ZZ".parse().unwrap();
        let ix: PauliString = "IX".parse().unwrap();
        assert!(!zz.commutes_with(&ix).unwrap());
        let xi: PauliString = "XI".parse().unwrap();
        assert!(ix.commutes_with(&xi).unwrap());
    }

    #[test]
    fn matrices_square_to_identity() {
        for p in all_pauli_strings(2) {
            let m = p.matrix();
            let sq = &m * &m;
            let id = DMatrix::<C64>::identity(4, 4);
            assert!((sq - id).norm() < 1e-14, "{p} squared is not identity");
        }
    }
}
