//! Dense Hermitian operators and the normalized trace inner product
//! `A . B = tr(AB) / dim`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{all_pauli_strings, PauliString};

/// Maximum entrywise deviation from the conjugate transpose.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Coefficients below this are dropped from Pauli decompositions.
pub const DECOMPOSE_TOL: f64 = 1e-12;

/// Dense Hermitian matrix acting on a 2^n-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
}

fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

impl HermitianOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::invalid(format!(
                "operator must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                defect,
                tol: HERMITICITY_TOL,
            });
        }
        Ok(HermitianOperator { matrix })
    }

    /// Skips the Hermiticity check; for results that are Hermitian by
    /// construction (commutators of Hermitian inputs, unitary conjugation).
    pub(crate) fn new_unchecked(matrix: DMatrix<C64>) -> Self {
        debug_assert!(hermiticity_defect(&matrix) < 1e-9 * (1.0 + matrix.norm()));
        HermitianOperator { matrix }
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOperator {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_pauli(p: &PauliString) -> Self {
        HermitianOperator { matrix: p.matrix() }
    }

    /// Real linear combination of Pauli strings on `n_qubits`.
    pub fn from_pauli_terms(n_qubits: usize, terms: &[(PauliString, f64)]) -> Result<Self> {
        let dim = 1usize << n_qubits;
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for (p, c) in terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
            m += p.matrix() * C64::new(*c, 0.0);
        }
        Ok(HermitianOperator { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Norm induced by the normalized trace inner product.
    pub fn norm(&self) -> f64 {
        (self.matrix.norm_squared() / self.dim() as f64).sqrt()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() < tol
    }

    pub fn scale(&self, factor: f64) -> Self {
        HermitianOperator {
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    /// `U^dagger self U`.
    pub fn conjugated_by(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: u.nrows(),
            });
        }
        Ok(HermitianOperator::new_unchecked(
            u.adjoint() * &self.matrix * u,
        ))
    }

    /// Coefficients over the Pauli-string basis; entries below
    /// [`DECOMPOSE_TOL`] are dropped. The dimension must be a power of two.
    pub fn pauli_decompose(&self) -> Result<BTreeMap<PauliString, f64>> {
        let n = qubit_count(self.dim())?;
        let mut map = BTreeMap::new();
        for p in all_pauli_strings(n) {
            let c = inner_raw(&self.matrix, &p.matrix(), self.dim());
            if c.abs() > DECOMPOSE_TOL {
                map.insert(p, c);
            }
        }
        Ok(map)
    }
}

pub(crate) fn qubit_count(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() {
        return Err(Error::invalid(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// `tr(AB)/dim` for Hermitian A, B; real by symmetry.
fn inner_raw(a: &DMatrix<C64>, b: &DMatrix<C64>, dim: usize) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    debug_assert!(acc.im.abs() < 1e-9 * (1.0 + acc.re.abs()));
    acc.re / dim as f64
}

/// Normalized trace inner product `tr(VW)/dim`.
pub fn inner_product(v: &HermitianOperator, w: &HermitianOperator) -> Result<f64> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            left: v.dim(),
            right: w.dim(),
        });
    }
    Ok(inner_raw(&v.matrix, &w.matrix, v.dim()))
}

/// `i[A, B]`; Hermitian and traceless when A and B are.
pub fn commutator_i(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let prod = &a.matrix * &b.matrix;
    let comm = (&prod - prod.adjoint()) * C64::new(0.0, 1.0);
    Ok(HermitianOperator::new_unchecked(comm))
}

/// `AB + BA`.
pub fn anticommutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let prod = &a.matrix * &b.matrix;
    let anti = &prod + prod.adjoint();
    Ok(HermitianOperator::new_unchecked(anti))
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        HermitianOperator {
            matrix: -&self.matrix,
        }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    fn op(s: &str) -> HermitianOperator {
        HermitianOperator::from_pauli(&s.parse().unwrap())
    }

    #[test]
    fn inner_product_on_pauli_strings() {
        // Pauli strings square to identity; distinct strings are orthogonal.
        let z2 = op("IZ");
        let x2 = op("IX");
        let zz = op("ZZ");
        assert!((inner_product(&z2, &z2).unwrap() - 1.0).abs() < 1e-14);
        assert!(inner_product(&x2, &z2).unwrap().abs() < 1e-14);
        assert!((inner_product(&zz, &zz).unwrap() - 1.0).abs() < 1e-14);
        assert!(inner_product(&z2, &op("Z")).is_err());
    }

    #[test]
    fn commutators_of_paulis() {
        let x2 = op("IX");
        let z2 = op("IZ");
        let y2 = op("IY");
        let got = commutator_i(&x2, &z2).unwrap();
        assert!((&got - &y2.scale(2.0)).norm() < 1e-14);
        assert!(commutator_i(&z2, &z2).unwrap().is_zero(1e-14));
        // i[Z1Z2, X2] = -2 Z1Y2 by the single-factor algebra i[Z, X] = -2Y.
        let got = commutator_i(&op("ZZ"), &x2).unwrap();
        assert!((&got - &op("ZY").scale(-2.0)).norm() < 1e-14);
    }

    #[test]
    fn anticommutators_of_paulis() {
        assert!(anticommutator(&op("IX"), &op("IZ")).unwrap().is_zero(1e-14));
        let got = anticommutator(&op("IZ"), &op("IZ")).unwrap();
        assert!((&got - &HermitianOperator::identity(4).scale(2.0)).norm() < 1e-14);
        // Commuting factors on different qubits: {X2, Y1} = 2 Y1X2.
        let got = anticommutator(&op("IX"), &op("YI")).unwrap();
        assert!((&got - &op("YX").scale(2.0)).norm() < 1e-14);
    }

    #[test]
    fn decompose_recovers_hamiltonian_coefficients() {
        // Omega X2 + (E1+E2)/2 Z2 + (E1-E2)/2 Z1Z2 at Omega=1, E1=0.5, E2=1.
        let h = HermitianOperator::from_pauli_terms(
            2,
            &[
                ("IX".parse().unwrap(), 1.0),
                ("IZ".parse().unwrap(), 0.75),
                ("ZZ".parse().unwrap(), -0.25),
            ],
        )
        .unwrap();
        let map = h.pauli_decompose().unwrap();
        assert_eq!(map.len(), 3);
        assert!((map[&"IX".parse::<PauliString>().unwrap()] - 1.0).abs() < 1e-14);
        assert!((map[&"IZ".parse::<PauliString>().unwrap()] - 0.75).abs() < 1e-14);
        assert!((map[&"ZZ".parse::<PauliString>().unwrap()] + 0.25).abs() < 1e-14);

        let y2 = op("IY").scale(2.0);
        let map = y2.pauli_decompose().unwrap();
        assert_eq!(map.len(), 1);
        assert!((map[&PauliString::single(2, 1, Pauli::Y).unwrap()] - 2.0).abs() < 1e-14);

        assert!(HermitianOperator::zeros(4).pauli_decompose().unwrap().is_empty());
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }
}
