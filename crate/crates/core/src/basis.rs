//! Orthonormal operator bases and construction of the error subspace by
//! Lie closure under `i[V_i, .]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{commutator_i, inner_product, HermitianOperator};
use crate::pauli::PauliString;

/// Residuals below this (relative to the candidate norm) are treated as
/// already spanned during Gram-Schmidt.
pub const GS_DROP_TOL: f64 = 1e-10;

/// One basis direction; carries its Pauli-string label when the closure
/// landed exactly on a Pauli string.
#[derive(Clone, Debug)]
pub struct BasisElement {
    op: HermitianOperator,
    label: Option<PauliString>,
}

impl BasisElement {
    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn label(&self) -> Option<&PauliString> {
        self.label.as_ref()
    }
}

/// Ordered orthonormal basis of a subspace of traceless Hermitian operators.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    elements: Vec<BasisElement>,
    dim_space: usize,
}

impl OperatorBasis {
    pub fn new(elements: Vec<BasisElement>) -> Result<Self> {
        let dim_space = match elements.first() {
            Some(e) => e.op.dim(),
            None => return Err(Error::invalid("operator basis cannot be empty")),
        };
        for (i, a) in elements.iter().enumerate() {
            if a.op.dim() != dim_space {
                return Err(Error::DimensionMismatch {
                    left: dim_space,
                    right: a.op.dim(),
                });
            }
            for (j, b) in elements.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = inner_product(&a.op, &b.op)?;
                if (got - want).abs() > 1e-8 {
                    return Err(Error::invalid(format!(
                        "basis elements {i} and {j} are not orthonormal (inner product {got:.3e})"
                    )));
                }
            }
        }
        Ok(OperatorBasis { elements, dim_space })
    }

    pub fn from_paulis(strings: &[PauliString]) -> Result<Self> {
        let elements = strings
            .iter()
            .map(|p| BasisElement {
                op: HermitianOperator::from_pauli(p),
                label: Some(p.clone()),
            })
            .collect();
        OperatorBasis::new(elements)
    }

    /// Number of basis elements (the curve's ambient dimension d).
    pub fn d(&self) -> usize {
        self.elements.len()
    }

    /// Hilbert-space dimension the elements act on.
    pub fn dim_space(&self) -> usize {
        self.dim_space
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    /// Column labels for exports: the Pauli text when available, else `b<i>`.
    pub fn labels(&self) -> Vec<String> {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, e)| match &e.label {
                Some(p) => p.to_string(),
                None => format!("b{i}"),
            })
            .collect()
    }

    /// Index of the element labeled by `p`, if present.
    pub fn index_of(&self, p: &PauliString) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| e.label.as_ref() == Some(p))
    }

    pub fn coords(&self, op: &HermitianOperator) -> Result<DVector<f64>> {
        if op.dim() != self.dim_space {
            return Err(Error::DimensionMismatch {
                left: self.dim_space,
                right: op.dim(),
            });
        }
        Ok(self.coords_of_matrix(op.matrix()))
    }

    /// Fast path used by the propagation loop; assumes matching dimension.
    pub(crate) fn coords_of_matrix(&self, m: &DMatrix<C64>) -> DVector<f64> {
        let dim = self.dim_space as f64;
        DVector::from_iterator(
            self.elements.len(),
            self.elements.iter().map(|e| {
                let b = e.op.matrix();
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..self.dim_space {
                    for j in 0..self.dim_space {
                        acc += m[(i, j)] * b[(j, i)];
                    }
                }
                acc.re / dim
            }),
        )
    }

    pub fn reconstruct(&self, coords: &DVector<f64>) -> Result<HermitianOperator> {
        if coords.len() != self.elements.len() {
            return Err(Error::DimensionMismatch {
                left: self.elements.len(),
                right: coords.len(),
            });
        }
        let mut m = DMatrix::<C64>::zeros(self.dim_space, self.dim_space);
        for (c, e) in coords.iter().zip(&self.elements) {
            m += e.op.matrix() * C64::new(*c, 0.0);
        }
        Ok(HermitianOperator::new_unchecked(m))
    }

    /// Norm of the component of `op` outside the basis span.
    pub fn projection_residual(&self, op: &HermitianOperator) -> Result<f64> {
        let coords = self.coords(op)?;
        let back = self.reconstruct(&coords)?;
        Ok((op - &back).norm())
    }
}

/// Smallest subspace containing `delta_h` and closed under `i[V_i, .]` for
/// every term, as an orthonormal basis. Basis elements are ordered by first
/// appearance during the closure; elements that land on a Pauli string keep
/// the exact string, others fall back to Gram-Schmidt directions.
pub fn error_subspace(
    terms: &[HermitianOperator],
    delta_h: &HermitianOperator,
) -> Result<OperatorBasis> {
    let dim = delta_h.dim();
    for t in terms {
        if t.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: t.dim(),
            });
        }
    }
    if delta_h.norm() < 1e-12 {
        return Err(Error::invalid("delta H must be nonzero"));
    }

    let cap = dim * dim; // dim of the full operator space
    let mut elements: Vec<BasisElement> = vec![identify_or_dense(delta_h.clone())?];
    let mut next = 0;
    while next < elements.len() && elements.len() < cap {
        let current = elements[next].op.clone();
        for v in terms {
            let candidate = commutator_i(v, &current)?;
            let scale = candidate.norm();
            if scale < 1e-12 {
                continue;
            }
            // Modified Gram-Schmidt against the basis so far.
            let mut residual = candidate;
            for e in &elements {
                let c = inner_product(&residual, &e.op)?;
                residual = &residual - &e.op.scale(c);
            }
            if residual.norm() > GS_DROP_TOL * scale.max(1.0) {
                elements.push(identify_or_dense(residual)?);
            }
        }
        next += 1;
    }
    OperatorBasis::new(elements)
}

/// Normalizes `op`; if it is a single Pauli string times a scalar, store the
/// string itself (canonical + sign), otherwise keep the dense direction.
fn identify_or_dense(op: HermitianOperator) -> Result<BasisElement> {
    let norm = op.norm();
    let unit = op.scale(1.0 / norm);
    let map = unit.pauli_decompose()?;
    if map.len() == 1 {
        let (p, c) = map.into_iter().next().unwrap();
        if (c.abs() - 1.0).abs() < 1e-9 {
            return Ok(BasisElement {
                op: HermitianOperator::from_pauli(&p),
                label: Some(p),
            });
        }
    }
    Ok(BasisElement { op: unit, label: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    fn op(s: &str) -> HermitianOperator {
        HermitianOperator::from_pauli(&s.parse::<PauliString>().unwrap())
    }

    #[test]
    fn ising_noise_closure_spans_six_strings() {
        let terms = [op("IX"), op("IZ"), op("ZZ")];
        let basis = error_subspace(&terms, &op("IZ")).unwrap();
        assert_eq!(basis.d(), 6);
        let labels = basis.labels();
        assert_eq!(labels, ["IZ", "IY", "IX", "ZX", "ZY", "ZZ"]);
    }

    #[test]
    fn single_qubit_closures() {
        let x = op("X");
        let y = op("Y");
        let z = op("Z");
        assert_eq!(error_subspace(&[x.clone()], &z).unwrap().d(), 2);
        assert_eq!(error_subspace(&[x, y], &z).unwrap().d(), 3);
    }

    #[test]
    fn closure_is_closed_under_commutators() {
        let terms = [op("IX"), op("IZ"), op("ZZ")];
        let basis = error_subspace(&terms, &op("IZ")).unwrap();
        for e in basis.elements() {
            for v in &terms {
                let c = commutator_i(v, e.operator()).unwrap();
                assert!(basis.projection_residual(&c).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn coords_roundtrip() {
        let basis = OperatorBasis::from_paulis(&[
            PauliString::single(1, 0, Pauli::X).unwrap(),
            PauliString::single(1, 0, Pauli::Y).unwrap(),
            PauliString::single(1, 0, Pauli::Z).unwrap(),
        ])
        .unwrap();
        let target = HermitianOperator::from_pauli_terms(
            1,
            &[
                ("X".parse().unwrap(), 0.3),
                ("Z".parse().unwrap(), -1.7),
            ],
        )
        .unwrap();
        let coords = basis.coords(&target).unwrap();
        assert!((coords[0] - 0.3).abs() < 1e-14);
        assert!((coords[2] + 1.7).abs() < 1e-14);
        let back = basis.reconstruct(&coords).unwrap();
        assert!((&back - &target).norm() < 1e-14);
        assert!(basis.projection_residual(&target).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_zero_delta_h() {
        let terms = [op("X")];
        let zero = HermitianOperator::zeros(2);
        assert!(error_subspace(&terms, &zero).is_err());
    }
}
