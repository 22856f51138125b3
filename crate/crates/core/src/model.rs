//! Hamiltonian models: a generic drift-plus-controls form and the two-qubit
//! Ising-coupled model with a transverse drive on the second qubit.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::basis::{error_subspace, OperatorBasis};
use crate::error::{Error, Result};
use crate::jet::MatrixJet;
use crate::operator::HermitianOperator;
use crate::pauli::PauliString;
use crate::pulse::PulseShape;

/// Quasi-static noise: a unit-norm Hermitian direction and a strength.
#[derive(Clone, Debug)]
pub struct NoiseSpec {
    operator: HermitianOperator,
    strength: f64,
}

impl NoiseSpec {
    pub fn new(operator: HermitianOperator, strength: f64) -> Result<Self> {
        let norm = operator.norm();
        if norm < 1e-12 {
            return Err(Error::invalid("noise operator must be nonzero"));
        }
        if !(strength >= 0.0) {
            return Err(Error::invalid("noise strength must be nonnegative"));
        }
        Ok(NoiseSpec {
            operator: operator.scale(1.0 / norm),
            strength,
        })
    }

    pub fn from_pauli(p: &PauliString, strength: f64) -> Result<Self> {
        NoiseSpec::new(HermitianOperator::from_pauli(p), strength)
    }

    /// Unit-norm direction Q.
    pub fn direction(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn with_strength(&self, strength: f64) -> Result<Self> {
        NoiseSpec::new(self.operator.clone(), strength)
    }
}

/// Time-dependent Hamiltonian `H0(t) = drift + sum_i Omega_i(t) V_i`.
#[derive(Clone, Debug)]
pub struct ControlHamiltonian {
    drift: HermitianOperator,
    controls: Vec<(HermitianOperator, PulseShape)>,
}

impl ControlHamiltonian {
    pub fn new(
        drift: HermitianOperator,
        controls: Vec<(HermitianOperator, PulseShape)>,
    ) -> Result<Self> {
        let dim = drift.dim();
        for (op, _) in &controls {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: op.dim(),
                });
            }
        }
        if let Some(first) = controls.first() {
            let t = first.1.duration();
            if controls.iter().any(|(_, p)| (p.duration() - t).abs() > 1e-9 * t.max(1.0)) {
                return Err(Error::invalid("all control pulses must share one duration"));
            }
        }
        Ok(ControlHamiltonian { drift, controls })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn drift(&self) -> &HermitianOperator {
        &self.drift
    }

    pub fn controls(&self) -> &[(HermitianOperator, PulseShape)] {
        &self.controls
    }

    /// Pulse duration, when the Hamiltonian carries controls.
    pub fn duration(&self) -> Option<f64> {
        self.controls.first().map(|(_, p)| p.duration())
    }

    pub fn matrix_at(&self, t: f64) -> DMatrix<C64> {
        let mut m = self.drift.matrix().clone();
        for (op, pulse) in &self.controls {
            m += op.matrix() * C64::new(pulse.value(t), 0.0);
        }
        m
    }

    pub fn op_at(&self, t: f64) -> HermitianOperator {
        HermitianOperator::new_unchecked(self.matrix_at(t))
    }

    /// Taylor jet of H0 at `t`.
    pub fn jet_at(&self, t: f64, order: usize) -> MatrixJet {
        let mut jet = MatrixJet::constant(self.drift.matrix().clone(), order);
        for (op, pulse) in &self.controls {
            let coeff = pulse.jet(t, order);
            jet = jet.add(&MatrixJet::constant(op.matrix().clone(), order).scale_jet(&coeff));
        }
        jet
    }

    /// As `jet_at`, erroring where a control is not differentiable.
    pub fn jet_checked_at(&self, t: f64, order: usize) -> Result<MatrixJet> {
        let mut jet = MatrixJet::constant(self.drift.matrix().clone(), order);
        for (op, pulse) in &self.controls {
            let coeff = pulse.jet_checked(t, order)?;
            jet = jet.add(&MatrixJet::constant(op.matrix().clone(), order).scale_jet(&coeff));
        }
        Ok(jet)
    }

    /// Directions spanned by the Hamiltonian terms (controls first, then the
    /// Pauli components of the drift), as inputs to the error-subspace
    /// closure.
    pub fn term_directions(&self) -> Result<Vec<HermitianOperator>> {
        let mut out: Vec<HermitianOperator> = self
            .controls
            .iter()
            .map(|(op, _)| op.clone())
            .collect();
        for (p, _) in self.drift.pauli_decompose()? {
            if !p.is_identity() {
                out.push(HermitianOperator::from_pauli(&p));
            }
        }
        Ok(out)
    }

    /// Energy scale used to size time grids: the larger of the control
    /// amplitude bound and the summed drift coefficients.
    pub fn scale(&self) -> Result<f64> {
        let control = self
            .controls
            .iter()
            .map(|(op, p)| p.max_abs() * op.norm())
            .fold(0.0, f64::max);
        let drift: f64 = self
            .drift
            .pauli_decompose()?
            .values()
            .map(|c| c.abs())
            .sum();
        Ok(control.max(drift).max(1e-12))
    }

    /// True when every control is piecewise constant, enabling segment-exact
    /// propagation.
    pub fn is_piecewise_constant(&self) -> bool {
        !self.controls.is_empty()
            && self.controls.iter().all(|(_, p)| p.as_square().is_some())
    }
}

/// Two qubits coupled by an Ising interaction with energy splittings E1 and
/// E2, driven transversally on qubit 2:
/// `H0 = Omega(t) X2 + (E1+E2)/2 Z2 + (E1-E2)/2 Z1Z2`.
#[derive(Clone, Debug)]
pub struct IsingModel {
    e1: f64,
    e2: f64,
    noise: PauliString,
}

impl IsingModel {
    pub fn new(e1: f64, e2: f64) -> Result<Self> {
        IsingModel::with_noise(e1, e2, "IZ".parse()?)
    }

    pub fn with_noise(e1: f64, e2: f64, noise: PauliString) -> Result<Self> {
        if !e1.is_finite() || !e2.is_finite() {
            return Err(Error::invalid("energy splittings must be finite"));
        }
        if noise.n_qubits() != 2 {
            return Err(Error::invalid("noise must be a two-qubit Pauli string"));
        }
        if noise.is_identity() {
            return Err(Error::invalid("noise direction cannot be the identity"));
        }
        Ok(IsingModel { e1, e2, noise })
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn e2(&self) -> f64 {
        self.e2
    }

    pub fn dim(&self) -> usize {
        4
    }

    pub fn noise_pauli(&self) -> &PauliString {
        &self.noise
    }

    pub fn noise_direction(&self) -> HermitianOperator {
        HermitianOperator::from_pauli(&self.noise)
    }

    pub fn noise_spec(&self, strength: f64) -> Result<NoiseSpec> {
        NoiseSpec::from_pauli(&self.noise, strength)
    }

    fn drift(&self) -> HermitianOperator {
        HermitianOperator::from_pauli_terms(
            2,
            &[
                ("IZ".parse().unwrap(), 0.5 * (self.e1 + self.e2)),
                ("ZZ".parse().unwrap(), 0.5 * (self.e1 - self.e2)),
            ],
        )
        .unwrap()
    }

    pub fn hamiltonian(&self, pulse: PulseShape) -> Result<ControlHamiltonian> {
        let x2 = HermitianOperator::from_pauli(&"IX".parse()?);
        ControlHamiltonian::new(self.drift(), vec![(x2, pulse)])
    }

    /// The error subspace reached from the noise direction under this model.
    pub fn error_basis(&self) -> Result<OperatorBasis> {
        let terms = [
            HermitianOperator::from_pauli(&"IX".parse()?),
            HermitianOperator::from_pauli(&"IZ".parse()?),
            HermitianOperator::from_pauli(&"ZZ".parse()?),
        ];
        error_subspace(&terms, &self.noise_direction())
    }

    /// Grid-sizing scale `max(|Omega|, |E1|, |E2|)`.
    pub fn grid_scale(&self, pulse: &PulseShape) -> f64 {
        pulse
            .max_abs()
            .max(self.e1.abs())
            .max(self.e2.abs())
            .max(1e-12)
    }

    /// Splittings of the two 2x2 blocks.
    pub fn block_splittings(&self) -> [f64; 2] {
        [self.e1, self.e2]
    }

    /// Single-block Hamiltonian `E_b Z + Omega(t) X` on one 2x2 subsystem.
    /// Only meaningful for Z2 noise, which restricts to Z on each block.
    pub fn block_hamiltonian(&self, block: usize, pulse: PulseShape) -> Result<ControlHamiltonian> {
        let e = *self
            .block_splittings()
            .get(block)
            .ok_or_else(|| Error::invalid(format!("block index {block} out of range")))?;
        let drift = HermitianOperator::from_pauli(&"Z".parse()?).scale(e);
        let x = HermitianOperator::from_pauli(&"X".parse()?);
        ControlHamiltonian::new(drift, vec![(x, pulse)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{LorentzianTerm, SmoothPulse};

    fn test_pulse() -> PulseShape {
        PulseShape::Smooth(
            SmoothPulse::new(
                1.0,
                vec![LorentzianTerm { c: 0.5, a: 1.0, phi: 0.3 }],
                3.0,
                1,
            )
            .unwrap(),
        )
    }

    #[test]
    fn ising_matrix_matches_block_form() {
        let model = IsingModel::new(0.5, 1.0).unwrap();
        let ham = model.hamiltonian(test_pulse()).unwrap();
        let t = 0.7;
        let omega = ham.controls()[0].1.value(t);
        let m = ham.matrix_at(t);
        // diag(E1, -E1, E2, -E2) with Omega on the within-block off-diagonals
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((m[(1, 1)].re + 0.5).abs() < 1e-14);
        assert!((m[(2, 2)].re - 1.0).abs() < 1e-14);
        assert!((m[(3, 3)].re + 1.0).abs() < 1e-14);
        assert!((m[(0, 1)].re - omega).abs() < 1e-14);
        assert!((m[(2, 3)].re - omega).abs() < 1e-14);
        assert!(m[(0, 2)].norm() < 1e-14);
        assert!(m[(1, 3)].norm() < 1e-14);
    }

    #[test]
    fn error_basis_has_six_directions() {
        let model = IsingModel::new(0.5, 1.0).unwrap();
        let basis = model.error_basis().unwrap();
        assert_eq!(basis.d(), 6);
        assert_eq!(basis.labels(), ["IZ", "IY", "IX", "ZX", "ZY", "ZZ"]);
    }

    #[test]
    fn noise_spec_normalizes() {
        let op = HermitianOperator::from_pauli(&"IZ".parse().unwrap()).scale(3.0);
        let spec = NoiseSpec::new(op, 0.1).unwrap();
        assert!((spec.direction().norm() - 1.0).abs() < 1e-14);
        assert!(NoiseSpec::new(HermitianOperator::zeros(4), 0.1).is_err());
    }

    #[test]
    fn jet_at_matches_matrix_at() {
        let model = IsingModel::new(0.5, 1.0).unwrap();
        let ham = model.hamiltonian(test_pulse()).unwrap();
        let jet = ham.jet_at(0.9, 4);
        assert!((jet.value() - ham.matrix_at(0.9)).norm() < 1e-13);
    }
}
