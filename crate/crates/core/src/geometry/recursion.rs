//! Curvatures from the anticommutation recursion.
//!
//! When `{H0(t), Q} = 0` for all t and `Q^2 = 1`, the frame vectors can be
//! written `e_n = R^dagger A_n Q R` and the curvatures follow from
//!
//! ```text
//! kappa_n A_{n+1} = i {H0, A_n}   (n odd)
//! kappa_n A_{n+1} = dA_n/dt       (n even)
//! ```
//!
//! with `kappa_n = |rhs|` since every `A_n` has unit norm. The `A_n`
//! alternate between commuting and anticommuting with Q
//! (`[A_n, Q] = 0` for n mod 4 in {0, 1}, `{A_n, Q} = 0` for n mod 4 in
//! {2, 3}). Note the odd-step `A_n` are anti-Hermitian; it is the products
//! `A_n Q` that are Hermitian. All time derivatives are evaluated with jet
//! arithmetic, so the returned curvatures are exact to roundoff.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::jet::MatrixJet;
use crate::model::ControlHamiltonian;
use crate::operator::HermitianOperator;
use crate::propagation::TimeGrid;

use super::curvature::CurvatureProfile;

/// The recursion operators at one time, with Q.
#[derive(Clone, Debug)]
pub struct RecursionState {
    a_ops: Vec<DMatrix<C64>>,
    q: DMatrix<C64>,
}

impl RecursionState {
    /// A_1..A_{n+1} as evaluated (A_1 is the identity).
    pub fn a_ops(&self) -> &[DMatrix<C64>] {
        &self.a_ops
    }

    /// Norm of `[A_n, Q]` or `{A_n, Q}` according to the commute /
    /// anticommute pattern; `n` is 1-based.
    pub fn pattern_defect(&self, n: usize) -> f64 {
        let a = &self.a_ops[n - 1];
        let dim = a.nrows() as f64;
        let m = if n % 4 == 0 || n % 4 == 1 {
            a * &self.q - &self.q * a
        } else {
            a * &self.q + &self.q * a
        };
        (m.norm_squared() / dim).sqrt()
    }

    pub fn max_pattern_defect(&self) -> f64 {
        (1..=self.a_ops.len())
            .map(|n| self.pattern_defect(n))
            .fold(0.0, f64::max)
    }

    /// Norms |A_n| (all should be 1).
    pub fn a_norms(&self) -> Vec<f64> {
        let dim = self.q.nrows() as f64;
        self.a_ops
            .iter()
            .map(|a| (a.norm_squared() / dim).sqrt())
            .collect()
    }
}

/// One recursion evaluation: curvatures and the operators behind them.
#[derive(Clone, Debug)]
pub struct RecursionSample {
    pub kappas: Vec<f64>,
    pub state: RecursionState,
}

/// Curvature functions from the recursion relation for a Hamiltonian that
/// anticommutes with the noise direction.
pub struct RecursionCurvatures<'a> {
    ham: &'a ControlHamiltonian,
    q: HermitianOperator,
    n_max: usize,
}

/// Curvatures smaller than this (relative to the Hamiltonian scale) stop
/// the recursion: the curve no longer explores new directions.
const KAPPA_FLOOR: f64 = 1e-9;

impl<'a> RecursionCurvatures<'a> {
    pub fn new(ham: &'a ControlHamiltonian, q: &HermitianOperator, n_max: usize) -> Result<Self> {
        if q.dim() != ham.dim() {
            return Err(Error::DimensionMismatch {
                left: ham.dim(),
                right: q.dim(),
            });
        }
        if n_max == 0 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        let q2 = q.matrix() * q.matrix();
        let id = DMatrix::<C64>::identity(q.dim(), q.dim());
        if (q2 - id).norm() > 1e-10 {
            return Err(Error::invalid("noise direction must square to the identity"));
        }
        Ok(RecursionCurvatures {
            ham,
            q: q.clone(),
            n_max,
        })
    }

    fn check_anticommutation(&self, t: f64) -> Result<()> {
        let h = self.ham.matrix_at(t);
        let q = self.q.matrix();
        let anti = &h * q + q * &h;
        let defect = (anti.norm_squared() / h.nrows() as f64).sqrt();
        let scale = (h.norm_squared() / h.nrows() as f64).sqrt();
        if defect > 1e-10 * (1.0 + scale) {
            return Err(Error::AnticommutationViolated { t, defect });
        }
        Ok(())
    }

    /// Curvatures kappa_1..kappa_{n_max} at `t` (fewer if the recursion
    /// terminates early because a curvature vanishes identically).
    pub fn at(&self, t: f64) -> Result<RecursionSample> {
        self.check_anticommutation(t)?;
        let order = self.n_max + 2;
        let h_jet = self.ham.jet_at(t, order);
        let scale = self.ham.scale()?;

        let dim = self.ham.dim();
        let mut a = MatrixJet::constant(DMatrix::<C64>::identity(dim, dim), order);
        let mut a_ops = vec![a.value().clone()];
        let mut kappas = Vec::with_capacity(self.n_max);
        for n in 1..=self.n_max {
            let rhs = if n % 2 == 1 {
                h_jet.anticommutator(&a).scale(C64::new(0.0, 1.0))
            } else {
                a.derivative_jet()
            };
            let kappa_value = {
                let dimf = dim as f64;
                (rhs.value().norm_squared() / dimf).sqrt()
            };
            if kappa_value < KAPPA_FLOOR * scale.max(1.0) {
                break;
            }
            let kappa_jet = rhs.norm_jet();
            kappas.push(kappa_value);
            a = rhs.scale_jet(&kappa_jet.recip());
            a_ops.push(a.value().clone());
        }
        Ok(RecursionSample {
            kappas,
            state: RecursionState {
                a_ops,
                q: self.q.matrix().clone(),
            },
        })
    }

    /// Profiles the recursion over a grid; the worst commute/anticommute
    /// pattern defect over all samples is returned alongside.
    pub fn profile(&self, grid: TimeGrid) -> Result<(CurvatureProfile, f64)> {
        let mut kappas = Vec::with_capacity(grid.steps() + 1);
        let mut worst = 0.0f64;
        for k in 0..=grid.steps() {
            let sample = self.at(grid.time(k))?;
            worst = worst.max(sample.state.max_pattern_defect());
            if sample.kappas.len() == self.n_max {
                kappas.push(Some(nalgebra::DVector::from_vec(sample.kappas)));
            } else {
                kappas.push(None);
            }
        }
        Ok((
            CurvatureProfile::from_parts(grid, self.n_max + 1, kappas),
            worst,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{LorentzianTerm, PulseShape, SmoothPulse};

    fn xy_hamiltonian() -> ControlHamiltonian {
        let x = HermitianOperator::from_pauli(&"X".parse().unwrap());
        let y = HermitianOperator::from_pauli(&"Y".parse().unwrap());
        let px = PulseShape::Smooth(
            SmoothPulse::new(
                0.9,
                vec![LorentzianTerm { c: 0.5, a: 1.1, phi: 0.4 }],
                3.0,
                1,
            )
            .unwrap(),
        );
        let py = PulseShape::Smooth(
            SmoothPulse::new(
                0.55,
                vec![LorentzianTerm { c: 0.3, a: 1.6, phi: 1.9 }],
                3.0,
                1,
            )
            .unwrap(),
        );
        ControlHamiltonian::new(HermitianOperator::zeros(2), vec![(x, px), (y, py)]).unwrap()
    }

    #[test]
    fn kappa1_is_twice_the_drive_magnitude() {
        let ham = xy_hamiltonian();
        let q = HermitianOperator::from_pauli(&"Z".parse().unwrap());
        let rec = RecursionCurvatures::new(&ham, &q, 2).unwrap();
        for t in [0.3, 1.1, 2.4] {
            let sample = rec.at(t).unwrap();
            let ox = ham.controls()[0].1.value(t);
            let oy = ham.controls()[1].1.value(t);
            let want = 2.0 * (ox * ox + oy * oy).sqrt();
            assert!((sample.kappas[0] - want).abs() < 1e-12);
            // A_1 = identity commutes with Q trivially; pattern holds down
            // the chain.
            assert!(sample.state.max_pattern_defect() < 1e-10);
            for n in sample.state.a_norms() {
                assert!((n - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_commuting_noise() {
        let ham = xy_hamiltonian();
        let q = HermitianOperator::from_pauli(&"X".parse().unwrap());
        let rec = RecursionCurvatures::new(&ham, &q, 2).unwrap();
        assert!(matches!(
            rec.at(0.5),
            Err(Error::AnticommutationViolated { .. })
        ));
    }

    #[test]
    fn rejects_non_involutory_direction() {
        let ham = xy_hamiltonian();
        let q = HermitianOperator::from_pauli(&"Z".parse().unwrap()).scale(0.5);
        assert!(RecursionCurvatures::new(&ham, &q, 2).is_err());
    }
}
