//! Classification of extracted gates against the diagonal Pauli targets,
//! up to a global phase.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::propagation::unitarity_defect;

/// Two-qubit gate targets reachable by symmetric pulses on the
/// block-diagonal model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateTarget {
    Identity,
    Z1,
    Z2,
    Z1Z2,
}

impl GateTarget {
    pub const ALL: [GateTarget; 4] = [
        GateTarget::Identity,
        GateTarget::Z1,
        GateTarget::Z2,
        GateTarget::Z1Z2,
    ];

    pub fn pauli(&self) -> PauliString {
        match self {
            GateTarget::Identity => "II".parse().unwrap(),
            GateTarget::Z1 => "ZI".parse().unwrap(),
            GateTarget::Z2 => "IZ".parse().unwrap(),
            GateTarget::Z1Z2 => "ZZ".parse().unwrap(),
        }
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        self.pauli().matrix()
    }
}

impl fmt::Display for GateTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GateTarget::Identity => "identity",
            GateTarget::Z1 => "Z1",
            GateTarget::Z2 => "Z2",
            GateTarget::Z1Z2 => "Z1Z2",
        };
        write!(f, "{name}")
    }
}

/// Nearest target under the phase-minimized distance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateClassification {
    pub best: GateTarget,
    /// `min_phi |U - e^{i phi} T|` for the winning target.
    pub distance: f64,
    /// The optimal global phase for the winning target.
    pub phase: f64,
    /// Distances to every target, for diagnostics.
    pub distances: Vec<(GateTarget, f64)>,
}

/// Phase-minimized distance `min_phi |u - e^{i phi} target|` and the
/// minimizing phase.
pub fn phase_min_distance(u: &DMatrix<C64>, target: &DMatrix<C64>) -> (f64, f64) {
    let dim = u.nrows() as f64;
    let overlap = target.dotc(u); // tr(T^dagger U)
    let distance = (2.0 - 2.0 * overlap.norm() / dim).max(0.0).sqrt();
    (distance, overlap.arg())
}

/// Classifies `u` against `targets` (or all four defaults when empty).
pub fn extract_gate(u: &DMatrix<C64>, targets: &[GateTarget]) -> Result<GateClassification> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(Error::invalid("gate classification expects a 4x4 unitary"));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-8 {
        return Err(Error::NotUnitary { defect });
    }
    let targets: Vec<GateTarget> = if targets.is_empty() {
        GateTarget::ALL.to_vec()
    } else {
        targets.to_vec()
    };
    let mut distances = Vec::with_capacity(targets.len());
    let mut best: Option<(GateTarget, f64, f64)> = None;
    for t in targets {
        let (d, phase) = phase_min_distance(u, &t.matrix());
        distances.push((t, d));
        if best.as_ref().is_none_or(|(_, bd, _)| d < *bd) {
            best = Some((t, d, phase));
        }
    }
    let (best, distance, phase) = best.unwrap();
    Ok(GateClassification {
        best,
        distance,
        phase,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_phased_targets() {
        let z1 = GateTarget::Z1.matrix() * C64::from_polar(1.0, 0.83);
        let got = extract_gate(&z1, &[]).unwrap();
        assert_eq!(got.best, GateTarget::Z1);
        assert!(got.distance < 1e-12);
        assert!((got.phase - 0.83).abs() < 1e-12);

        let id = DMatrix::<C64>::identity(4, 4);
        let got = extract_gate(&id, &[]).unwrap();
        assert_eq!(got.best, GateTarget::Identity);
        assert!(got.distance < 1e-12);
    }

    #[test]
    fn block_signs_make_z1() {
        // diag(+1, +1, -1, -1) is Z1 exactly.
        let mut u = DMatrix::<C64>::identity(4, 4);
        u[(2, 2)] = C64::new(-1.0, 0.0);
        u[(3, 3)] = C64::new(-1.0, 0.0);
        let got = extract_gate(&u, &[]).unwrap();
        assert_eq!(got.best, GateTarget::Z1);
        assert!(got.distance < 1e-12);
    }

    #[test]
    fn classification_ignores_global_phase() {
        let u = GateTarget::Z1Z2.matrix();
        let a = extract_gate(&u, &[]).unwrap();
        let b = extract_gate(&(&u * C64::from_polar(1.0, -2.1)), &[]).unwrap();
        assert_eq!(a.best, b.best);
        assert!((a.distance - b.distance).abs() < 1e-12);
    }
}
