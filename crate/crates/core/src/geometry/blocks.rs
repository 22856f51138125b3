//! Decomposition of the six-dimensional error curve of the block-diagonal
//! two-qubit model into two three-dimensional curves, one per 2x2 block,
//! plus per-block curvature/torsion diagnostics.
//!
//! With Z2 noise the interaction operator restricts to sigma_z on each
//! block, so the block curves are linear images of the 6D coordinates:
//! `g1 = G_{IP} + G_{ZP}` and `g2 = G_{IP} - G_{ZP}` for P in {X, Y, Z}.

use nalgebra::{DMatrix, DVector};

use crate::basis::OperatorBasis;
use crate::error::{Error, Result};
use crate::model::{ControlHamiltonian, IsingModel};
use crate::operator::HermitianOperator;
use crate::propagation::ErrorCurve;
use crate::pulse::PulseShape;

use super::fd;
use super::frames::DerivativeOperators;

/// The two per-block 3D curves in the (x, y, z) Pauli coordinates.
#[derive(Clone, Debug)]
pub struct BlockCurves {
    pub first: ErrorCurve,
    pub second: ErrorCurve,
}

fn xyz_basis() -> OperatorBasis {
    OperatorBasis::from_paulis(&[
        "X".parse().unwrap(),
        "Y".parse().unwrap(),
        "Z".parse().unwrap(),
    ])
    .expect("single-qubit Pauli basis is orthonormal")
}

fn coordinate_indices(basis: &OperatorBasis) -> Result<[(usize, usize); 3]> {
    let mut out = [(0usize, 0usize); 3];
    for (slot, p) in ["X", "Y", "Z"].iter().enumerate() {
        let ip = format!("I{p}").parse().unwrap();
        let zp = format!("Z{p}").parse().unwrap();
        let i_ip = basis.index_of(&ip);
        let i_zp = basis.index_of(&zp);
        match (i_ip, i_zp) {
            (Some(a), Some(b)) => out[slot] = (a, b),
            _ => {
                return Err(Error::invalid(
                    "curve basis is not the block-diagonal Z2-noise subspace \
                     {X2, Y2, Z2, Z1X2, Z1Y2, Z1Z2}",
                ))
            }
        }
    }
    Ok(out)
}

/// Splits a 6D curve of the block-diagonal model into its two 3D block
/// curves. Requires the curve basis to be the Z2-noise error subspace.
pub fn block_decompose(curve: &ErrorCurve) -> Result<BlockCurves> {
    if curve.d() != 6 {
        return Err(Error::invalid(format!(
            "block decomposition expects a 6-dimensional curve, got d = {}",
            curve.d()
        )));
    }
    let idx = coordinate_indices(curve.basis())?;
    let basis3 = xyz_basis();
    let mut first = Vec::with_capacity(curve.points().len());
    let mut second = Vec::with_capacity(curve.points().len());
    for g in curve.points() {
        let mut p1 = DVector::zeros(3);
        let mut p2 = DVector::zeros(3);
        for (slot, (a, b)) in idx.iter().enumerate() {
            p1[slot] = g[*a] + g[*b];
            p2[slot] = g[*a] - g[*b];
        }
        first.push(p1);
        second.push(p2);
    }
    Ok(BlockCurves {
        first: ErrorCurve::from_parts(basis3.clone(), first, *curve.grid()),
        second: ErrorCurve::from_parts(basis3, second, *curve.grid()),
    })
}

/// Rebuilds the 6D curve from its block curves; inverse of
/// [`block_decompose`].
pub fn reconstruct_from_blocks(blocks: &BlockCurves, basis6: &OperatorBasis) -> Result<ErrorCurve> {
    let idx = coordinate_indices(basis6)?;
    let n = blocks.first.points().len();
    if blocks.second.points().len() != n {
        return Err(Error::invalid("block curves differ in length"));
    }
    let mut points = Vec::with_capacity(n);
    for (p1, p2) in blocks.first.points().iter().zip(blocks.second.points()) {
        let mut g = DVector::zeros(6);
        for (slot, (a, b)) in idx.iter().enumerate() {
            g[*a] = 0.5 * (p1[slot] + p2[slot]);
            g[*b] = 0.5 * (p1[slot] - p2[slot]);
        }
        points.push(g);
    }
    Ok(ErrorCurve::from_parts(
        basis6.clone(),
        points,
        *blocks.first.grid(),
    ))
}

/// Max coordinate error of decompose-then-reconstruct against the original.
pub fn reconstruction_residual(curve: &ErrorCurve) -> Result<f64> {
    let blocks = block_decompose(curve)?;
    let back = reconstruct_from_blocks(&blocks, curve.basis())?;
    Ok(curve
        .points()
        .iter()
        .zip(back.points())
        .map(|(a, b)| (a - b).amax())
        .fold(0.0, f64::max))
}

/// Pointwise curvature and torsion of a unit-speed 3D curve from its first
/// three derivative vectors: `kappa = |v2|`,
/// `tau = -det[v1 v2 v3] / kappa^2`. The sign convention makes a block
/// with constant splitting E come out at `tau = 2E`.
fn kappa_tau_from_derivatives(v1: &DVector<f64>, v2: &DVector<f64>, v3: &DVector<f64>) -> (f64, f64) {
    let kappa = v2.norm();
    let det = DMatrix::from_fn(3, 3, |i, j| match j {
        0 => v1[i],
        1 => v2[i],
        _ => v3[i],
    })
    .determinant();
    let tau = if kappa > 1e-300 { -det / (kappa * kappa) } else { f64::NAN };
    (kappa, tau)
}

/// Per-sample (kappa, tau) of a 3D block curve by finite differences of the
/// sampled coordinates. Samples where `kappa < kappa_floor` are masked
/// (torsion is undefined there).
pub fn block_kappa_tau_fd(
    curve3: &ErrorCurve,
    kappa_floor: f64,
) -> Result<Vec<Option<(f64, f64)>>> {
    if curve3.d() != 3 {
        return Err(Error::invalid("block diagnostics expect a 3D curve"));
    }
    let h = curve3.grid().h();
    let v1 = fd::derivative_samples(curve3.points(), h, 1);
    let v2 = fd::derivative_samples(curve3.points(), h, 2);
    let v3 = fd::derivative_samples(curve3.points(), h, 3);
    Ok((0..curve3.points().len())
        .map(|k| {
            let (kappa, tau) = kappa_tau_from_derivatives(&v1[k], &v2[k], &v3[k]);
            (kappa >= kappa_floor && tau.is_finite()).then_some((kappa, tau))
        })
        .collect())
}

/// Per-sample (kappa, tau) of one block from the operator-side derivative
/// expansion of the 2x2 block Hamiltonian. Curvature and torsion are
/// invariant under the frame rotation, so no propagator is needed.
pub fn block_kappa_tau_exact(
    model: &IsingModel,
    block: usize,
    pulse: &PulseShape,
    times: &[f64],
    kappa_floor: f64,
) -> Result<Vec<Option<(f64, f64)>>> {
    if model.noise_pauli().to_string() != "IZ" {
        return Err(Error::invalid(
            "block diagnostics require Z2 noise on the block-diagonal model",
        ));
    }
    let ham: ControlHamiltonian = model.block_hamiltonian(block, pulse.clone())?;
    let q = HermitianOperator::from_pauli(&"Z".parse()?);
    let stack = DerivativeOperators::new(&ham, &q, 3)?;
    let basis = xyz_basis();
    Ok(times
        .iter()
        .map(|&t| {
            let ms = stack.matrices_at(t);
            let v: Vec<DVector<f64>> = ms.iter().map(|m| basis.coords_of_matrix(m)).collect();
            let (kappa, tau) = kappa_tau_from_derivatives(&v[0], &v[1], &v[2]);
            (kappa >= kappa_floor && tau.is_finite()).then_some((kappa, tau))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{PulseSegment, SquarePulseSequence};

    #[test]
    fn constant_drive_block_has_helix_invariants() {
        // kappa = 2|Omega|, tau = 2E for a constant drive.
        let model = IsingModel::new(0.5, 1.0).unwrap();
        let pulse = PulseShape::Square(
            SquarePulseSequence::new(
                vec![PulseSegment { amplitude: 0.8, duration: 3.0 }],
                1,
            )
            .unwrap(),
        );
        for (block, e) in [(0usize, 0.5), (1usize, 1.0)] {
            let diag = block_kappa_tau_exact(&model, block, &pulse, &[0.4, 1.7], 1e-6).unwrap();
            for entry in diag {
                let (kappa, tau) = entry.unwrap();
                assert!((kappa - 1.6).abs() < 1e-12);
                assert!((tau - 2.0 * e).abs() < 1e-12, "tau = {tau}, want {}", 2.0 * e);
            }
        }
    }
}
