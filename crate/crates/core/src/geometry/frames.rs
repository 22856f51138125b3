//! Frenet-Serret frames of error curves.
//!
//! Frames come from Gram-Schmidt over successive curve derivatives. The
//! first d-1 vectors are built from derivatives; the last one completes the
//! frame through the orientation convention (see [`complete_orientation`]),
//! which is what makes the final curvature signed. Derivatives are taken
//! either from the operator-side nested-commutator expansion evaluated with
//! the stored propagator (exact, preferred) or from finite differences of
//! the sampled curve (fallback).

use nalgebra::{DMatrix, DVector};

use crate::basis::OperatorBasis;
use crate::error::{Error, Result};
use crate::jet::MatrixJet;
use crate::model::ControlHamiltonian;
use crate::operator::HermitianOperator;
use crate::propagation::{ErrorCurve, PropagatorTrajectory, TimeGrid};

use super::fd;

/// A Gram-Schmidt vector whose relative residual falls below this is
/// treated as degenerate.
pub const FRAME_DROP_TOL: f64 = 1e-8;

/// Orthonormal moving frame at one sample time.
#[derive(Clone, Debug)]
pub struct FrenetFrame {
    vectors: Vec<DVector<f64>>,
}

impl FrenetFrame {
    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn d(&self) -> usize {
        self.vectors.len()
    }

    /// Frame vectors as matrix columns.
    pub fn as_matrix(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(d, d, |i, j| self.vectors[j][i])
    }

    pub fn max_orthonormality_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((a.dot(b) - want).abs());
            }
        }
        defect
    }
}

/// Frames along a sampled curve. Samples where the derivative set was
/// rank-deficient carry no frame; curvatures there are flagged rather than
/// reported. `effective_dim` is the largest number of independent
/// derivative directions seen anywhere (rank collapse detection, e.g. the
/// equal-splitting limit of the two-qubit model).
#[derive(Clone, Debug)]
pub struct FrameSeries {
    grid: TimeGrid,
    d: usize,
    frames: Vec<Option<FrenetFrame>>,
    effective_dim: usize,
}

impl FrameSeries {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn frames(&self) -> &[Option<FrenetFrame>] {
        &self.frames
    }

    pub fn frame(&self, k: usize) -> Option<&FrenetFrame> {
        self.frames[k].as_ref()
    }

    pub fn effective_dim(&self) -> usize {
        self.effective_dim
    }

    pub fn valid_count(&self) -> usize {
        self.frames.iter().filter(|f| f.is_some()).count()
    }

    /// Frames with degenerate samples filled by interpolation from the
    /// nearest valid neighbors (for export; curvature computation keeps the
    /// flags).
    pub fn interpolated(&self) -> Vec<FrenetFrame> {
        let n = self.frames.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            if let Some(f) = &self.frames[k] {
                out.push(f.clone());
                continue;
            }
            let prev = (0..k).rev().find(|&j| self.frames[j].is_some());
            let next = (k + 1..n).find(|&j| self.frames[j].is_some());
            let interp = match (prev, next) {
                (Some(a), Some(b)) => {
                    let w = (k - a) as f64 / (b - a) as f64;
                    let fa = self.frames[a].as_ref().unwrap();
                    let fb = self.frames[b].as_ref().unwrap();
                    let mixed: Vec<DVector<f64>> = fa
                        .vectors
                        .iter()
                        .zip(&fb.vectors)
                        .map(|(va, vb)| va * (1.0 - w) + vb * w)
                        .collect();
                    reorthonormalize(mixed)
                }
                (Some(a), None) => self.frames[a].clone().unwrap(),
                (None, Some(b)) => self.frames[b].clone().unwrap(),
                (None, None) => FrenetFrame {
                    vectors: (0..self.d)
                        .map(|i| DVector::from_fn(self.d, |j, _| if i == j { 1.0 } else { 0.0 }))
                        .collect(),
                },
            };
            out.push(interp);
        }
        out
    }
}

fn reorthonormalize(vectors: Vec<DVector<f64>>) -> FrenetFrame {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for e in &out {
            let c = v.dot(e);
            v -= e * c;
        }
        let n = v.norm();
        if n > 1e-14 {
            out.push(v / n);
        }
    }
    FrenetFrame { vectors: out }
}

/// Gram-Schmidt over derivative vectors at one sample; returns the
/// orthonormal directions, the count of independent derivatives, and the
/// relative residual of the first dropped vector (infinity when none
/// dropped).
fn gram_schmidt(derivs: &[DVector<f64>]) -> (Vec<DVector<f64>>, usize, f64) {
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(derivs.len());
    let mut dropped_ratio = f64::INFINITY;
    for v in derivs {
        let scale = v.norm();
        if scale < 1e-300 {
            dropped_ratio = 0.0;
            break;
        }
        let mut r = v.clone();
        for e in &frame {
            let c = r.dot(e);
            r -= e * c;
        }
        let n = r.norm();
        if n / scale < FRAME_DROP_TOL {
            dropped_ratio = n / scale;
            break;
        }
        frame.push(r / n);
    }
    let rank = frame.len();
    (frame, rank, dropped_ratio)
}

/// Unit vector orthogonal to `partial` (d-1 orthonormal vectors in R^d),
/// oriented so that det[e_1 .. e_d] = +1.
pub(crate) fn complete_orientation(partial: &[DVector<f64>]) -> Option<DVector<f64>> {
    let d = partial[0].len();
    debug_assert_eq!(partial.len(), d - 1);
    // project each standard basis vector out of the span; the best residual
    // is the orthogonal complement (norm at least 1/sqrt(d))
    let mut best: Option<DVector<f64>> = None;
    let mut best_norm = 0.0;
    for i in 0..d {
        let mut r = DVector::from_fn(d, |j, _| if j == i { 1.0 } else { 0.0 });
        for e in partial {
            let c = r.dot(e);
            r -= e * c;
        }
        let n = r.norm();
        if n > best_norm {
            best_norm = n;
            best = Some(r / n);
        }
    }
    let mut v = best?;
    if best_norm < 1e-8 {
        return None;
    }
    // one re-orthogonalization pass for accuracy
    for e in partial {
        let c = v.dot(e);
        v -= e * c;
    }
    v /= v.norm();
    let mut full = DMatrix::zeros(d, d);
    for (j, e) in partial.iter().enumerate() {
        full.set_column(j, e);
    }
    full.set_column(d - 1, &v);
    if full.determinant() < 0.0 {
        v = -v;
    }
    Some(v)
}

fn frames_from_derivatives(
    grid: TimeGrid,
    d: usize,
    derivs_per_sample: Vec<Vec<DVector<f64>>>,
) -> FrameSeries {
    let mut frames = Vec::with_capacity(derivs_per_sample.len());
    let mut effective = 0usize;
    for derivs in &derivs_per_sample {
        let (mut partial, rank, _) = gram_schmidt(derivs);
        effective = effective.max(rank);
        if rank == d - 1 {
            if let Some(last) = complete_orientation(&partial) {
                partial.push(last);
                frames.push(Some(FrenetFrame { vectors: partial }));
                continue;
            }
        }
        frames.push(None);
    }
    // full rank of d-1 derivatives means the curve explores all d directions
    if effective == d - 1 {
        effective = d;
    }
    FrameSeries {
        grid,
        d,
        frames,
        effective_dim: effective,
    }
}

/// Operator-side curve derivatives: `(C + d/dt)^(n-1) Q` for n = 1..=n_max,
/// with `C V = i [H0, V]`. The returned stack evaluates the exact
/// derivative operators at any time through jet arithmetic; `C` and `d/dt`
/// do not commute, which the jets track automatically.
pub struct DerivativeOperators<'a> {
    ham: &'a ControlHamiltonian,
    q: HermitianOperator,
    n_max: usize,
}

impl<'a> DerivativeOperators<'a> {
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
        Ok(DerivativeOperators {
            ham,
            q: q.clone(),
            n_max,
        })
    }

    /// Derivative operators at `t`, checking pulse differentiability.
    /// Results are Hermitian by construction (C maps Hermitian to Hermitian).
    pub fn at(&self, t: f64) -> Result<Vec<HermitianOperator>> {
        let h_jet = self.ham.jet_checked_at(t, self.n_max + 1)?;
        Ok(self
            .stack(&h_jet)
            .into_iter()
            .map(HermitianOperator::new_unchecked)
            .collect())
    }

    pub(crate) fn matrices_at(&self, t: f64) -> Vec<DMatrix<num_complex::Complex64>> {
        let h_jet = self.ham.jet_at(t, self.n_max + 1);
        self.stack(&h_jet)
    }

    fn stack(&self, h_jet: &MatrixJet) -> Vec<DMatrix<num_complex::Complex64>> {
        let mut out = Vec::with_capacity(self.n_max);
        let mut current = MatrixJet::constant(self.q.matrix().clone(), self.n_max + 1);
        out.push(current.value().clone());
        for _ in 1..self.n_max {
            current = h_jet.commutator_i(&current).add(&current.derivative_jet());
            out.push(current.value().clone());
        }
        out
    }
}

/// Frames from the operator-side derivative expansion evaluated with the
/// stored propagator. Exact up to the propagator itself.
pub fn frames_operator_side(
    traj: &PropagatorTrajectory,
    ham: &ControlHamiltonian,
    noise_dir: &HermitianOperator,
    basis: &OperatorBasis,
) -> Result<FrameSeries> {
    let d = basis.d();
    let stack = DerivativeOperators::new(ham, noise_dir, d.saturating_sub(1).max(1))?;
    let mut derivs_per_sample = Vec::with_capacity(traj.unitaries().len());
    for (k, r) in traj.unitaries().iter().enumerate() {
        let t = traj.grid().time(k);
        let ops = stack.matrices_at(t);
        let coords: Vec<DVector<f64>> = ops
            .iter()
            .map(|m| basis.coords_of_matrix(&(r.adjoint() * m * r)))
            .collect();
        derivs_per_sample.push(coords);
    }
    Ok(frames_from_derivatives(*traj.grid(), d, derivs_per_sample))
}

/// Frame at a single sample of a trajectory (used for closure conditions
/// and initial-frame projections).
pub fn frame_at_sample(
    traj: &PropagatorTrajectory,
    ham: &ControlHamiltonian,
    noise_dir: &HermitianOperator,
    basis: &OperatorBasis,
    k: usize,
) -> Result<FrenetFrame> {
    let d = basis.d();
    let t = traj.grid().time(k);
    let stack = DerivativeOperators::new(ham, noise_dir, d.saturating_sub(1).max(1))?;
    let r = traj.at(k);
    let derivs: Vec<DVector<f64>> = stack
        .matrices_at(t)
        .iter()
        .map(|m| basis.coords_of_matrix(&(r.adjoint() * m * r)))
        .collect();
    let (mut partial, rank, dropped) = gram_schmidt(&derivs);
    if rank < d - 1 {
        return Err(Error::DegenerateFrame { t, residual: dropped });
    }
    let last = complete_orientation(&partial).ok_or(Error::DegenerateFrame { t, residual: 0.0 })?;
    partial.push(last);
    Ok(FrenetFrame { vectors: partial })
}

/// Fallback route: frames from fourth-order finite differences of the
/// sampled curve coordinates.
pub fn frames_from_curve(curve: &ErrorCurve) -> Result<FrameSeries> {
    let d = curve.d();
    let n = curve.points().len();
    let min_len = fd::stencil_width(d - 1);
    if n < min_len {
        return Err(Error::invalid(format!(
            "curve too short for frame derivatives: {n} samples, need {min_len}"
        )));
    }
    let h = curve.grid().h();
    let mut all_orders: Vec<Vec<DVector<f64>>> = Vec::with_capacity(d - 1);
    for m in 1..d {
        all_orders.push(fd::derivative_samples(curve.points(), h, m));
    }
    let derivs_per_sample: Vec<Vec<DVector<f64>>> = (0..n)
        .map(|k| all_orders.iter().map(|o| o[k].clone()).collect())
        .collect();
    Ok(frames_from_derivatives(*curve.grid(), d, derivs_per_sample))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_completion_is_right_handed() {
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let v = complete_orientation(&[e1, e2]).unwrap();
        assert!((v[2] - 1.0).abs() < 1e-12);

        let e1 = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let v = complete_orientation(&[e1, e2]).unwrap();
        // det[z, y, v] = +1 requires v = -x
        assert!((v[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_detects_rank() {
        let v1 = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let v2 = DVector::from_vec(vec![1.0, 1e-12, 0.0]);
        let (frame, rank, dropped) = gram_schmidt(&[v1, v2]);
        assert_eq!(rank, 1);
        assert_eq!(frame.len(), 1);
        assert!(dropped < FRAME_DROP_TOL);
    }
}
