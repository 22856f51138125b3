//! Time-ordered propagation, error-curve construction, infidelity, and
//! infidelity-vs-noise scaling fits.
//!
//! The generic integrator is a fourth-order Magnus stepper on two
//! Gauss-Legendre nodes; each step exponentiates an anti-Hermitian matrix
//! through a Hermitian eigendecomposition, so unitarity holds to roundoff.
//! Piecewise-constant pulses bypass the stepper entirely: each segment is
//! propagated by its exact eigendecomposed exponential.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::basis::OperatorBasis;
use crate::error::{Error, Result};
use crate::model::{ControlHamiltonian, NoiseSpec};
use crate::operator::HermitianOperator;

/// Uniform sampling of `[0, t_end]` into `steps` intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::invalid("grid t_end must be positive and finite"));
        }
        if steps < 2 {
            return Err(Error::invalid("grid needs at least 2 steps"));
        }
        Ok(TimeGrid { t_end, steps })
    }

    /// Grid sized so `h * scale <= target`; defaults elsewhere use
    /// `target = 0.02`.
    pub fn for_scale(t_end: f64, scale: f64, target: f64) -> Result<Self> {
        if !(target > 0.0) {
            return Err(Error::invalid("grid target must be positive"));
        }
        let steps = ((t_end * scale.max(1e-12) / target).ceil() as usize).max(4);
        TimeGrid::new(t_end, steps)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn h(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_end * k as f64 / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// Unitaries R(t_k) on a grid, with R(0) = identity.
#[derive(Clone, Debug)]
pub struct PropagatorTrajectory {
    grid: TimeGrid,
    unitaries: Vec<DMatrix<C64>>,
}

impl PropagatorTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn unitaries(&self) -> &[DMatrix<C64>] {
        &self.unitaries
    }

    pub fn at(&self, k: usize) -> &DMatrix<C64> {
        &self.unitaries[k]
    }

    pub fn final_unitary(&self) -> &DMatrix<C64> {
        self.unitaries.last().unwrap()
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].nrows()
    }

    /// Largest entry of `R^dagger R - 1` over all samples.
    pub fn max_unitarity_defect(&self) -> f64 {
        self.unitaries
            .iter()
            .map(|u| unitarity_defect(u))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((prod[(i, j)] - C64::new(want, 0.0)).norm());
        }
    }
    defect
}

/// `exp(-i H s)` for Hermitian `H` via eigendecomposition.
fn exp_minus_i_h(h: &DMatrix<C64>, s: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let dim = h.nrows();
    let mut phases = DMatrix::<C64>::zeros(dim, dim);
    for (i, lambda) in eig.eigenvalues.iter().enumerate() {
        phases[(i, i)] = C64::from_polar(1.0, -lambda * s);
    }
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

fn check_hermitian_sample(m: &DMatrix<C64>, t: f64) -> Result<()> {
    let n = m.nrows();
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
            scale = scale.max(m[(i, j)].norm());
        }
    }
    if defect > 1e-9 * (1.0 + scale) {
        return Err(Error::NonHermitianSample { t, defect });
    }
    Ok(())
}

const GL_NODE: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6

/// Time-ordered propagation of `H0(t) + offset` by the fourth-order
/// two-node Magnus stepper.
fn propagate_magnus(
    ham: &ControlHamiltonian,
    offset: Option<&DMatrix<C64>>,
    grid: TimeGrid,
) -> Result<PropagatorTrajectory> {
    let dim = ham.dim();
    let h = grid.h();
    let mut unitaries = Vec::with_capacity(grid.steps() + 1);
    unitaries.push(DMatrix::<C64>::identity(dim, dim));
    let sample = |t: f64| -> DMatrix<C64> {
        let mut m = ham.matrix_at(t);
        if let Some(o) = offset {
            m += o;
        }
        m
    };
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let a1 = sample(t + (0.5 - GL_NODE) * h);
        let a2 = sample(t + (0.5 + GL_NODE) * h);
        check_hermitian_sample(&a1, t + (0.5 - GL_NODE) * h)?;
        check_hermitian_sample(&a2, t + (0.5 + GL_NODE) * h)?;
        // Fourth-order Magnus exponent: -i h (A1+A2)/2 + sqrt(3) h^2 [A1,A2]/12.
        // Written as exp(-i M) with Hermitian M.
        let comm = &a1 * &a2 - &a2 * &a1;
        let m = (&a1 + &a2) * C64::new(0.5 * h, 0.0)
            + comm * C64::new(0.0, 3f64.sqrt() * h * h / 12.0);
        let step = exp_minus_i_h(&m, 1.0);
        let next = &step * unitaries.last().unwrap();
        unitaries.push(next);
    }
    Ok(PropagatorTrajectory { grid, unitaries })
}

/// Segment-exact propagation for piecewise-constant controls: each constant
/// segment is eigendecomposed once and sampled by closed-form exponentials,
/// so step transitions introduce no integration error.
fn propagate_piecewise(
    ham: &ControlHamiltonian,
    offset: Option<&DMatrix<C64>>,
    grid: TimeGrid,
) -> Result<PropagatorTrajectory> {
    let dim = ham.dim();
    let square = ham.controls()[0]
        .1
        .as_square()
        .expect("piecewise propagation requires a square pulse");
    let control_op = ham.controls()[0].0.matrix().clone();

    struct Segment {
        start: f64,
        end: f64,
        eig: SymmetricEigen<C64, nalgebra::Dyn>,
        r_start: DMatrix<C64>,
    }

    let mut segments: Vec<Segment> = Vec::new();
    let mut r = DMatrix::<C64>::identity(dim, dim);
    for (start, seg) in square.expanded() {
        let mut m = ham.drift().matrix() + &control_op * C64::new(seg.amplitude, 0.0);
        if let Some(o) = offset {
            m += o;
        }
        let eig = SymmetricEigen::new(m);
        let r_start = r.clone();
        // advance R to the end of this segment
        let mut phases = DMatrix::<C64>::zeros(dim, dim);
        for (i, lambda) in eig.eigenvalues.iter().enumerate() {
            phases[(i, i)] = C64::from_polar(1.0, -lambda * seg.duration);
        }
        r = &eig.eigenvectors * phases * eig.eigenvectors.adjoint() * &r;
        segments.push(Segment {
            start,
            end: start + seg.duration,
            eig,
            r_start,
        });
    }

    let mut unitaries = Vec::with_capacity(grid.steps() + 1);
    let mut seg_idx = 0usize;
    for k in 0..=grid.steps() {
        let t = grid.time(k);
        while seg_idx + 1 < segments.len() && t >= segments[seg_idx].end {
            seg_idx += 1;
        }
        let seg = &segments[seg_idx];
        let tau = (t - seg.start).max(0.0);
        let mut phases = DMatrix::<C64>::zeros(dim, dim);
        for (i, lambda) in seg.eig.eigenvalues.iter().enumerate() {
            phases[(i, i)] = C64::from_polar(1.0, -lambda * tau);
        }
        let u = &seg.eig.eigenvectors * phases * seg.eig.eigenvectors.adjoint() * &seg.r_start;
        unitaries.push(u);
    }
    Ok(PropagatorTrajectory { grid, unitaries })
}

/// Noiseless propagator R(t_k): segment-exact for piecewise-constant
/// controls, Magnus-4 otherwise.
pub fn propagate(ham: &ControlHamiltonian, grid: TimeGrid) -> Result<PropagatorTrajectory> {
    if ham.is_piecewise_constant() {
        propagate_piecewise(ham, None, grid)
    } else {
        propagate_magnus(ham, None, grid)
    }
}

/// Noisy propagator U(t_k) for `H0(t) + eps Q` with quasi-static noise.
pub fn noisy_propagate(
    ham: &ControlHamiltonian,
    noise: &NoiseSpec,
    grid: TimeGrid,
) -> Result<PropagatorTrajectory> {
    if noise.direction().dim() != ham.dim() {
        return Err(Error::DimensionMismatch {
            left: ham.dim(),
            right: noise.direction().dim(),
        });
    }
    let offset = noise.direction().matrix() * C64::new(noise.strength(), 0.0);
    if ham.is_piecewise_constant() {
        propagate_piecewise(ham, Some(&offset), grid)
    } else {
        propagate_magnus(ham, Some(&offset), grid)
    }
}

/// Time-sampled error curve: coordinates of the accumulated interaction
/// integral in an orthonormal operator basis. G(0) = 0 and |dG/dt| = 1.
#[derive(Clone, Debug)]
pub struct ErrorCurve {
    basis: OperatorBasis,
    points: Vec<DVector<f64>>,
    grid: TimeGrid,
}

impl ErrorCurve {
    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn d(&self) -> usize {
        self.basis.d()
    }

    pub fn endpoint(&self) -> &DVector<f64> {
        self.points.last().unwrap()
    }

    /// |G(T)|: zero iff first-order error cancels.
    pub fn closure_residual(&self) -> f64 {
        self.endpoint().norm()
    }

    pub(crate) fn from_parts(
        basis: OperatorBasis,
        points: Vec<DVector<f64>>,
        grid: TimeGrid,
    ) -> Self {
        ErrorCurve { basis, points, grid }
    }

    /// Max deviation of |dG/dt| from 1, with fourth-order derivative
    /// estimates.
    pub fn max_speed_deviation(&self) -> f64 {
        let v = crate::geometry::fd::derivative_samples(&self.points, self.grid.h(), 1);
        v.iter()
            .map(|d| (d.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Cumulative integral of vector samples on a uniform grid, fourth order
/// (three-interval Newton-Cotes rules at the ends, centered rule inside).
fn cumulative_integral(f: &[DVector<f64>], h: f64) -> Vec<DVector<f64>> {
    let n = f.len();
    let dim = f[0].len();
    let mut out = Vec::with_capacity(n);
    out.push(DVector::zeros(dim));
    if n == 1 {
        return out;
    }
    if n < 4 {
        // Short grids: trapezoid (second order). Callers size real grids
        // far above this.
        for k in 1..n {
            let inc = (&f[k - 1] + &f[k]) * (0.5 * h);
            let prev = &out[k - 1];
            out.push(prev + inc);
        }
        return out;
    }
    for k in 1..n {
        let inc = if k == 1 {
            (&f[0] * 9.0 + &f[1] * 19.0 - &f[2] * 5.0 + &f[3]) * (h / 24.0)
        } else if k == n - 1 {
            (&f[n - 1] * 9.0 + &f[n - 2] * 19.0 - &f[n - 3] * 5.0 + &f[n - 4]) * (h / 24.0)
        } else {
            (-&f[k - 2] + &f[k - 1] * 13.0 + &f[k] * 13.0 - &f[k + 1]) * (h / 24.0)
        };
        let prev = &out[k - 1];
        out.push(prev + inc);
    }
    out
}

/// Error curve of a trajectory: G(t_k) are the coordinates of
/// `int_0^t R^dagger Q R dtau` in `basis`. Errors if the basis fails to span
/// the interaction operator.
pub fn error_curve(
    traj: &PropagatorTrajectory,
    noise_dir: &HermitianOperator,
    basis: &OperatorBasis,
) -> Result<ErrorCurve> {
    if noise_dir.dim() != traj.dim() || basis.dim_space() != traj.dim() {
        return Err(Error::DimensionMismatch {
            left: traj.dim(),
            right: noise_dir.dim().max(basis.dim_space()),
        });
    }
    if (noise_dir.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("noise direction must have unit norm"));
    }
    let q = noise_dir.matrix();
    let dim = traj.dim();
    let mut integrand = Vec::with_capacity(traj.unitaries().len());
    for (k, r) in traj.unitaries().iter().enumerate() {
        let m = r.adjoint() * q * r;
        let coords = basis.coords_of_matrix(&m);
        // span check: reconstruct and subtract
        let mut residual = m;
        for (c, e) in coords.iter().zip(basis.elements()) {
            residual -= e.operator().matrix() * C64::new(*c, 0.0);
        }
        let residual = (residual.norm_squared() / dim as f64).sqrt();
        if residual > 1e-8 {
            return Err(Error::BasisSpan {
                t: traj.grid().time(k),
                residual,
            });
        }
        integrand.push(coords);
    }
    let points = cumulative_integral(&integrand, traj.grid().h());
    Ok(ErrorCurve {
        basis: basis.clone(),
        points,
        grid: *traj.grid(),
    })
}

/// Raw distance |U - R| under the normalized-trace norm, plus the
/// phase-minimized variant `min_phi |U - e^{i phi} R|`.
#[derive(Clone, Copy, Debug)]
pub struct Infidelity {
    pub raw: f64,
    pub phase_min: f64,
}

pub fn infidelity(u: &DMatrix<C64>, r: &DMatrix<C64>) -> Result<Infidelity> {
    if u.nrows() != r.nrows() || u.nrows() != u.ncols() || r.nrows() != r.ncols() {
        return Err(Error::DimensionMismatch {
            left: u.nrows(),
            right: r.nrows(),
        });
    }
    for m in [u, r] {
        let defect = unitarity_defect(m);
        if defect > 1e-8 {
            return Err(Error::NotUnitary { defect });
        }
    }
    let dim = u.nrows() as f64;
    let raw = ((u - r).norm_squared() / dim).sqrt();
    let overlap = u.dotc(r); // tr(U^dagger R)
    let phase_min = (2.0 - 2.0 * overlap.norm() / dim).max(0.0).sqrt();
    Ok(Infidelity { raw, phase_min })
}

/// One point of an infidelity sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub infidelity: f64,
    pub infidelity_phase_min: f64,
}

/// Least-squares log-log fit of infidelity against noise strength.
#[derive(Clone, Debug)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<SweepPoint>,
    /// Strengths dropped because the infidelity underflowed 1e-14.
    pub dropped: Vec<f64>,
}

/// Sweeps the noise strength, propagating the noisy Hamiltonian at each
/// epsilon (in parallel) and fitting log(infidelity) vs log(epsilon).
/// Requires positive strengths spanning at least two decades.
pub fn scaling_exponent(
    ham: &ControlHamiltonian,
    noise: &NoiseSpec,
    epsilons: &[f64],
    grid: TimeGrid,
) -> Result<ScalingFit> {
    if epsilons.is_empty() {
        return Err(Error::invalid("epsilon list cannot be empty"));
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::invalid("epsilons must be positive"));
    }
    let lo = epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = epsilons.iter().cloned().fold(0.0, f64::max);
    if hi / lo < 99.9 {
        return Err(Error::DegenerateFit(format!(
            "epsilons must span at least two decades (got ratio {:.3e})",
            hi / lo
        )));
    }
    let reference = propagate(ham, grid)?;
    let r_final = reference.final_unitary();

    let evaluated: Vec<Result<SweepPoint>> = epsilons
        .par_iter()
        .map(|&eps| {
            let spec = noise.with_strength(eps)?;
            let noisy = noisy_propagate(ham, &spec, grid)?;
            let inf = infidelity(noisy.final_unitary(), r_final)?;
            Ok(SweepPoint {
                epsilon: eps,
                infidelity: inf.raw,
                infidelity_phase_min: inf.phase_min,
            })
        })
        .collect();

    let mut points = Vec::with_capacity(epsilons.len());
    let mut dropped = Vec::new();
    for p in evaluated {
        let p = p?;
        if p.infidelity < 1e-14 {
            // below the integrator/precision floor: fit would be garbage
            dropped.push(p.epsilon);
        } else {
            points.push(p);
        }
    }
    if points.len() < 2 {
        return Err(Error::DegenerateFit(
            "fewer than two usable sweep points above the precision floor".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.epsilon.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.infidelity.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(Error::DegenerateFit("epsilons have no spread".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    Ok(ScalingFit {
        slope,
        intercept,
        points,
        dropped,
    })
}

/// Log-spaced strengths, the default sweep layout.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IsingModel;
    use crate::pulse::{LorentzianTerm, PulseSegment, PulseShape, SmoothPulse, SquarePulseSequence};

    fn const_x_ham(omega: f64, t_end: f64) -> ControlHamiltonian {
        let x = HermitianOperator::from_pauli(&"X".parse().unwrap());
        let pulse = PulseShape::Square(
            SquarePulseSequence::new(
                vec![PulseSegment { amplitude: omega, duration: t_end }],
                1,
            )
            .unwrap(),
        );
        ControlHamiltonian::new(HermitianOperator::zeros(2), vec![(x, pulse)]).unwrap()
    }

    #[test]
    fn constant_x_rotation_closed_form() {
        // exp(-i pi X) = -identity at t = pi/Omega.
        let omega = 0.8;
        let ham = const_x_ham(omega, std::f64::consts::PI / omega);
        let grid = TimeGrid::new(std::f64::consts::PI / omega, 100).unwrap();
        let traj = propagate(&ham, grid).unwrap();
        let want = DMatrix::<C64>::identity(2, 2) * C64::new(-1.0, 0.0);
        assert!((traj.final_unitary() - want).norm() < 1e-12);
        assert!(traj.max_unitarity_defect() < 1e-12);
    }

    #[test]
    fn diagonal_hamiltonian_phases() {
        let model = IsingModel::new(0.5, 1.0).unwrap();
        let pulse = PulseShape::Square(
            SquarePulseSequence::new(
                vec![PulseSegment { amplitude: 0.0, duration: 2.0 }],
                1,
            )
            .unwrap(),
        );
        let ham = model.hamiltonian(pulse).unwrap();
        let grid = TimeGrid::new(2.0, 50).unwrap();
        let traj = propagate(&ham, grid).unwrap();
        let t = 2.0;
        let u = traj.final_unitary();
        for (i, e) in [(0usize, 0.5), (1, -0.5), (2, 1.0), (3, -1.0)] {
            let want = C64::from_polar(1.0, -e * t);
            assert!((u[(i, i)] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn magnus_stepper_is_fourth_order() {
        // Self-convergence against a 4x finer reference on a smooth pulse.
        let model = IsingModel::new(0.5, 1.0).unwrap();
        let pulse = PulseShape::Smooth(
            SmoothPulse::new(
                1.0,
                vec![LorentzianTerm { c: 0.7, a: 1.4, phi: 0.5 }],
                2.0,
                1,
            )
            .unwrap(),
        );
        let ham = model.hamiltonian(pulse).unwrap();
        let t_end = 2.0;
        let reference = propagate(&ham, TimeGrid::new(t_end, 1600).unwrap()).unwrap();
        let coarse = propagate(&ham, TimeGrid::new(t_end, 100).unwrap()).unwrap();
        let fine = propagate(&ham, TimeGrid::new(t_end, 200).unwrap()).unwrap();
        let e_coarse = (coarse.final_unitary() - reference.final_unitary()).norm();
        let e_fine = (fine.final_unitary() - reference.final_unitary()).norm();
        let order = (e_coarse / e_fine).log2();
        assert!(
            order >= 3.8,
            "observed convergence order {order:.2} (errors {e_coarse:.3e}, {e_fine:.3e})"
        );
    }

    #[test]
    fn single_qubit_circle_curve() {
        // Constant X drive with Z noise: circle of radius 1/(2 Omega)
        // closing at t = pi/Omega.
        let omega = 1.3;
        let t_end = std::f64::consts::PI / omega;
        let ham = const_x_ham(omega, t_end);
        let grid = TimeGrid::for_scale(t_end, omega, 0.01).unwrap();
        let traj = propagate(&ham, grid).unwrap();
        let z = HermitianOperator::from_pauli(&"Z".parse().unwrap());
        let x = HermitianOperator::from_pauli(&"X".parse().unwrap());
        let basis = crate::basis::error_subspace(&[x], &z).unwrap();
        assert_eq!(basis.d(), 2);
        let curve = error_curve(&traj, &z, &basis).unwrap();

        // G(0) = 0 and the curve closes at the end.
        assert!(curve.points()[0].norm() == 0.0);
        assert!(curve.closure_residual() < 1e-9);

        // radius check at the halfway point: diameter 2 * 1/(2 Omega)
        let mid = &curve.points()[grid.steps() / 2];
        assert!((mid.norm() - 1.0 / omega).abs() < 1e-8);

        // analytic circle: G = (sin(2 w t)/(2 w), (1 - cos(2 w t))/(2 w))
        for (k, p) in curve.points().iter().enumerate().step_by(25) {
            let t = grid.time(k);
            let want_z = (2.0 * omega * t).sin() / (2.0 * omega);
            let want_y = (1.0 - (2.0 * omega * t).cos()) / (2.0 * omega);
            assert!((p[0] - want_z).abs() < 1e-9, "sample {k}");
            assert!((p[1] - want_y).abs() < 1e-9, "sample {k}");
        }

        assert!(curve.max_speed_deviation() < 1e-6);
    }

    #[test]
    fn noisy_propagation_matches_constant_closed_form() {
        // H0 = 0, noise Z2 at strength eps: U(t) = exp(-i eps Z2 t).
        let zero = ControlHamiltonian::new(HermitianOperator::zeros(4), vec![]).unwrap();
        let noise = NoiseSpec::from_pauli(&"IZ".parse().unwrap(), 0.3).unwrap();
        let grid = TimeGrid::new(1.5, 40).unwrap();
        let traj = noisy_propagate(&zero, &noise, grid).unwrap();
        let u = traj.final_unitary();
        for (i, sign) in [(0usize, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)] {
            let want = C64::from_polar(1.0, -sign * 0.3 * 1.5);
            assert!((u[(i, i)] - want).norm() < 1e-11);
        }
        // eps = 0 reduces to the noiseless propagator.
        let silent = NoiseSpec::from_pauli(&"IZ".parse().unwrap(), 0.0).unwrap();
        let a = noisy_propagate(&zero, &silent, grid).unwrap();
        let b = propagate(&zero, grid).unwrap();
        assert!((a.final_unitary() - b.final_unitary()).norm() < 1e-14);
    }

    #[test]
    fn infidelity_examples() {
        let id = DMatrix::<C64>::identity(2, 2);
        let inf = infidelity(&id, &id).unwrap();
        assert!(inf.raw == 0.0 && inf.phase_min < 1e-9);
        let minus = &id * C64::new(-1.0, 0.0);
        let inf = infidelity(&minus, &id).unwrap();
        assert!((inf.raw - 2.0).abs() < 1e-14);
        assert!(inf.phase_min < 1e-7);
        let mut bad = id.clone();
        bad[(0, 0)] = C64::new(2.0, 0.0);
        assert!(matches!(infidelity(&bad, &id), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn sweep_validation() {
        let ham = const_x_ham(1.0, 1.0);
        let noise = NoiseSpec::from_pauli(&"Z".parse().unwrap(), 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 30).unwrap();
        // single epsilon: degenerate
        assert!(matches!(
            scaling_exponent(&ham, &noise, &[1e-3], grid),
            Err(Error::DegenerateFit(_))
        ));
        // narrow span: degenerate
        assert!(scaling_exponent(&ham, &noise, &[1e-3, 2e-3], grid).is_err());
        // open curve: slope near 1
        let eps = log_spaced(1e-4, 1e-2, 9);
        let fit = scaling_exponent(&ham, &noise, &eps, grid).unwrap();
        assert!(
            (fit.slope - 1.0).abs() < 0.1,
            "expected linear scaling, slope = {:.3}",
            fit.slope
        );
    }

    #[test]
    fn piecewise_matches_magnus_on_square_pulse() {
        let model = IsingModel::new(0.5, 1.0).unwrap();
        let pulse = PulseShape::Square(
            SquarePulseSequence::new(
                vec![
                    PulseSegment { amplitude: 0.9, duration: 0.7 },
                    PulseSegment { amplitude: -0.4, duration: 0.5 },
                ],
                2,
            )
            .unwrap(),
        );
        let ham = model.hamiltonian(pulse).unwrap();
        let t_end = ham.duration().unwrap();
        let exact = propagate(&ham, TimeGrid::new(t_end, 240).unwrap()).unwrap();
        // Magnus on a fine grid aligned with the segment boundaries
        let magnus = propagate_magnus(&ham, None, TimeGrid::new(t_end, 4800).unwrap()).unwrap();
        assert!((exact.final_unitary() - magnus.final_unitary()).norm() < 1e-10);
        assert!(exact.max_unitarity_defect() < 1e-12);
    }
}
