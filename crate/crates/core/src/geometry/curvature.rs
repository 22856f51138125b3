//! Generalized curvatures: numerically from frame series, and in closed
//! form for the two-qubit Ising model.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::propagation::{ErrorCurve, TimeGrid};

use super::fd;
use super::frames::FrameSeries;

/// Curvatures kappa_1..kappa_{d-1} per sample. By convention the first d-2
/// are nonnegative and the last is signed (it tracks the handedness fixed
/// by the frame orientation). Samples without a well-conditioned frame, or
/// whose differentiation stencil touches one, carry no value.
#[derive(Clone, Debug)]
pub struct CurvatureProfile {
    grid: TimeGrid,
    d: usize,
    kappas: Vec<Option<DVector<f64>>>,
}

impl CurvatureProfile {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Curve dimension d; the profile holds d-1 curvatures per sample.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kappas(&self) -> &[Option<DVector<f64>>] {
        &self.kappas
    }

    pub fn at(&self, k: usize) -> Option<&DVector<f64>> {
        self.kappas[k].as_ref()
    }

    pub fn valid_count(&self) -> usize {
        self.kappas.iter().filter(|k| k.is_some()).count()
    }

    pub(crate) fn from_parts(grid: TimeGrid, d: usize, kappas: Vec<Option<DVector<f64>>>) -> Self {
        CurvatureProfile { grid, d, kappas }
    }
}

/// Curvatures from a frame series by the defining rate equations:
/// `kappa_n = d(e_n)/dt . e_{n+1}`, with fourth-order differentiation of
/// the frame vectors inside runs of valid frames.
pub fn curvatures_numeric(series: &FrameSeries) -> Result<CurvatureProfile> {
    let d = series.d();
    let n = series.frames().len();
    let h = series.grid().h();
    let width = fd::stencil_width(1);
    let mut kappas: Vec<Option<DVector<f64>>> = vec![None; n];

    // contiguous runs of valid frames
    let mut run_start = None;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for k in 0..=n {
        let valid = k < n && series.frame(k).is_some();
        match (run_start, valid) {
            (None, true) => run_start = Some(k),
            (Some(s), false) => {
                runs.push((s, k));
                run_start = None;
            }
            _ => {}
        }
    }

    let xs: Vec<f64> = (0..width).map(|j| j as f64).collect();
    for (s, e) in runs {
        if e - s < width {
            continue; // too short to differentiate; stays flagged
        }
        for k in s..e {
            // differentiation window around k, kept inside the run
            let half = width / 2;
            let start = k.saturating_sub(half).max(s).min(e - width);
            let mut weights = fd::fd_weights((k - start) as f64, &xs, 1);
            for w in &mut weights {
                *w /= h;
            }
            let frame_k = series.frame(k).expect("run is valid");
            let mut out = DVector::zeros(d - 1);
            for nvec in 0..d - 1 {
                let mut deriv = DVector::zeros(d);
                for (j, w) in weights.iter().enumerate() {
                    let frame = series.frame(start + j).expect("run is valid");
                    deriv += &frame.vectors()[nvec] * *w;
                }
                out[nvec] = deriv.dot(&frame_k.vectors()[nvec + 1]);
            }
            kappas[k] = Some(out);
        }
    }
    Ok(CurvatureProfile::from_parts(*series.grid(), d, kappas))
}

/// Closed-form curvatures of the driven Ising model: for splittings E1, E2
/// and drive value/slope (Omega, dOmega/dt),
///
/// ```text
/// kappa_1 = 2 |Omega|
/// kappa_2 = sqrt(2 (E1^2 + E2^2))
/// kappa_3 = sqrt(2) |E1^2 - E2^2| / sqrt(E1^2 + E2^2)
/// kappa_4 = 2 sqrt(Omega^2 + 2 E1^2 E2^2 / (E1^2 + E2^2))
/// kappa_5 = E1 E2 sqrt(2 (E1^2 + E2^2))
///           / (Omega^2 (E1^2 + E2^2) + 2 E1^2 E2^2) * dOmega/dt
/// ```
///
/// kappa_5 carries the sign of the slope; the others are nonnegative.
pub fn ising_curvatures(e1: f64, e2: f64, omega: f64, domega: f64) -> Result<[f64; 5]> {
    let s = e1 * e1 + e2 * e2;
    if s < 1e-24 {
        return Err(Error::Degeneracy(
            "E1 = E2 = 0 leaves the curvature formulas singular".into(),
        ));
    }
    let kappa1 = 2.0 * omega.abs();
    let kappa2 = (2.0 * s).sqrt();
    let kappa3 = std::f64::consts::SQRT_2 * (e1 * e1 - e2 * e2).abs() / s.sqrt();
    let prod = e1 * e1 * e2 * e2;
    let kappa4 = 2.0 * (omega * omega + 2.0 * prod / s).sqrt();
    let denom = omega * omega * s + 2.0 * prod;
    let kappa5 = if denom < 1e-24 {
        // only reachable when E1 E2 = 0 and Omega = 0; the e5-e6 rotation
        // rate is then identically zero
        0.0
    } else {
        e1 * e2 * (2.0 * s).sqrt() / denom * domega
    };
    Ok([kappa1, kappa2, kappa3, kappa4, kappa5])
}

/// |G(T)|, the endpoint distance from the origin; zero iff the first-order
/// error cancels.
pub fn closure_residual(curve: &ErrorCurve) -> f64 {
    curve.closure_residual()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let k = ising_curvatures(0.5, 1.0, 1.0, 0.0).unwrap();
        assert!((k[0] - 2.0).abs() < 1e-12);
        assert!((k[1] - 2.5f64.sqrt()).abs() < 1e-12);
        assert!((k[2] - 2.0f64.sqrt() * 0.75 / 1.25f64.sqrt()).abs() < 1e-12);
        assert!((k[3] - 2.0 * 1.4f64.sqrt()).abs() < 1e-12);
        assert!(k[4].abs() < 1e-12);
        // numeric spot values
        assert!((k[1] - 1.5811388300841898).abs() < 1e-12);
        assert!((k[2] - 0.9486832980505138).abs() < 1e-12);
        assert!((k[3] - 2.366431913239846).abs() < 1e-12);
    }

    #[test]
    fn equal_splittings_kill_kappa3() {
        let k = ising_curvatures(0.7, 0.7, 1.3, 0.4).unwrap();
        assert!(k[2].abs() < 1e-14);
        assert!(k[4] > 0.0);
    }

    #[test]
    fn zero_drive_kills_kappa1_and_signs_track_slope() {
        let k = ising_curvatures(0.5, 1.0, 0.0, 0.0).unwrap();
        assert!(k[0].abs() < 1e-14);
        let up = ising_curvatures(0.5, 1.0, 1.0, 0.8).unwrap();
        let down = ising_curvatures(0.5, 1.0, 1.0, -0.8).unwrap();
        assert!(up[4] > 0.0 && down[4] < 0.0);
        assert!((up[4] + down[4]).abs() < 1e-14);
    }

    #[test]
    fn degenerate_parameters_error() {
        assert!(ising_curvatures(0.0, 0.0, 1.0, 0.0).is_err());
    }
}
