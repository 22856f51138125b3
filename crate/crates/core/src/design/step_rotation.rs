//! The e5-e6 frame rotation caused by an instantaneous amplitude step.
//!
//! A step from Omega1 to Omega2 concentrates the fifth curvature into a
//! delta function; the accumulated rotation angle has the closed form
//! `phi = arctan(s Omega2) - arctan(s Omega1)` with
//! `s = sqrt((E1^2 + E2^2)/2) / (E1 E2)`, which is the antiderivative of
//! the kappa_5 rate integrated over the step.

use crate::error::{Error, Result};

/// Closed-form step rotation angle; errors when E1 E2 = 0 (the e5-e6 plane
/// is undefined there).
pub fn step_rotation_angle(omega1: f64, omega2: f64, e1: f64, e2: f64) -> Result<f64> {
    let prod = e1 * e2;
    if prod == 0.0 || !prod.is_finite() {
        return Err(Error::Degeneracy(
            "step rotation requires E1 * E2 != 0".into(),
        ));
    }
    let s = ((e1 * e1 + e2 * e2) / 2.0).sqrt() / prod;
    Ok((s * omega2).atan() - (s * omega1).atan())
}

/// The kappa_5 rate as a function of the amplitude, integrated by
/// [`step_rotation_angle`]'s closed form.
pub fn step_rotation_integrand(omega: f64, e1: f64, e2: f64) -> f64 {
    let s = e1 * e1 + e2 * e2;
    e1 * e2 * (2.0 * s).sqrt() / (omega * omega * s + 2.0 * e1 * e1 * e2 * e2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turn_for_unit_parameters() {
        // Omega: 0 -> 1 with E1 = E2 = 1 gives s = 1 and phi = pi/4.
        let phi = step_rotation_angle(0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((phi - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn no_step_no_rotation() {
        let phi = step_rotation_angle(0.7, 0.7, 0.5, 1.0).unwrap();
        assert!(phi.abs() < 1e-15);
    }

    #[test]
    fn odd_symmetry() {
        // Omega: -a -> +a gives 2 arctan(s a).
        let (e1, e2, a) = (0.5, 1.0, 1.3);
        let s = ((e1 * e1 + e2 * e2) / 2.0f64).sqrt() / (e1 * e2);
        let phi = step_rotation_angle(-a, a, e1, e2).unwrap();
        assert!((phi - 2.0 * (s * a).atan()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_splittings_error() {
        assert!(step_rotation_angle(0.0, 1.0, 0.0, 1.0).is_err());
    }
}
