use nalgebra::{Matrix3, Vector3};

use super::AffineBranchMap;
use crate::error::{OttoError, Result};
use crate::state::{equilibrium_energy, BathSpec, StateVector};

/// Closed-form propagator of a constant-frequency branch in contact with `bath`.
///
/// The energy relaxes exponentially to its thermal value while (L, D) rotate
/// at `2 omega` inside an `exp(-Gamma t)` envelope.
pub fn isochore_map(bath: &BathSpec, omega: f64, tau: f64) -> Result<AffineBranchMap> {
    if !(bath.conductance >= 0.0) || !(tau >= 0.0) {
        return Err(OttoError::InvalidParameter(format!(
            "isochore needs Gamma >= 0 and tau >= 0, got Gamma = {}, tau = {tau}",
            bath.conductance
        )));
    }
    let h_eq = equilibrium_energy(omega, bath.temperature)?;
    let decay = (-bath.conductance * tau).exp();
    let (s, c) = (2.0 * omega * tau).sin_cos();
    #[rustfmt::skip]
    let matrix = Matrix3::new(
        decay, 0.0, 0.0,
        0.0, decay * c, -decay * 0.5 * omega * s,
        0.0, decay * 2.0 / omega * s, decay * c,
    );
    // (1 - e^{-x}) without cancellation for small x
    let relax = -(-bath.conductance * tau).exp_m1();
    Ok(AffineBranchMap {
        matrix,
        offset: Vector3::new(relax * h_eq, 0.0, 0.0),
        omega_in: omega,
        omega_out: omega,
        duration: tau,
    })
}

/// Heat flow into the medium, `-Gamma (H - H_eq)`.
pub fn heat_current(s: &StateVector, bath: &BathSpec) -> Result<f64> {
    let h_eq = equilibrium_energy(s.omega, bath.temperature)?;
    Ok(-bath.conductance * (s.energy - h_eq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::internal_temperature;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn relaxation_example() {
        let bath = BathSpec::new(5.0, 0.03);
        let map = isochore_map(&bath, 2.0, 6.0).unwrap();
        let out = map.apply(&StateVector::new(10.0, 0.0, 0.0, 2.0));
        assert_relative_eq!(out.energy, 9.187304, epsilon = 1e-6);
        assert_eq!(out.lagrangian, 0.0);
        assert_eq!(out.correlation, 0.0);
        assert_relative_eq!(map.spectral_radius(), (-0.18f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn zero_duration_is_identity() {
        let map = isochore_map(&BathSpec::new(1.0, 0.5), 1.3, 0.0).unwrap();
        assert_eq!(map.matrix, Matrix3::identity());
        assert_eq!(map.offset, Vector3::zeros());
    }

    #[test]
    fn half_period_flips_l_and_d() {
        let map = isochore_map(&BathSpec::new(1.0, 0.0), 1.0, PI / 2.0).unwrap();
        let out = map.apply(&StateVector::new(3.0, 1.0, 0.0, 1.0));
        assert_relative_eq!(out.energy, 3.0);
        assert_relative_eq!(out.lagrangian, -1.0, epsilon = 1e-14);
        assert!(out.correlation.abs() < 1e-14);
    }

    #[test]
    fn semigroup() {
        let bath = BathSpec::new(2.0, 0.2);
        let (t1, t2) = (0.7, 2.3);
        let a = isochore_map(&bath, 1.5, t1).unwrap();
        let b = isochore_map(&bath, 1.5, t2).unwrap();
        let ab = isochore_map(&bath, 1.5, t1 + t2).unwrap();
        let comp = a.then(&b);
        assert!((comp.matrix - ab.matrix).abs().max() < 1e-12);
        assert!((comp.offset - ab.offset).abs().max() < 1e-12);
    }

    #[test]
    fn long_contact_equilibrates() {
        let bath = BathSpec::new(2.0, 1.0);
        let out = isochore_map(&bath, 1.5, 60.0)
            .unwrap()
            .apply(&StateVector::new(9.0, 3.0, -2.0, 1.5));
        assert_relative_eq!(out.energy, equilibrium_energy(1.5, 2.0).unwrap(), epsilon = 1e-12);
        assert!(out.lagrangian.abs() < 1e-12 && out.correlation.abs() < 1e-12);
    }

    #[test]
    fn heat_current_examples() {
        let bath = BathSpec::new(5.0, 0.03);
        assert!(heat_current(&StateVector::thermal(2.0, 5.0).unwrap(), &bath).unwrap().abs() < 1e-15);
        let s = StateVector::thermal(2.0, 4.0).unwrap();
        assert_relative_eq!(internal_temperature(&s).unwrap(), 4.0, epsilon = 1e-12);
        assert_relative_eq!(heat_current(&s, &bath).unwrap(), 0.029505, epsilon = 1e-6);
        // Newtonian limit
        let hot = BathSpec::new(500.0, 0.1);
        let q = heat_current(&StateVector::thermal(1.0, 400.0).unwrap(), &hot).unwrap();
        assert!((q - 10.0).abs() / 10.0 < 1e-3);
    }
}
