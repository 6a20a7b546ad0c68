//! Branch propagators acting on the (H, L, D) observables.

mod adiabat;
mod affine;
mod isochore;

pub use adiabat::{
    adiabat_map_numeric, adiabat_map_quasistatic, adiabat_map_sudden, adiabat_quasistatic_correction,
    adiabat_solve, adiabat_trajectory, quasistatic_energy_at, AdiabatSample, AdiabatSchedule, AdiabatSolution,
};
pub use affine::AffineBranchMap;
pub use isochore::{heat_current, isochore_map};

use crate::cycle::EngineSpec;
use crate::state::StateVector;

/// Power split along an adiabat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub total: f64,
    pub external: f64,
    pub friction: f64,
}

/// `dE/dt = alpha (H - L)`: the external part `alpha H` plus the friction part `-alpha L`.
pub fn instantaneous_power(s: &StateVector, alpha: f64) -> PowerSplit {
    let external = alpha * s.energy;
    let friction = -alpha * s.lagrangian;
    PowerSplit {
        total: external + friction,
        external,
        friction,
    }
}

/// Evaluation mode for closed-form expressions that have a high-temperature limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaMode {
    Exact,
    HighTemperature,
}

/// Phase-averaged friction work on both adiabats of a cycle with fully
/// equilibrated corners and `D = 0` at the start of each adiabat, to second
/// order in `alpha/omega`.
pub fn friction_work_closed_form(engine: &EngineSpec, alpha: f64, mode: FormulaMode) -> f64 {
    let (wh, wc) = (engine.omega_h, engine.omega_c);
    let (th, tc) = (engine.hot.temperature, engine.cold.temperature);
    match mode {
        FormulaMode::Exact => {
            let coth = |x: f64| 1.0 / x.tanh();
            0.125
                * ((alpha / wh).powi(2) * wc * coth(wh / (2.0 * th))
                    + (alpha / wc).powi(2) * wh * coth(wc / (2.0 * tc)))
        }
        FormulaMode::HighTemperature => {
            let c = wh / wc;
            0.25 * th * (alpha / wc).powi(2) * (c.powi(-3) + c * tc / th)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::BathSpec;
    use approx::assert_relative_eq;

    fn engine(wh: f64, wc: f64, th: f64, tc: f64) -> EngineSpec {
        EngineSpec::new(wh, wc, BathSpec::new(th, 1.0), BathSpec::new(tc, 1.0)).unwrap()
    }

    #[test]
    #[allow(clippy::approx_constant)] // the rate is a pinned example value
    fn power_examples() {
        let zero = instantaneous_power(&StateVector::new(2.0, 0.5, 0.1, 1.0), 0.0);
        assert_eq!((zero.total, zero.external, zero.friction), (0.0, 0.0, -0.0));
        let p = instantaneous_power(&StateVector::new(2.0, 2.0, 0.0, 1.0), 0.3);
        assert_eq!(p.total, 0.0);
        let p = instantaneous_power(&StateVector::new(2.0, 0.5, 0.0, 1.0), -0.6931);
        assert_relative_eq!(p.total, -1.03965, epsilon = 1e-5);
    }

    #[test]
    fn friction_closed_forms() {
        let e = engine(2.0, 1.0, 5.0, 1.0);
        assert_relative_eq!(
            friction_work_closed_form(&e, 0.5, FormulaMode::HighTemperature),
            0.1640625,
            epsilon = 1e-12
        );
        assert_eq!(friction_work_closed_form(&e, 0.0, FormulaMode::Exact), 0.0);
        let hot = engine(2.0, 1.0, 200.0, 40.0);
        let exact = friction_work_closed_form(&hot, 0.5, FormulaMode::Exact);
        let high = friction_work_closed_form(&hot, 0.5, FormulaMode::HighTemperature);
        assert!((exact - high).abs() < 0.01 * high);
        assert!(exact > 0.0);
    }
}
