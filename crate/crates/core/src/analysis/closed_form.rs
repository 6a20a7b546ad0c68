use crate::cycle::EngineSpec;
use crate::error::{OttoError, Result};
use crate::propagators::FormulaMode;

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// `G_W`: the work scale of the quasistatic cycle, `W_q = -G_W F`.
pub fn g_work(engine: &EngineSpec, mode: FormulaMode) -> f64 {
    let (wh, wc) = (engine.omega_h, engine.omega_c);
    let (th, tc) = (engine.hot.temperature, engine.cold.temperature);
    match mode {
        FormulaMode::Exact => 0.5 * (wh - wc) * (coth(wh / (2.0 * th)) - coth(wc / (2.0 * tc))),
        FormulaMode::HighTemperature => {
            let c = wh / wc;
            tc * (1.0 - c) + th * (1.0 - 1.0 / c)
        }
    }
}

/// Heat-transport factor `F(x_c, x_h) = (e^{x_c}-1)(e^{x_h}-1)/(e^{x_c+x_h}-1)`
/// with `x = Gamma tau`; infinite arguments are allowed.
pub fn f_transport(x_c: f64, x_h: f64) -> Result<f64> {
    if !(x_c >= 0.0) || !(x_h >= 0.0) {
        return Err(OttoError::InvalidParameter(format!(
            "transport factor needs x >= 0, got x_c = {x_c}, x_h = {x_h}"
        )));
    }
    if x_c == 0.0 || x_h == 0.0 {
        return Ok(0.0);
    }
    // divide through by e^{x_c + x_h} so nothing overflows
    let one_minus = |x: f64| -(-x).exp_m1();
    Ok(one_minus(x_c) * one_minus(x_h) / one_minus(x_c + x_h))
}

/// Work per quasistatic cycle, `-G_W F`.
pub fn quasistatic_work(engine: &EngineSpec, x_c: f64, x_h: f64, mode: FormulaMode) -> Result<f64> {
    Ok(-g_work(engine, mode) * f_transport(x_c, x_h)?)
}

/// `G_S`: the entropy-production scale, `Delta S_u = G_S F`.
pub fn g_entropy(engine: &EngineSpec, mode: FormulaMode) -> f64 {
    let (wh, wc) = (engine.omega_h, engine.omega_c);
    let (th, tc) = (engine.hot.temperature, engine.cold.temperature);
    match mode {
        FormulaMode::Exact => 0.5 * (wh / th - wc / tc) * (coth(wc / (2.0 * tc)) - coth(wh / (2.0 * th))),
        FormulaMode::HighTemperature => {
            let c = wh / wc;
            c * tc / th + th / (c * tc) - 2.0
        }
    }
}

pub fn entropy_production_quasistatic(engine: &EngineSpec, x_c: f64, x_h: f64, mode: FormulaMode) -> Result<f64> {
    Ok(g_entropy(engine, mode) * f_transport(x_c, x_h)?)
}

/// Minimal total adiabat time `1/omega_c + 1/omega_h` assumed by the power bound.
pub fn adiabat_time_floor(engine: &EngineSpec) -> f64 {
    1.0 / engine.omega_c + 1.0 / engine.omega_h
}

/// Quasistatic power at cycle time `tau` with equal conductances, equal
/// isochore times and the adiabat floor: `G_W tanh(Gamma (tau - floor) / 4) / tau`.
pub fn quasistatic_power_bound(engine: &EngineSpec, gamma: f64, tau: f64, mode: FormulaMode) -> Result<f64> {
    let floor = adiabat_time_floor(engine);
    if !(tau > floor) {
        return Err(OttoError::Domain(format!(
            "cycle time {tau} at or below the adiabat floor {floor}"
        )));
    }
    if tau.is_infinite() {
        return Ok(0.0);
    }
    Ok(g_work(engine, mode) * (0.25 * gamma * (tau - floor)).tanh() / tau)
}

/// Carnot efficiency `1 - 1/r`, `r = T_h/T_c`.
pub fn carnot_efficiency(r: f64) -> f64 {
    1.0 - 1.0 / r
}

/// Efficiency at maximum quasistatic work, `1 - sqrt(1/r)`.
pub fn endoreversible_efficiency(r: f64) -> f64 {
    1.0 - (1.0 / r).sqrt()
}

/// Efficiency at maximum work in the sudden limit,
/// `(1 - sqrt(1/r)) / (2 + sqrt(1/r))`.
pub fn sudden_efficiency(r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(OttoError::InvalidParameter(format!(
            "temperature ratio must be >= 1, got {r}"
        )));
    }
    let q = (1.0 / r).sqrt();
    Ok((1.0 - q) / (2.0 + q))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EfficiencyHierarchy {
    pub sudden: f64,
    pub endoreversible: f64,
    pub carnot: f64,
}

pub fn efficiency_hierarchy(r: f64) -> Result<EfficiencyHierarchy> {
    Ok(EfficiencyHierarchy {
        sudden: sudden_efficiency(r)?,
        endoreversible: endoreversible_efficiency(r),
        carnot: carnot_efficiency(r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::BathSpec;
    use approx::assert_relative_eq;

    fn engine(wh: f64, wc: f64, th: f64, tc: f64) -> EngineSpec {
        EngineSpec::new(wh, wc, BathSpec::new(th, 0.6), BathSpec::new(tc, 0.6)).unwrap()
    }

    #[test]
    fn g_work_examples() {
        let e = engine(0.05, 0.025, 1.0, 0.25);
        assert_relative_eq!(g_work(&e, FormulaMode::Exact), 0.249896, epsilon = 1e-6);
        assert_relative_eq!(g_work(&e, FormulaMode::HighTemperature), 0.25, epsilon = 1e-15);
        // Carnot boundary C = T_h / T_c
        let b = engine(0.4, 0.1, 1.0, 0.25);
        assert!(g_work(&b, FormulaMode::HighTemperature).abs() < 1e-15);
        let flat = engine(1.0 + 1e-15, 1.0, 2.0, 1.0);
        assert!(g_work(&flat, FormulaMode::Exact).abs() < 1e-12);
    }

    #[test]
    fn transport_factor() {
        assert_eq!(f_transport(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(f_transport(f64::INFINITY, f64::INFINITY).unwrap(), 1.0);
        assert_relative_eq!(f_transport(0.36, 0.36).unwrap(), 0.178081, epsilon = 1e-6);
        assert_relative_eq!(f_transport(0.36, 0.36).unwrap(), (0.18f64).tanh(), epsilon = 1e-15);
        assert_relative_eq!(f_transport(800.0, 2.0).unwrap(), 1.0 - (-2.0f64).exp(), epsilon = 1e-15);
        assert!(f_transport(-1.0, 1.0).is_err());
    }

    #[test]
    fn quasistatic_work_full_equilibration() {
        let e = engine(2.0, 1.0, 5.0, 1.0);
        let w = quasistatic_work(&e, f64::INFINITY, f64::INFINITY, FormulaMode::Exact).unwrap();
        assert_relative_eq!(w, -1.451268, epsilon = 1e-6);
        assert_eq!(quasistatic_work(&e, 0.0, 1.0, FormulaMode::Exact).unwrap(), 0.0);
    }

    #[test]
    fn entropy_scale() {
        let e = engine(2.0, 1.0, 5.0, 1.0);
        assert_relative_eq!(g_entropy(&e, FormulaMode::HighTemperature), 0.9, epsilon = 1e-15);
        let b = engine(5.0, 1.0, 5.0, 1.0);
        assert!(g_entropy(&b, FormulaMode::HighTemperature).abs() < 1e-15);
        // Delta S_u / W_q does not depend on the time allocation
        let r1 = entropy_production_quasistatic(&e, 0.3, 1.7, FormulaMode::Exact).unwrap()
            / quasistatic_work(&e, 0.3, 1.7, FormulaMode::Exact).unwrap();
        let r2 = entropy_production_quasistatic(&e, 4.0, 0.1, FormulaMode::Exact).unwrap()
            / quasistatic_work(&e, 4.0, 0.1, FormulaMode::Exact).unwrap();
        assert_relative_eq!(r1, r2, epsilon = 1e-12);
    }

    #[test]
    fn power_bound_examples() {
        let e = engine(0.05, 0.025, 1.0, 0.25);
        assert_relative_eq!(adiabat_time_floor(&e), 60.0, epsilon = 1e-12);
        let p = quasistatic_power_bound(&e, 0.6, 120.0, FormulaMode::Exact).unwrap();
        assert_relative_eq!(p, 0.002082, epsilon = 1e-6);
        assert!(quasistatic_power_bound(&e, 0.6, 60.0 + 1e-9, FormulaMode::Exact).unwrap() < 1e-11);
        assert!(quasistatic_power_bound(&e, 0.6, 1e9, FormulaMode::Exact).unwrap() < 1e-9);
        assert!(quasistatic_power_bound(&e, 0.6, 30.0, FormulaMode::Exact).is_err());
    }

    #[test]
    fn efficiencies() {
        let h = efficiency_hierarchy(4.0).unwrap();
        assert_relative_eq!(h.sudden, 0.2, epsilon = 1e-15);
        assert_relative_eq!(h.endoreversible, 0.5, epsilon = 1e-15);
        assert_relative_eq!(h.carnot, 0.75, epsilon = 1e-15);
        assert_eq!(sudden_efficiency(1.0).unwrap(), 0.0);
        assert!((sudden_efficiency(1e12).unwrap() - 0.5).abs() < 1e-5);
        assert!(sudden_efficiency(0.5).is_err());
    }
}
