use serde::Serialize;

use super::closed_form::g_work;
use crate::cycle::EngineSpec;
use crate::error::Result;
use crate::propagators::{adiabat_map_sudden, FormulaMode};
use crate::state::{equilibrium_energy, StateVector};

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Bath-equilibrium energy, or its classical limit `T` in high-temperature mode.
fn bath_energy(omega: f64, temperature: f64, mode: FormulaMode) -> Result<f64> {
    match mode {
        FormulaMode::Exact => equilibrium_energy(omega, temperature),
        FormulaMode::HighTemperature => Ok(temperature),
    }
}

/// Sudden adiabats between fully equilibrated isochore end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuddenCycle {
    pub work: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
    pub efficiency: Option<f64>,
}

/// Builds the infinite-conductance sudden cycle by composing the jump
/// propagators: B is the hot equilibrium, D the cold equilibrium.
pub fn sudden_cycle(engine: &EngineSpec, mode: FormulaMode) -> Result<SuddenCycle> {
    let (wh, wc) = (engine.omega_h, engine.omega_c);
    let b = StateVector::new(bath_energy(wh, engine.hot.temperature, mode)?, 0.0, 0.0, wh);
    let d = StateVector::new(bath_energy(wc, engine.cold.temperature, mode)?, 0.0, 0.0, wc);
    let c = adiabat_map_sudden(wh, wc)?.apply(&b);
    let a = adiabat_map_sudden(wc, wh)?.apply(&d);
    let work = (c.energy - b.energy) + (a.energy - d.energy);
    let heat_hot = b.energy - a.energy;
    Ok(SuddenCycle {
        work,
        heat_hot,
        heat_cold: d.energy - c.energy,
        efficiency: (heat_hot > 0.0).then(|| -work / heat_hot),
    })
}

/// Work per cycle in the sudden, infinite-conductance limit.
pub fn sudden_work(engine: &EngineSpec, mode: FormulaMode) -> Result<f64> {
    Ok(sudden_cycle(engine, mode)?.work)
}

/// Printed closed forms for the sudden-limit work next to the constructive value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuddenWorkDiagnostics {
    /// Jump composition with exact equilibrium energies.
    pub constructive: f64,
    /// `(C^2 - 1)/2 (E_c - E_h / C^2)`; must equal `constructive`.
    pub factored: f64,
    /// The printed expression with `coth(omega / T)` arguments.
    pub printed_full_argument: f64,
    /// The same expression with the usual `coth(omega / 2T)` arguments.
    pub printed_half_argument: f64,
    /// High-temperature form `T_h/2 (C^2 - 1)(T_c/T_h - 1/C^2)`.
    pub high_temperature: f64,
    /// Printed optimum `-T_h (1 - sqrt(T_c/T_h))^2`.
    pub printed_optimum: f64,
    /// Optimum of the high-temperature form at `C = (T_h/T_c)^{1/4}`.
    pub constructive_optimum: f64,
}

pub fn sudden_work_diagnostics(engine: &EngineSpec) -> Result<SuddenWorkDiagnostics> {
    let (wh, wc) = (engine.omega_h, engine.omega_c);
    let (th, tc) = (engine.hot.temperature, engine.cold.temperature);
    let c2 = (wh / wc).powi(2);
    let e_h = equilibrium_energy(wh, th)?;
    let e_c = equilibrium_energy(wc, tc)?;
    let pre = (wc - wh) * (wc + wh) / (4.0 * wc * wh);
    let printed = |k: f64| pre * (wc * coth(wh / (k * th)) - wh * coth(wc / (k * tc)));
    let s = (tc / th).sqrt();
    Ok(SuddenWorkDiagnostics {
        constructive: sudden_work(engine, FormulaMode::Exact)?,
        factored: 0.5 * (c2 - 1.0) * (e_c - e_h / c2),
        printed_full_argument: printed(1.0),
        printed_half_argument: printed(2.0),
        high_temperature: 0.5 * th * (c2 - 1.0) * (tc / th - 1.0 / c2),
        printed_optimum: -th * (1.0 - s).powi(2),
        constructive_optimum: -0.5 * th * (1.0 - s).powi(2),
    })
}

/// Upper bound on the friction work: sudden minus fully equilibrated
/// quasistatic work, `omega_h (C-1)^2 (1 + C + 2C N_c + 2N_h) / (4C^2)`.
pub fn friction_upper_bound(engine: &EngineSpec, mode: FormulaMode) -> Result<f64> {
    let (wh, wc) = (engine.omega_h, engine.omega_c);
    let (th, tc) = (engine.hot.temperature, engine.cold.temperature);
    let c = wh / wc;
    Ok(match mode {
        FormulaMode::Exact => {
            let n_h = equilibrium_energy(wh, th)? / wh - 0.5;
            let n_c = equilibrium_energy(wc, tc)? / wc - 0.5;
            wh * (c - 1.0).powi(2) * (1.0 + c + 2.0 * c * n_c + 2.0 * n_h) / (4.0 * c * c)
        }
        FormulaMode::HighTemperature => 0.5 * th * (c - 1.0).powi(2) * (1.0 / (c * c) + tc / th),
    })
}

/// `W_s - W_q` at full equilibration from the two constructions.
pub fn friction_upper_bound_constructive(engine: &EngineSpec, mode: FormulaMode) -> Result<f64> {
    Ok(sudden_work(engine, mode)? + g_work(engine, mode))
}
