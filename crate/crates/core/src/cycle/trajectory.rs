use serde::{Deserialize, Serialize};

use super::{limit_cycle_with, AdiabatMode, EngineSpec, LimitCycle, TimeAllocation};
use crate::error::{OttoError, Result};
use crate::ode::Tolerances;
use crate::propagators::{adiabat_trajectory, heat_current, isochore_map, AdiabatSchedule};
use crate::state::{energy_entropy, internal_temperature, von_neumann_entropy, BathSpec, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "hot")]
    Hot,
    #[serde(rename = "hc")]
    HotToCold,
    #[serde(rename = "cold")]
    Cold,
    #[serde(rename = "ch")]
    ColdToHot,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Hot => "hot",
            Self::HotToCold => "hc",
            Self::Cold => "cold",
            Self::ColdToHot => "ch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub branch: Branch,
    pub omega: f64,
    pub state: StateVector,
    pub s_vn: f64,
    pub s_e: f64,
    pub t_int: f64,
    /// Heat flow into the medium (isochores only).
    pub heat_current: f64,
    /// Rate of work on the medium (adiabats only; NaN across a sudden jump).
    pub power: f64,
}

fn sample(t: f64, branch: Branch, state: StateVector, heat_current: f64, power: f64) -> Result<TrajectorySample> {
    Ok(TrajectorySample {
        t,
        branch,
        omega: state.omega,
        state,
        s_vn: von_neumann_entropy(&state)?,
        s_e: energy_entropy(&state)?,
        t_int: internal_temperature(&state)?,
        heat_current,
        power,
    })
}

fn grid(tau: f64, dt: f64) -> Vec<f64> {
    let n = ((tau / dt).ceil() as usize).max(1);
    (0..=n).map(|k| tau * k as f64 / n as f64).collect()
}

/// Dense samples along one period of the limit cycle, starting and ending at
/// corner A. Branch end points appear twice, once per adjacent branch.
pub fn trajectory_sample(
    engine: &EngineSpec,
    alloc: &TimeAllocation,
    mode: AdiabatMode,
    dt: f64,
) -> Result<Vec<TrajectorySample>> {
    if !(dt > 0.0) {
        return Err(OttoError::InvalidParameter(format!("sampling step must be positive, got {dt}")));
    }
    let tol = Tolerances::new(1e-12, 1e-14);
    let lc = limit_cycle_with(engine, alloc, mode, tol)?;
    trajectory_of(&lc, engine, alloc, mode, dt, tol)
}

fn trajectory_of(
    lc: &LimitCycle,
    engine: &EngineSpec,
    alloc: &TimeAllocation,
    mode: AdiabatMode,
    dt: f64,
    tol: Tolerances,
) -> Result<Vec<TrajectorySample>> {
    let [a, b, c, d] = lc.corners;
    let mut out = Vec::new();
    let mut t0 = 0.0;
    isochore_samples(&mut out, t0, Branch::Hot, &engine.hot, &a, alloc.tau_h, dt)?;
    t0 += alloc.tau_h;
    adiabat_samples(&mut out, t0, Branch::HotToCold, &b, engine.omega_c, alloc.tau_hc, mode, dt, tol)?;
    t0 += alloc.tau_hc;
    isochore_samples(&mut out, t0, Branch::Cold, &engine.cold, &c, alloc.tau_c, dt)?;
    t0 += alloc.tau_c;
    adiabat_samples(&mut out, t0, Branch::ColdToHot, &d, engine.omega_h, alloc.tau_ch, mode, dt, tol)?;
    Ok(out)
}

fn isochore_samples(
    out: &mut Vec<TrajectorySample>,
    t0: f64,
    branch: Branch,
    bath: &BathSpec,
    start: &StateVector,
    tau: f64,
    dt: f64,
) -> Result<()> {
    for t in grid(tau, dt) {
        let s = isochore_map(bath, start.omega, t)?.apply(start);
        out.push(sample(t0 + t, branch, s, heat_current(&s, bath)?, 0.0)?);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn adiabat_samples(
    out: &mut Vec<TrajectorySample>,
    t0: f64,
    branch: Branch,
    start: &StateVector,
    omega_end: f64,
    tau: f64,
    mode: AdiabatMode,
    dt: f64,
    tol: Tolerances,
) -> Result<()> {
    let omega_start = start.omega;
    let sudden = mode == AdiabatMode::Sudden || tau == 0.0;
    if sudden {
        let end = super::adiabat_branch(omega_start, omega_end, tau, AdiabatMode::Sudden, tol)?
            .map
            .apply(start);
        out.push(sample(t0, branch, *start, 0.0, f64::NAN)?);
        out.push(sample(t0 + tau, branch, end, 0.0, f64::NAN)?);
        return Ok(());
    }
    let sched = AdiabatSchedule::new(omega_start, omega_end, tau)?;
    let alpha = sched.alpha();
    let times = grid(tau, dt);
    match mode {
        AdiabatMode::Numeric => {
            for p in adiabat_trajectory(&sched, start, &times, tol)? {
                let power = alpha * (p.state.energy - p.state.lagrangian);
                out.push(sample(t0 + p.time, branch, p.state, 0.0, power)?);
            }
        }
        _ => {
            for t in times {
                let w = sched.omega_at(t);
                let r = w / omega_start;
                let s = StateVector::new(start.energy * r, start.lagrangian * r, start.correlation, w);
                out.push(sample(t0 + t, branch, s, 0.0, alpha * s.energy)?);
            }
        }
    }
    Ok(())
}
