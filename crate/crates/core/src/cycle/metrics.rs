use serde::{Deserialize, Serialize};

use super::{EngineSpec, LimitCycle, TimeAllocation};
use crate::error::Result;
use crate::state::{energy_entropy, internal_temperature, von_neumann_entropy, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerEntropies {
    pub s_vn: f64,
    pub s_e: f64,
    pub t_int: f64,
}

impl CornerEntropies {
    pub fn of(s: &StateVector) -> Result<Self> {
        Ok(Self {
            s_vn: von_neumann_entropy(s)?,
            s_e: energy_entropy(s)?,
            t_int: internal_temperature(s)?,
        })
    }
}

/// Per-cycle thermodynamics. Heats are into the working medium; an engine has
/// negative work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleMetrics {
    pub work: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
    /// `-W/Q_h`, only when `Q_h > 0`.
    pub efficiency: Option<f64>,
    pub power: f64,
    pub entropy_production: f64,
    /// Friction work on the hot-to-cold and cold-to-hot adiabats.
    pub friction_hc: f64,
    pub friction_ch: f64,
    pub is_engine: bool,
    pub corners: [CornerEntropies; 4],
    pub period: f64,
}

impl CycleMetrics {
    pub fn friction_total(&self) -> f64 {
        self.friction_hc + self.friction_ch
    }
}

fn entropy_flow(heat: f64, temperature: f64) -> f64 {
    if heat == 0.0 {
        0.0
    } else {
        -heat / temperature
    }
}

pub fn cycle_metrics(lc: &LimitCycle, engine: &EngineSpec, alloc: &TimeAllocation) -> Result<CycleMetrics> {
    let [a, b, c, d] = lc.corners;
    let heat_hot = b.energy - a.energy;
    let heat_cold = d.energy - c.energy;
    let work = (c.energy - b.energy) + (a.energy - d.energy);
    let period = alloc.total();
    let is_engine = heat_hot > 0.0 && work < 0.0;
    let corners = [
        CornerEntropies::of(&a)?,
        CornerEntropies::of(&b)?,
        CornerEntropies::of(&c)?,
        CornerEntropies::of(&d)?,
    ];
    Ok(CycleMetrics {
        work,
        heat_hot,
        heat_cold,
        efficiency: (heat_hot > 0.0).then(|| -work / heat_hot),
        power: if period > 0.0 { -work / period } else { f64::NAN },
        entropy_production: entropy_flow(heat_hot, engine.hot.temperature)
            + entropy_flow(heat_cold, engine.cold.temperature),
        friction_hc: lc.branches.power.friction.dot(&b.to_vector()),
        friction_ch: lc.branches.compression.friction.dot(&d.to_vector()),
        is_engine,
        corners,
        period,
    })
}
