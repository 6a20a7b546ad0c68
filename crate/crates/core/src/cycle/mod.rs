//! The four-branch Otto cycle: branch assembly, limit cycle, thermodynamics
//! and dense trajectories.

mod limit;
mod metrics;
mod trajectory;

pub use limit::{iterate_to_limit, limit_cycle, limit_cycle_with, LimitCycle, LimitIterates};
pub use metrics::{cycle_metrics, CornerEntropies, CycleMetrics};
pub use trajectory::{trajectory_sample, Branch, TrajectorySample};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{OttoError, Result};
use crate::ode::Tolerances;
use crate::propagators::{
    adiabat_map_quasistatic, adiabat_map_sudden, adiabat_solve, isochore_map, AdiabatSchedule,
    AffineBranchMap,
};
use crate::state::BathSpec;

/// Working-medium frequencies and the two baths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineSpec {
    pub omega_h: f64,
    pub omega_c: f64,
    pub hot: BathSpec,
    pub cold: BathSpec,
}

impl EngineSpec {
    pub fn new(omega_h: f64, omega_c: f64, hot: BathSpec, cold: BathSpec) -> Result<Self> {
        if !(omega_c > 0.0) || !(omega_h > omega_c) || !omega_h.is_finite() {
            return Err(OttoError::InvalidParameter(format!(
                "need omega_h > omega_c > 0, got omega_h = {omega_h}, omega_c = {omega_c}"
            )));
        }
        for (name, b) in [("hot", &hot), ("cold", &cold)] {
            if !(b.temperature >= 0.0) || !(b.conductance >= 0.0) {
                return Err(OttoError::InvalidParameter(format!(
                    "{name} bath needs T >= 0 and Gamma >= 0, got T = {}, Gamma = {}",
                    b.temperature, b.conductance
                )));
            }
        }
        Ok(Self {
            omega_h,
            omega_c,
            hot,
            cold,
        })
    }

    /// Compression ratio `C = omega_h / omega_c`.
    pub fn compression_ratio(&self) -> f64 {
        self.omega_h / self.omega_c
    }

    /// Bath temperature ratio `T_h / T_c`.
    pub fn temperature_ratio(&self) -> f64 {
        self.hot.temperature / self.cold.temperature
    }
}

/// Durations of the hot isochore, the power adiabat (hot to cold), the cold
/// isochore and the compression adiabat (cold to hot).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAllocation {
    pub tau_h: f64,
    pub tau_hc: f64,
    pub tau_c: f64,
    pub tau_ch: f64,
}

impl TimeAllocation {
    pub fn new(tau_h: f64, tau_hc: f64, tau_c: f64, tau_ch: f64) -> Result<Self> {
        let a = Self {
            tau_h,
            tau_hc,
            tau_c,
            tau_ch,
        };
        if a.as_array().iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(OttoError::InvalidParameter(format!(
                "branch durations must be finite and >= 0, got {a:?}"
            )));
        }
        Ok(a)
    }

    pub fn total(&self) -> f64 {
        self.tau_h + self.tau_hc + self.tau_c + self.tau_ch
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.tau_h, self.tau_hc, self.tau_c, self.tau_ch]
    }
}

/// How the adiabats are propagated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdiabatMode {
    /// Integrate the coupled equations for the constant-alpha ramp. A zero
    /// duration is taken as the sudden jump.
    Numeric,
    /// Instantaneous frequency jump regardless of the allocated duration.
    Sudden,
    /// Infinitely slow ramp: N conserved, no friction.
    Quasistatic,
}

impl std::str::FromStr for AdiabatMode {
    type Err = OttoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(Self::Numeric),
            "sudden" => Ok(Self::Sudden),
            "quasistatic" => Ok(Self::Quasistatic),
            other => Err(OttoError::Config(format!(
                "unknown adiabat mode '{other}' (expected numeric, sudden or quasistatic)"
            ))),
        }
    }
}

impl std::fmt::Display for AdiabatMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Numeric => "numeric",
            Self::Sudden => "sudden",
            Self::Quasistatic => "quasistatic",
        })
    }
}

/// One adiabat: its propagator and the linear functional giving the friction
/// work `-∫ alpha <L> dt` from the state at its start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabatBranch {
    pub map: AffineBranchMap,
    pub friction: Vector3<f64>,
}

/// The four branch propagators in cycle order, starting at corner A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleBranches {
    pub hot: AffineBranchMap,
    pub power: AdiabatBranch,
    pub cold: AffineBranchMap,
    pub compression: AdiabatBranch,
}

impl CycleBranches {
    /// `U_ch ∘ U_c ∘ U_hc ∘ U_h`.
    pub fn composed(&self) -> AffineBranchMap {
        self.hot
            .then(&self.power.map)
            .then(&self.cold)
            .then(&self.compression.map)
    }
}

/// Friction functional of a sudden jump by ratio `r = omega_f / omega_i`.
///
/// Across the jump `H + L` is frozen while `H - L` scales as `omega^2`, which
/// makes `-∫ L d(ln omega)` finite.
fn sudden_friction(omega_i: f64, omega_f: f64) -> Vector3<f64> {
    let log_r = (omega_f / omega_i).ln();
    let q = 0.25 * ((omega_f / omega_i).powi(2) - 1.0);
    Vector3::new(-0.5 * log_r + q, -0.5 * log_r - q, 0.0)
}

pub(crate) fn adiabat_branch(
    omega_i: f64,
    omega_f: f64,
    tau: f64,
    mode: AdiabatMode,
    tol: Tolerances,
) -> Result<AdiabatBranch> {
    match mode {
        AdiabatMode::Numeric if tau > 0.0 => {
            let sol = adiabat_solve(&AdiabatSchedule::new(omega_i, omega_f, tau)?, tol)?;
            Ok(AdiabatBranch {
                map: sol.map,
                friction: sol.friction,
            })
        }
        AdiabatMode::Numeric | AdiabatMode::Sudden => {
            let mut map = adiabat_map_sudden(omega_i, omega_f)?;
            map.duration = tau;
            Ok(AdiabatBranch {
                map,
                friction: sudden_friction(omega_i, omega_f),
            })
        }
        AdiabatMode::Quasistatic => Ok(AdiabatBranch {
            map: adiabat_map_quasistatic(omega_i, omega_f, tau)?,
            friction: Vector3::zeros(),
        }),
    }
}

/// Builds the four branch propagators.
pub fn cycle_branches(
    engine: &EngineSpec,
    alloc: &TimeAllocation,
    mode: AdiabatMode,
    tol: Tolerances,
) -> Result<CycleBranches> {
    Ok(CycleBranches {
        hot: isochore_map(&engine.hot, engine.omega_h, alloc.tau_h)?,
        power: adiabat_branch(engine.omega_h, engine.omega_c, alloc.tau_hc, mode, tol)?,
        cold: isochore_map(&engine.cold, engine.omega_c, alloc.tau_c)?,
        compression: adiabat_branch(engine.omega_c, engine.omega_h, alloc.tau_ch, mode, tol)?,
    })
}

/// The cycle propagator with corner A (start of the hot isochore) as reference.
pub fn cycle_map(engine: &EngineSpec, alloc: &TimeAllocation, mode: AdiabatMode) -> Result<AffineBranchMap> {
    Ok(cycle_branches(engine, alloc, mode, Tolerances::default())?.composed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::adiabat_trajectory;
    use crate::state::StateVector;
    use approx::assert_relative_eq;

    pub(crate) fn fig1() -> (EngineSpec, TimeAllocation) {
        (
            EngineSpec::new(2.0, 1.0, BathSpec::new(5.0, 0.03), BathSpec::new(1.0, 0.03)).unwrap(),
            TimeAllocation::new(6.0, 1.0, 12.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn rejects_bad_specs() {
        let b = BathSpec::new(1.0, 1.0);
        assert!(EngineSpec::new(1.0, 2.0, b, b).is_err());
        assert!(EngineSpec::new(2.0, 0.0, b, b).is_err());
        assert!(EngineSpec::new(2.0, 1.0, BathSpec::new(-1.0, 1.0), b).is_err());
        assert!(TimeAllocation::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!("adiabatic".parse::<AdiabatMode>().is_err());
        assert_eq!("sudden".parse::<AdiabatMode>().unwrap(), AdiabatMode::Sudden);
    }

    #[test]
    fn energy_row_contracts_in_quasistatic_mode() {
        let (engine, alloc) = fig1();
        let m = cycle_map(&engine, &alloc, AdiabatMode::Quasistatic).unwrap();
        assert_relative_eq!(m.matrix[(0, 0)], (-0.54f64).exp(), epsilon = 1e-12);
        assert_relative_eq!((-0.54f64).exp(), 0.582748, epsilon = 1e-6);
        let full = cycle_map(&engine, &alloc, AdiabatMode::Numeric).unwrap();
        assert!(full.spectral_radius() < 1.0);
    }

    #[test]
    fn cyclic_relabeling_shares_spectrum() {
        let (engine, alloc) = fig1();
        let br = cycle_branches(&engine, &alloc, AdiabatMode::Numeric, Tolerances::default()).unwrap();
        let from_a = br.composed();
        let from_d = br.compression.map.then(&br.hot).then(&br.power.map).then(&br.cold);
        assert_relative_eq!(from_a.spectral_radius(), from_d.spectral_radius(), epsilon = 1e-10);
        assert_relative_eq!(from_a.matrix.trace(), from_d.matrix.trace(), epsilon = 1e-10);
    }

    #[test]
    fn sudden_friction_matches_fast_ramp() {
        let tol = Tolerances::new(1e-12, 1e-14);
        for &(wi, wf) in &[(2.0, 1.0), (1.0, 3.0)] {
            let s0 = StateVector::new(2.5, 0.3, 0.4, wi);
            let sched = AdiabatSchedule::new(wi, wf, 1e-5).unwrap();
            let fast = adiabat_trajectory(&sched, &s0, &[1e-5], tol).unwrap()[0].friction_work;
            let jump = sudden_friction(wi, wf).dot(&s0.to_vector());
            assert!((fast - jump).abs() < 1e-4, "{fast} vs {jump}");
        }
    }

    #[test]
    fn zero_duration_numeric_adiabat_is_the_jump() {
        let b = adiabat_branch(2.0, 1.0, 0.0, AdiabatMode::Numeric, Tolerances::default()).unwrap();
        assert_eq!(b.map.matrix, adiabat_map_sudden(2.0, 1.0).unwrap().matrix);
    }
}
