use nalgebra::Matrix3;

use super::{cycle_branches, AdiabatMode, CycleBranches, EngineSpec, TimeAllocation};
use crate::error::{OttoError, Result};
use crate::ode::Tolerances;
use crate::propagators::AffineBranchMap;
use crate::state::{relative_entropy, StateVector};

/// Upper bound on fixed-point iterations for the cross-check.
const CROSS_CHECK_MAX_ITER: usize = 100_000;

/// The invariant trajectory of the cycle propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCycle {
    /// A (start of hot isochore), B (end of hot isochore), C (end of power
    /// adiabat), D (end of cold isochore).
    pub corners: [StateVector; 4],
    pub map: AffineBranchMap,
    pub branches: CycleBranches,
    pub spectral_radius: f64,
    /// `|(M v + b) - v|` at corner A, energy-unit norm.
    pub residual: f64,
    /// Distance between the linear-solve corner and the iterated one.
    pub iteration_gap: f64,
    pub iterations: usize,
}

impl LimitCycle {
    pub fn a(&self) -> &StateVector {
        &self.corners[0]
    }
    pub fn b(&self) -> &StateVector {
        &self.corners[1]
    }
    pub fn c(&self) -> &StateVector {
        &self.corners[2]
    }
    pub fn d(&self) -> &StateVector {
        &self.corners[3]
    }
}

/// Limit cycle with default integrator tolerances.
pub fn limit_cycle(engine: &EngineSpec, alloc: &TimeAllocation, mode: AdiabatMode) -> Result<LimitCycle> {
    limit_cycle_with(engine, alloc, mode, Tolerances::default())
}

/// Solves `(I - M) v = b` for corner A and propagates it round the cycle.
pub fn limit_cycle_with(
    engine: &EngineSpec,
    alloc: &TimeAllocation,
    mode: AdiabatMode,
    tol: Tolerances,
) -> Result<LimitCycle> {
    let branches = cycle_branches(engine, alloc, mode, tol)?;
    let map = branches.composed();
    let rho = map.spectral_radius();
    // without dissipation the map is exactly norm-preserving and rho = 1 up to
    // rounding, which can land on either side
    let damping = engine.hot.conductance * alloc.tau_h + engine.cold.conductance * alloc.tau_c;
    if !(rho < 1.0) || damping == 0.0 {
        return Err(OttoError::NoLimitCycle(rho));
    }
    let v = (Matrix3::identity() - map.matrix)
        .lu()
        .solve(&map.offset)
        .ok_or(OttoError::NoLimitCycle(rho))?;
    let a = StateVector::from_vector(&v, engine.omega_h);
    let b = branches.hot.apply(&a);
    let c = branches.power.map.apply(&b);
    let d = branches.cold.apply(&c);
    let residual = map.apply(&a).distance(&a);

    // Cross-check by plain iteration from the hot equilibrium state.
    let mut x = StateVector::thermal(engine.omega_h, engine.hot.temperature)?;
    let target = 1e-13 * a.energy_norm().max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    while iterations < CROSS_CHECK_MAX_ITER {
        let next = map.apply(&x);
        iterations += 1;
        let step = next.distance(&x);
        x = next;
        if step <= target {
            break;
        }
    }
    Ok(LimitCycle {
        corners: [a, b, c, d],
        map,
        branches,
        spectral_radius: rho,
        residual,
        iteration_gap: x.distance(&a),
        iterations,
    })
}

/// Corner-A iterates of the cycle map and their distances to the fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitIterates {
    pub states: Vec<StateVector>,
    /// Energy-unit Euclidean distance; decays geometrically but need not be
    /// monotone, since the cycle map is not normal.
    pub distances: Vec<f64>,
    /// `S(v_k || v*)`, non-increasing because every branch is a quantum
    /// channel that leaves the limit-cycle state invariant. `None` when the
    /// iterate is pure.
    pub relative_entropies: Vec<Option<f64>>,
    pub fixed_point: StateVector,
}

/// Applies the cycle map to `v0` until the distance to the limit cycle drops
/// below `tol`; `v0` must refer to `omega_h`.
pub fn iterate_to_limit(
    engine: &EngineSpec,
    alloc: &TimeAllocation,
    mode: AdiabatMode,
    v0: &StateVector,
    n_max: usize,
    tol: f64,
) -> Result<LimitIterates> {
    if (v0.omega - engine.omega_h).abs() > 1e-12 * engine.omega_h {
        return Err(OttoError::InvalidParameter(format!(
            "start state must refer to omega_h = {}, got {}",
            engine.omega_h, v0.omega
        )));
    }
    let lc = limit_cycle(engine, alloc, mode)?;
    let star = *lc.a();
    let mut states = vec![*v0];
    let mut distances = vec![v0.distance(&star)];
    let rel = |v: &StateVector| relative_entropy(v, &star).ok();
    let mut relative_entropies = vec![rel(v0)];
    let mut x = *v0;
    while *distances.last().unwrap() >= tol {
        if states.len() > n_max {
            return Err(OttoError::NotConverged {
                iterations: n_max,
                residual: *distances.last().unwrap(),
            });
        }
        x = lc.map.apply(&x);
        distances.push(x.distance(&star));
        relative_entropies.push(rel(&x));
        states.push(x);
    }
    Ok(LimitIterates {
        states,
        distances,
        relative_entropies,
        fixed_point: star,
    })
}
