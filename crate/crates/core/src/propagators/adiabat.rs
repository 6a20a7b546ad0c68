use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::AffineBranchMap;
use crate::error::{OttoError, Result};
use crate::ode::{DormandPrince, Tolerances};
use crate::state::StateVector;

/// Frequency ramp of one adiabat. Only the constant-`alpha` (exponential) ramp
/// is provided: `omega(t) = omega_start (omega_end/omega_start)^(t/tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabatSchedule {
    pub omega_start: f64,
    pub omega_end: f64,
    pub duration: f64,
}

impl AdiabatSchedule {
    pub fn new(omega_start: f64, omega_end: f64, duration: f64) -> Result<Self> {
        if !(omega_start > 0.0) || !(omega_end > 0.0) {
            return Err(OttoError::InvalidParameter(format!(
                "adiabat frequencies must be positive, got {omega_start} -> {omega_end}"
            )));
        }
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(OttoError::InvalidParameter(format!(
                "adiabat duration must be positive and finite, got {duration}"
            )));
        }
        Ok(Self {
            omega_start,
            omega_end,
            duration,
        })
    }

    /// Nonadiabatic parameter `alpha = d(ln omega)/dt`.
    pub fn alpha(&self) -> f64 {
        (self.omega_end / self.omega_start).ln() / self.duration
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        self.omega_start * (self.alpha() * t).exp()
    }
}

/// Propagator of a sudden frequency jump: (H, L) mix by
/// `1/2 [[1+r^2, 1-r^2], [1-r^2, 1+r^2]]`, `r = omega_f / omega_i`; D is frozen.
pub fn adiabat_map_sudden(omega_i: f64, omega_f: f64) -> Result<AffineBranchMap> {
    if !(omega_i > 0.0) || !(omega_f > 0.0) {
        return Err(OttoError::InvalidParameter(format!(
            "adiabat frequencies must be positive, got {omega_i} -> {omega_f}"
        )));
    }
    let r2 = (omega_f / omega_i).powi(2);
    let (p, m) = (0.5 * (1.0 + r2), 0.5 * (1.0 - r2));
    #[rustfmt::skip]
    let matrix = Matrix3::new(
        p, m, 0.0,
        m, p, 0.0,
        0.0, 0.0, 1.0,
    );
    Ok(AffineBranchMap {
        matrix,
        offset: Vector3::zeros(),
        omega_in: omega_i,
        omega_out: omega_f,
        duration: 0.0,
    })
}

/// Map with N = H/omega - 1/2 conserved and (L, D) carried as in the sudden
/// limit's homogeneous scaling; the infinitely slow adiabat.
pub fn adiabat_map_quasistatic(omega_i: f64, omega_f: f64, duration: f64) -> Result<AffineBranchMap> {
    if !(omega_i > 0.0) || !(omega_f > 0.0) {
        return Err(OttoError::InvalidParameter(format!(
            "adiabat frequencies must be positive, got {omega_i} -> {omega_f}"
        )));
    }
    let r = omega_f / omega_i;
    // H scales with omega; L and omega D / 2 share that scale, so D scales as 1.
    let matrix = Matrix3::from_diagonal(&Vector3::new(r, r, 1.0));
    Ok(AffineBranchMap {
        matrix,
        offset: Vector3::zeros(),
        omega_in: omega_i,
        omega_out: omega_f,
        duration,
    })
}

/// Result of integrating an adiabat: the propagator plus the linear functional
/// giving the accumulated friction work `-∫ alpha <L> dt` for any start state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabatSolution {
    pub map: AffineBranchMap,
    /// `W_f = friction · (H, L, D)(0)`.
    pub friction: Vector3<f64>,
}

impl AdiabatSolution {
    pub fn friction_work(&self, start: &StateVector) -> f64 {
        self.friction.dot(&start.to_vector())
    }
}

// The integration runs on h = H/omega and z = L/omega + i D/2 in the frame
// rotating with the free phase, w = e^{-2i phi} z, phi = int omega dt:
//   dh/dt = -alpha Re(e^{2i phi} w),  dw/dt = -alpha h e^{-2i phi}.
// Both right-hand sides are O(alpha), and h^2 - |w|^2 = (X/omega)^2 holds
// exactly along the flow.
#[derive(Debug, Clone, Copy)]
struct RotatingFrame {
    alpha: f64,
    omega_start: f64,
}

impl RotatingFrame {
    fn new(sched: &AdiabatSchedule) -> Self {
        Self {
            alpha: sched.alpha(),
            omega_start: sched.omega_start,
        }
    }

    fn omega(&self, t: f64) -> f64 {
        self.omega_start * (self.alpha * t).exp()
    }

    fn phase(&self, t: f64) -> f64 {
        let x = self.alpha * t;
        if x == 0.0 {
            self.omega_start * t
        } else {
            self.omega_start * t * x.exp_m1() / x
        }
    }

    fn rotation(&self, t: f64) -> (f64, f64) {
        let (s, c) = (2.0 * self.phase(t)).sin_cos();
        (c, s)
    }

    /// `(h, Re w, Im w)` at `t = 0` for the observables `(H, L, D)`.
    fn enter(&self, v: &Vector3<f64>) -> [f64; 3] {
        [v[0] / self.omega_start, v[1] / self.omega_start, 0.5 * v[2]]
    }

    /// Observables at time `t` from `(h, Re w, Im w)`.
    fn leave(&self, t: f64, y: &[f64]) -> Vector3<f64> {
        let w = self.omega(t);
        let (c, s) = self.rotation(t);
        let (zr, zi) = (c * y[1] - s * y[2], s * y[1] + c * y[2]);
        Vector3::new(w * y[0], w * zr, 2.0 * zi)
    }

    /// Derivatives of one `(h, Re w, Im w)` block and of the friction work.
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> f64 {
        let (c, s) = self.rotation(t);
        let a = self.alpha;
        let zr = c * y[1] - s * y[2];
        dy[0] = -a * zr;
        dy[1] = -a * y[0] * c;
        dy[2] = a * y[0] * s;
        -a * self.omega(t) * zr
    }
}

/// Integrates the closed (H, L, D) system through an adiabat, building the map
/// column by column together with the friction functional.
pub fn adiabat_solve(sched: &AdiabatSchedule, tol: Tolerances) -> Result<AdiabatSolution> {
    let frame = RotatingFrame::new(sched);
    let mut y = [0.0; 12];
    for j in 0..3 {
        let start = frame.enter(&Vector3::ith(j, 1.0));
        y[3 * j..3 * j + 3].copy_from_slice(&start);
    }
    // three map columns, then the friction functional
    let mut sys = (12usize, move |t: f64, y: &[f64], dy: &mut [f64]| {
        for j in 0..3 {
            dy[9 + j] = frame.rhs(t, &y[3 * j..3 * j + 3], &mut dy[3 * j..3 * j + 3]);
        }
    });
    DormandPrince::new(12, tol).integrate(&mut sys, 0.0, sched.duration, &mut y, |_, _| {})?;

    let columns: Vec<Vector3<f64>> = (0..3).map(|j| frame.leave(sched.duration, &y[3 * j..3 * j + 3])).collect();
    Ok(AdiabatSolution {
        map: AffineBranchMap {
            matrix: Matrix3::from_columns(&columns),
            offset: Vector3::zeros(),
            omega_in: sched.omega_start,
            omega_out: sched.omega_end,
            duration: sched.duration,
        },
        friction: Vector3::new(y[9], y[10], y[11]),
    })
}

/// Numerically exact adiabat propagator for the constant-`alpha` ramp.
pub fn adiabat_map_numeric(sched: &AdiabatSchedule, tol: Tolerances) -> Result<AffineBranchMap> {
    Ok(adiabat_solve(sched, tol)?.map)
}

/// One sample along an adiabat trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabatSample {
    pub time: f64,
    pub omega: f64,
    pub state: StateVector,
    /// Friction work accumulated since the start of the branch.
    pub friction_work: f64,
}

/// Samples the trajectory of `start` at the given times (ascending, within
/// `[0, duration]`).
pub fn adiabat_trajectory(
    sched: &AdiabatSchedule,
    start: &StateVector,
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<AdiabatSample>> {
    let frame = RotatingFrame::new(sched);
    let mut sys = (4usize, move |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[3] = frame.rhs(t, &y[..3], &mut dy[..3]);
    });
    let [h, wr, wi] = frame.enter(&start.to_vector());
    let mut y = [h, wr, wi, 0.0];
    let mut stepper = DormandPrince::new(4, tol);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &tn in times {
        if tn < t || tn > sched.duration * (1.0 + 1e-12) {
            return Err(OttoError::InvalidParameter(format!(
                "sample time {tn} outside the branch or not ascending"
            )));
        }
        stepper.integrate(&mut sys, t, tn, &mut y, |_, _| {})?;
        t = tn;
        let w = sched.omega_at(tn);
        out.push(AdiabatSample {
            time: tn,
            omega: w,
            state: StateVector::from_vector(&frame.leave(tn, &y), w),
            friction_work: y[3],
        });
    }
    Ok(out)
}

/// Phase-averaged energy to second order in `alpha/omega_0`:
/// `H ~ H0 r (1 + (a/2w0)^2) - L0 r (a/2w0)^2 + D0 a w / (4 w0)` with `r = w/w0`.
///
/// Returns the state at the end of the schedule with only the energy entry
/// meaningful; L and D are set to their phase average, zero.
pub fn adiabat_quasistatic_correction(s0: &StateVector, sched: &AdiabatSchedule) -> Result<StateVector> {
    let w = sched.omega_end;
    Ok(StateVector::new(
        quasistatic_energy_at(s0, sched, w)?,
        0.0,
        0.0,
        w,
    ))
}

/// The same second-order expression evaluated at an arbitrary frequency on the ramp.
pub fn quasistatic_energy_at(s0: &StateVector, sched: &AdiabatSchedule, omega: f64) -> Result<f64> {
    let alpha = sched.alpha();
    let w0 = sched.omega_start;
    if alpha.abs() / w0 > 0.2 {
        return Err(OttoError::Domain(format!(
            "second-order adiabat expression outside its regime: |alpha|/omega = {:.3}",
            alpha.abs() / w0
        )));
    }
    let r = omega / w0;
    let k = (alpha / (2.0 * w0)).powi(2);
    Ok(s0.energy * r * (1.0 + k) - s0.lagrangian * r * k + s0.correlation * alpha * omega / (4.0 * w0))
}
