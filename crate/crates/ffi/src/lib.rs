//! C ABI for `otto-core`.
//!
//! Engines and sweep results are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`OttoStatus`]; on failure the message is kept per thread and can be
//! copied out with [`otto_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use otto_core::analysis::{random_sweep, SweepConfig, SweepRecord};
use otto_core::cycle::{cycle_metrics, limit_cycle, AdiabatMode, EngineSpec, TimeAllocation};
use otto_core::state::{equilibrium_energy, von_neumann_entropy, BathSpec, StateVector};
use otto_core::OttoError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OttoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    UnphysicalState = 3,
    SolverFailure = 4,
    IndexOutOfRange = 5,
    Panic = 6,
}

/// Adiabat propagation mode.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OttoAdiabatMode {
    Numeric = 0,
    Sudden = 1,
    Quasistatic = 2,
}

impl From<OttoAdiabatMode> for AdiabatMode {
    fn from(m: OttoAdiabatMode) -> Self {
        match m {
            OttoAdiabatMode::Numeric => AdiabatMode::Numeric,
            OttoAdiabatMode::Sudden => AdiabatMode::Sudden,
            OttoAdiabatMode::Quasistatic => AdiabatMode::Quasistatic,
        }
    }
}

/// Branch durations of one cycle.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OttoAllocation {
    pub tau_h: f64,
    pub tau_hc: f64,
    pub tau_c: f64,
    pub tau_ch: f64,
}

/// Expectations of H, L and D at frequency omega.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OttoState {
    pub energy: f64,
    pub lagrangian: f64,
    pub correlation: f64,
    pub omega: f64,
}

impl From<StateVector> for OttoState {
    fn from(s: StateVector) -> Self {
        Self {
            energy: s.energy,
            lagrangian: s.lagrangian,
            correlation: s.correlation,
            omega: s.omega,
        }
    }
}

/// Limit-cycle corners A, B, C, D and the per-cycle thermodynamics.
/// `efficiency` is NaN when no heat flows in from the hot bath.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OttoCycleResult {
    pub corners: [OttoState; 4],
    pub work: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
    pub efficiency: f64,
    pub power: f64,
    pub entropy_production: f64,
    pub friction_hc: f64,
    pub friction_ch: f64,
    pub spectral_radius: f64,
}

/// One record of a random sweep; numbers are NaN when `failed` is nonzero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OttoSweepRecord {
    pub allocation: OttoAllocation,
    pub work: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
    pub efficiency: f64,
    pub power: f64,
    pub entropy_production: f64,
    pub sudden_hc: u8,
    pub sudden_ch: u8,
    pub quasistatic_like: u8,
    pub failed: u8,
}

/// Opaque engine handle.
pub struct OttoEngine(EngineSpec);

/// Opaque sweep result handle.
pub struct OttoSweep(Vec<SweepRecord>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &OttoError) -> OttoStatus {
    match e {
        OttoError::InvalidParameter(_) | OttoError::Config(_) | OttoError::Domain(_) => OttoStatus::InvalidParameter,
        OttoError::UnphysicalState { .. } | OttoError::PureState { .. } => OttoStatus::UnphysicalState,
        _ => OttoStatus::SolverFailure,
    }
}

/// Runs `f`, recording errors and panics.
fn guard<F: FnOnce() -> Result<(), (OttoStatus, String)>>(f: F) -> OttoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OttoStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside otto-core".into());
            OttoStatus::Panic
        }
    }
}

fn core<T>(r: otto_core::Result<T>) -> Result<T, (OttoStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (OttoStatus, String) {
    (OttoStatus::NullPointer, format!("{what} is null"))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL,
/// or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn otto_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Creates an engine with `omega_h > omega_c > 0` and positive bath
/// temperatures and conductances.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn otto_engine_new(
    omega_h: f64,
    omega_c: f64,
    t_hot: f64,
    gamma_hot: f64,
    t_cold: f64,
    gamma_cold: f64,
    out: *mut *mut OttoEngine,
) -> OttoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(t_hot > 0.0 && t_cold > 0.0 && gamma_hot > 0.0 && gamma_cold > 0.0) {
            return Err((
                OttoStatus::InvalidParameter,
                format!("bath temperatures and conductances must be positive, got T = ({t_hot}, {t_cold}), Gamma = ({gamma_hot}, {gamma_cold})"),
            ));
        }
        let e = core(EngineSpec::new(
            omega_h,
            omega_c,
            BathSpec::new(t_hot, gamma_hot),
            BathSpec::new(t_cold, gamma_cold),
        ))?;
        *out = Box::into_raw(Box::new(OttoEngine(e)));
        Ok(())
    })
}

/// Releases an engine; null is ignored.
///
/// # Safety
/// `engine` must come from [`otto_engine_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn otto_engine_free(engine: *mut OttoEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Solves the limit cycle for one allocation.
///
/// # Safety
/// `engine` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn otto_limit_cycle(
    engine: *const OttoEngine,
    alloc: OttoAllocation,
    mode: OttoAdiabatMode,
    out: *mut OttoCycleResult,
) -> OttoStatus {
    guard(|| {
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let a = core(TimeAllocation::new(alloc.tau_h, alloc.tau_hc, alloc.tau_c, alloc.tau_ch))?;
        let lc = core(limit_cycle(&engine.0, &a, mode.into()))?;
        let m = core(cycle_metrics(&lc, &engine.0, &a))?;
        *out = OttoCycleResult {
            corners: lc.corners.map(OttoState::from),
            work: m.work,
            heat_hot: m.heat_hot,
            heat_cold: m.heat_cold,
            efficiency: m.efficiency.unwrap_or(f64::NAN),
            power: m.power,
            entropy_production: m.entropy_production,
            friction_hc: m.friction_hc,
            friction_ch: m.friction_ch,
            spectral_radius: lc.spectral_radius,
        };
        Ok(())
    })
}

/// Runs a random allocation sweep with default sampling ranges.
///
/// # Safety
/// `engine` must be a live handle and `out` valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn otto_sweep_run(
    engine: *const OttoEngine,
    n: usize,
    seed: u64,
    mode: OttoAdiabatMode,
    out: *mut *mut OttoSweep,
) -> OttoStatus {
    guard(|| {
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = SweepConfig::new(&engine.0, n, seed);
        cfg.mode = mode.into();
        let records = core(random_sweep(&engine.0, &cfg))?;
        *out = Box::into_raw(Box::new(OttoSweep(records)));
        Ok(())
    })
}

/// Number of records in a sweep; 0 for null.
///
/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn otto_sweep_len(sweep: *const OttoSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.0.len())
}

/// Copies record `index` of a sweep.
///
/// # Safety
/// `sweep` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn otto_sweep_get(sweep: *const OttoSweep, index: usize, out: *mut OttoSweepRecord) -> OttoStatus {
    guard(|| {
        let sweep = sweep.as_ref().ok_or_else(|| null("sweep"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = sweep.0.get(index).ok_or_else(|| {
            (
                OttoStatus::IndexOutOfRange,
                format!("record {index} out of range (len {})", sweep.0.len()),
            )
        })?;
        let a = r.allocation;
        *out = OttoSweepRecord {
            allocation: OttoAllocation {
                tau_h: a.tau_h,
                tau_hc: a.tau_hc,
                tau_c: a.tau_c,
                tau_ch: a.tau_ch,
            },
            work: r.work,
            heat_hot: r.heat_hot,
            heat_cold: r.heat_cold,
            efficiency: r.efficiency.unwrap_or(f64::NAN),
            power: r.power,
            entropy_production: r.entropy_production,
            sudden_hc: r.tags.sudden_hc.into(),
            sudden_ch: r.tags.sudden_ch.into(),
            quasistatic_like: r.tags.quasistatic_like.into(),
            failed: r.error.is_some().into(),
        };
        Ok(())
    })
}

/// Releases a sweep; null is ignored.
///
/// # Safety
/// `sweep` must come from [`otto_sweep_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn otto_sweep_free(sweep: *mut OttoSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// `(omega/2) coth(omega / 2T)`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn otto_equilibrium_energy(omega: f64, temperature: f64, out: *mut f64) -> OttoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = core(equilibrium_energy(omega, temperature))?;
        Ok(())
    })
}

/// Von Neumann entropy of the Gaussian state with the given expectations.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn otto_von_neumann_entropy(state: OttoState, out: *mut f64) -> OttoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = StateVector::new(state.energy, state.lagrangian, state.correlation, state.omega);
        *out = core(von_neumann_entropy(&s))?;
        Ok(())
    })
}
