use thiserror::Error;

/// Errors raised by the engine model, its solvers and the oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OttoError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unphysical state: X^2 = {casimir_sq:.6e} with omega/2 = {half_omega:.6e}")]
    UnphysicalState { casimir_sq: f64, half_omega: f64 },

    #[error("pure state: X - omega/2 = {gap:.3e}, inverse temperature diverges")]
    PureState { gap: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("no unique limit cycle: spectral radius {0:.6} >= 1")]
    NoLimitCycle(f64),

    #[error("did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("Fock truncation leak: top-level population {population:.3e} exceeds {tolerance:.1e} at n_max = {n_max}")]
    TruncationLeak {
        population: f64,
        tolerance: f64,
        n_max: usize,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, OttoError>;
