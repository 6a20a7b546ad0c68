use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle::{cycle_metrics, limit_cycle, AdiabatMode, EngineSpec, TimeAllocation};
use crate::error::{OttoError, Result};

/// Sampling and classification settings of a random allocation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub seed: u64,
    /// Each branch duration is drawn log-uniformly from `[tau_min, tau_max]`.
    pub tau_min: f64,
    pub tau_max: f64,
    pub mode: AdiabatMode,
    /// An adiabat is sudden when `|alpha| / omega_end` exceeds this.
    pub sudden_threshold: f64,
    /// An adiabat is quasistatic-like when `|alpha| / omega_end` is below this.
    pub quasistatic_threshold: f64,
}

impl SweepConfig {
    /// Defaults: durations over `[1e-2, 1e3] / omega_c`, numeric adiabats,
    /// thresholds 5 and 0.05.
    pub fn new(engine: &EngineSpec, n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            tau_min: 1e-2 / engine.omega_c,
            tau_max: 1e3 / engine.omega_c,
            mode: AdiabatMode::Numeric,
            sudden_threshold: 5.0,
            quasistatic_threshold: 0.05,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(OttoError::InvalidParameter("sweep needs n >= 1".into()));
        }
        if !(self.tau_min > 0.0) || !(self.tau_max >= self.tau_min) || !self.tau_max.is_finite() {
            return Err(OttoError::InvalidParameter(format!(
                "sweep needs 0 < tau_min <= tau_max < inf, got [{}, {}]",
                self.tau_min, self.tau_max
            )));
        }
        if !(self.quasistatic_threshold > 0.0) || !(self.sudden_threshold > self.quasistatic_threshold) {
            return Err(OttoError::InvalidParameter(format!(
                "need 0 < quasistatic threshold < sudden threshold, got {} and {}",
                self.quasistatic_threshold, self.sudden_threshold
            )));
        }
        Ok(())
    }
}

/// Regime flags of one sampled cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepTags {
    pub sudden_hc: bool,
    pub sudden_ch: bool,
    /// Both adiabats below the quasistatic threshold.
    pub quasistatic_like: bool,
}

impl SweepTags {
    pub fn label(&self) -> &'static str {
        match (self.sudden_hc, self.sudden_ch, self.quasistatic_like) {
            (_, _, true) => "quasistatic",
            (true, true, _) => "sudden",
            (true, false, _) => "sudden-hc",
            (false, true, _) => "sudden-ch",
            _ => "intermediate",
        }
    }
}

/// `|alpha| / omega_end` for a constant-alpha ramp.
pub fn nonadiabaticity(omega_start: f64, omega_end: f64, tau: f64) -> f64 {
    (omega_end / omega_start).ln().abs() / tau / omega_end
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub seed_index: usize,
    pub allocation: TimeAllocation,
    pub tau_total: f64,
    pub work: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
    pub efficiency: Option<f64>,
    pub power: f64,
    pub entropy_production: f64,
    pub tags: SweepTags,
    /// Solver failure for this record, if any; the numbers are NaN then.
    pub error: Option<String>,
}

/// The allocation drawn for record `index`; each record owns an RNG stream so
/// the result does not depend on scheduling.
pub fn sample_allocation(cfg: &SweepConfig, index: usize) -> TimeAllocation {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let (lo, hi) = (cfg.tau_min.ln(), cfg.tau_max.ln());
    let mut draw = || (lo + rng.random::<f64>() * (hi - lo)).exp();
    TimeAllocation {
        tau_h: draw(),
        tau_hc: draw(),
        tau_c: draw(),
        tau_ch: draw(),
    }
}

fn classify(engine: &EngineSpec, alloc: &TimeAllocation, cfg: &SweepConfig) -> SweepTags {
    let hc = nonadiabaticity(engine.omega_h, engine.omega_c, alloc.tau_hc);
    let ch = nonadiabaticity(engine.omega_c, engine.omega_h, alloc.tau_ch);
    SweepTags {
        sudden_hc: hc > cfg.sudden_threshold,
        sudden_ch: ch > cfg.sudden_threshold,
        quasistatic_like: hc < cfg.quasistatic_threshold && ch < cfg.quasistatic_threshold,
    }
}

/// Solves one sampled limit cycle.
pub fn sweep_record(engine: &EngineSpec, cfg: &SweepConfig, index: usize) -> SweepRecord {
    let allocation = sample_allocation(cfg, index);
    let tags = classify(engine, &allocation, cfg);
    let solved = limit_cycle(engine, &allocation, cfg.mode).and_then(|lc| cycle_metrics(&lc, engine, &allocation));
    let mut rec = SweepRecord {
        seed_index: index,
        allocation,
        tau_total: allocation.total(),
        work: f64::NAN,
        heat_hot: f64::NAN,
        heat_cold: f64::NAN,
        efficiency: None,
        power: f64::NAN,
        entropy_production: f64::NAN,
        tags,
        error: None,
    };
    match solved {
        Ok(m) => {
            rec.work = m.work;
            rec.heat_hot = m.heat_hot;
            rec.heat_cold = m.heat_cold;
            rec.efficiency = m.efficiency;
            rec.power = m.power;
            rec.entropy_production = m.entropy_production;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Random time-allocation sweep, in record order, computed in parallel.
pub fn random_sweep(engine: &EngineSpec, cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    Ok((0..cfg.n).into_par_iter().map(|i| sweep_record(engine, cfg, i)).collect())
}
