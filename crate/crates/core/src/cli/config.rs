use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::{FormulaMode, SweepConfig};
use crate::cycle::{AdiabatMode, EngineSpec, TimeAllocation};
use crate::error::{OttoError, Result};
use crate::ode::Tolerances;
use crate::state::BathSpec;

/// Environment variable read for the default worker count of `sweep`.
pub const THREADS_ENV: &str = "OTTO_THREADS";

/// How dimensional quantities are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Absolute,
    /// Energies in units of `omega_c`, times in `1/omega_c`.
    OmegaC,
}

/// Everything a command can be configured with. Defaults are the parameters
/// of the reference cycle (`omega_h = 2`, `omega_c = 1`, `T_h = 5`, `T_c = 1`,
/// `Gamma = 0.03`, `tau = 6, 1, 12, 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega_h: f64,
    pub omega_c: f64,
    pub t_h: f64,
    pub t_c: f64,
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub tau_h: f64,
    pub tau_hc: f64,
    pub tau_c: f64,
    pub tau_ch: f64,
    pub adiabat_mode: AdiabatMode,
    pub formula: FormulaMode,
    pub dt: f64,
    pub sweep_n: usize,
    pub seed: u64,
    pub sweep_tau_min: Option<f64>,
    pub sweep_tau_max: Option<f64>,
    pub sudden_threshold: f64,
    pub quasistatic_threshold: f64,
    pub power_curve_points: usize,
    pub rtol: f64,
    pub atol: f64,
    pub oracle_n_max: Option<usize>,
    pub oracle_max_cycles: usize,
    pub oracle_tol: f64,
    pub threads: Option<usize>,
    pub units: Units,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega_h: 2.0,
            omega_c: 1.0,
            t_h: 5.0,
            t_c: 1.0,
            gamma_h: 0.03,
            gamma_c: 0.03,
            tau_h: 6.0,
            tau_hc: 1.0,
            tau_c: 12.0,
            tau_ch: 1.0,
            adiabat_mode: AdiabatMode::Numeric,
            formula: FormulaMode::Exact,
            dt: 0.05,
            sweep_n: 1000,
            seed: 1,
            sweep_tau_min: None,
            sweep_tau_max: None,
            sudden_threshold: 5.0,
            quasistatic_threshold: 0.05,
            power_curve_points: 25,
            rtol: 1e-10,
            atol: 1e-12,
            oracle_n_max: None,
            oracle_max_cycles: 400,
            oracle_tol: 1e-5,
            threads: None,
            units: Units::Absolute,
            output: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| OttoError::Config(format!("key '{key}': cannot parse '{value}'")))
}

fn auto<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

/// Shortest round-trip text, in exponent form for very small or large values.
fn text(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn show<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

impl RunConfig {
    /// Key names in `--explain` order.
    pub const KEYS: [&'static str; 28] = [
        "omega_h",
        "omega_c",
        "t_h",
        "t_c",
        "gamma_h",
        "gamma_c",
        "tau_h",
        "tau_hc",
        "tau_c",
        "tau_ch",
        "adiabat_mode",
        "formula",
        "dt",
        "sweep_n",
        "seed",
        "sweep_tau_min",
        "sweep_tau_max",
        "sudden_threshold",
        "quasistatic_threshold",
        "power_curve_points",
        "rtol",
        "atol",
        "oracle_n_max",
        "oracle_max_cycles",
        "oracle_tol",
        "threads",
        "units",
        "output",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "omega_h" => self.omega_h = num(key, v)?,
            "omega_c" => self.omega_c = num(key, v)?,
            "t_h" => self.t_h = num(key, v)?,
            "t_c" => self.t_c = num(key, v)?,
            "gamma" => {
                self.gamma_h = num(key, v)?;
                self.gamma_c = self.gamma_h;
            }
            "gamma_h" => self.gamma_h = num(key, v)?,
            "gamma_c" => self.gamma_c = num(key, v)?,
            "tau_h" => self.tau_h = num(key, v)?,
            "tau_hc" => self.tau_hc = num(key, v)?,
            "tau_c" => self.tau_c = num(key, v)?,
            "tau_ch" => self.tau_ch = num(key, v)?,
            "adiabat_mode" => self.adiabat_mode = v.parse()?,
            "formula" => {
                self.formula = match v {
                    "exact" => FormulaMode::Exact,
                    "high-temperature" => FormulaMode::HighTemperature,
                    _ => {
                        return Err(OttoError::Config(format!(
                            "key 'formula': expected exact or high-temperature, got '{v}'"
                        )))
                    }
                }
            }
            "dt" => self.dt = num(key, v)?,
            "sweep_n" => self.sweep_n = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "sweep_tau_min" => self.sweep_tau_min = auto(key, v)?,
            "sweep_tau_max" => self.sweep_tau_max = auto(key, v)?,
            "sudden_threshold" => self.sudden_threshold = num(key, v)?,
            "quasistatic_threshold" => self.quasistatic_threshold = num(key, v)?,
            "power_curve_points" => self.power_curve_points = num(key, v)?,
            "rtol" => self.rtol = num(key, v)?,
            "atol" => self.atol = num(key, v)?,
            "oracle_n_max" => self.oracle_n_max = auto(key, v)?,
            "oracle_max_cycles" => self.oracle_max_cycles = num(key, v)?,
            "oracle_tol" => self.oracle_tol = num(key, v)?,
            "threads" => self.threads = auto(key, v)?,
            "units" => {
                self.units = match v {
                    "absolute" => Units::Absolute,
                    "omega_c" => Units::OmegaC,
                    _ => {
                        return Err(OttoError::Config(format!(
                            "key 'units': expected absolute or omega_c, got '{v}'"
                        )))
                    }
                }
            }
            "output" => self.output = (v != "-").then(|| v.to_string()),
            other => return Err(OttoError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub(crate) fn get(&self, key: &str) -> String {
        match key {
            "omega_h" => text(self.omega_h),
            "omega_c" => text(self.omega_c),
            "t_h" => text(self.t_h),
            "t_c" => text(self.t_c),
            "gamma_h" => text(self.gamma_h),
            "gamma_c" => text(self.gamma_c),
            "tau_h" => text(self.tau_h),
            "tau_hc" => text(self.tau_hc),
            "tau_c" => text(self.tau_c),
            "tau_ch" => text(self.tau_ch),
            "adiabat_mode" => self.adiabat_mode.to_string(),
            "formula" => match self.formula {
                FormulaMode::Exact => "exact".into(),
                FormulaMode::HighTemperature => "high-temperature".into(),
            },
            "dt" => text(self.dt),
            "sweep_n" => self.sweep_n.to_string(),
            "seed" => self.seed.to_string(),
            "sweep_tau_min" => self.sweep_tau_min.map_or_else(|| "auto".into(), text),
            "sweep_tau_max" => self.sweep_tau_max.map_or_else(|| "auto".into(), text),
            "sudden_threshold" => text(self.sudden_threshold),
            "quasistatic_threshold" => text(self.quasistatic_threshold),
            "power_curve_points" => self.power_curve_points.to_string(),
            "rtol" => text(self.rtol),
            "atol" => text(self.atol),
            "oracle_n_max" => show(&self.oracle_n_max),
            "oracle_max_cycles" => self.oracle_max_cycles.to_string(),
            "oracle_tol" => text(self.oracle_tol),
            "threads" => show(&self.threads),
            "units" => match self.units {
                Units::Absolute => "absolute".into(),
                Units::OmegaC => "omega_c".into(),
            },
            "output" => self.output.clone().unwrap_or_else(|| "-".into()),
            _ => unreachable!("unlisted key {key}"),
        }
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| OttoError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)
                .map_err(|e| OttoError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OttoError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| OttoError::Config(format!("override '{kv}' is not key=value")))?;
        self.set(k, v)
    }

    /// The full configuration in config-file syntax.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    pub fn engine(&self) -> Result<EngineSpec> {
        if !(self.t_h > 0.0) || !(self.t_c > 0.0) || !(self.gamma_h > 0.0) || !(self.gamma_c > 0.0) {
            return Err(OttoError::Config(format!(
                "bath temperatures and conductances must be positive, got T = ({}, {}), Gamma = ({}, {})",
                self.t_h, self.t_c, self.gamma_h, self.gamma_c
            )));
        }
        EngineSpec::new(
            self.omega_h,
            self.omega_c,
            BathSpec::new(self.t_h, self.gamma_h),
            BathSpec::new(self.t_c, self.gamma_c),
        )
        .map_err(|e| OttoError::Config(e.to_string()))
    }

    pub fn allocation(&self) -> Result<TimeAllocation> {
        TimeAllocation::new(self.tau_h, self.tau_hc, self.tau_c, self.tau_ch).map_err(|e| OttoError::Config(e.to_string()))
    }

    pub fn tolerances(&self) -> Result<Tolerances> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(OttoError::Config(format!(
                "tolerances must be positive, got rtol = {}, atol = {}",
                self.rtol, self.atol
            )));
        }
        Ok(Tolerances::new(self.rtol, self.atol))
    }

    pub fn sweep(&self, engine: &EngineSpec) -> SweepConfig {
        let mut s = SweepConfig::new(engine, self.sweep_n, self.seed);
        s.mode = self.adiabat_mode;
        s.tau_min = self.sweep_tau_min.unwrap_or(s.tau_min);
        s.tau_max = self.sweep_tau_max.unwrap_or(s.tau_max);
        s.sudden_threshold = self.sudden_threshold;
        s.quasistatic_threshold = self.quasistatic_threshold;
        s
    }

    /// Worker count for `sweep`: the config key, else the environment
    /// variable, else rayon's default.
    pub fn thread_count(&self) -> Result<Option<usize>> {
        if self.threads.is_some() {
            return Ok(self.threads);
        }
        match std::env::var(THREADS_ENV) {
            Ok(v) => num::<usize>(THREADS_ENV, v.trim()).map(Some),
            Err(_) => Ok(None),
        }
    }

    pub(crate) fn scale(&self) -> Scale {
        match self.units {
            Units::Absolute => Scale { energy: 1.0, time: 1.0 },
            Units::OmegaC => Scale {
                energy: self.omega_c,
                time: 1.0 / self.omega_c,
            },
        }
    }
}

/// Divisors turning absolute values into reported values.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scale {
    pub energy: f64,
    pub time: f64,
}

impl Scale {
    pub fn energy(&self, x: f64) -> f64 {
        x / self.energy
    }
    pub fn time(&self, x: f64) -> f64 {
        x / self.time
    }
    pub fn rate(&self, x: f64) -> f64 {
        x * self.time
    }
    pub fn power(&self, x: f64) -> f64 {
        x * self.time / self.energy
    }
}
