use serde::{Deserialize, Serialize};

use super::closed_form::g_work;
use super::sudden::sudden_work;
use crate::cycle::EngineSpec;
use crate::error::{OttoError, Result};
use crate::propagators::FormulaMode;

const BISECTION_ITERATIONS: usize = 400;

/// Bisection for a sign change of `f` on `[lo, hi]`, run to adjacent floats.
pub(crate) fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(OttoError::Domain(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ln(cosh a - 1)` for `a >= 0` without overflow.
fn ln_cosh_m1(a: f64) -> f64 {
    // cosh a - 1 = 2 sinh^2(a/2)
    let y = 0.5 * a;
    let ln_sinh = if y < 20.0 {
        y.sinh().ln()
    } else {
        y - std::f64::consts::LN_2 + (-(-2.0 * y).exp()).ln_1p()
    };
    std::f64::consts::LN_2 + 2.0 * ln_sinh
}

/// Splits `tau_iso` between the isochores to maximize the transport factor:
/// `Gamma_h (cosh(Gamma_c tau_c) - 1) = Gamma_c (cosh(Gamma_h tau_h) - 1)`.
pub fn optimal_time_partition(gamma_h: f64, gamma_c: f64, tau_iso: f64) -> Result<(f64, f64)> {
    if !(gamma_h > 0.0) || !(gamma_c > 0.0) || !(tau_iso > 0.0) || !tau_iso.is_finite() {
        return Err(OttoError::InvalidParameter(format!(
            "partition needs positive conductances and finite tau_iso > 0, got {gamma_h}, {gamma_c}, {tau_iso}"
        )));
    }
    let g = |tau_h: f64| {
        let tau_c = tau_iso - tau_h;
        (gamma_h.ln() + ln_cosh_m1(gamma_c * tau_c)) - (gamma_c.ln() + ln_cosh_m1(gamma_h * tau_h))
    };
    let tau_h = bisect(g, 0.0, tau_iso)?;
    Ok((tau_h, tau_iso - tau_h))
}

/// Residual of `2x + Gamma tau_adi = 2 sinh x`.
pub fn isochore_allocation_residual(x: f64, gamma_tau_adi: f64) -> f64 {
    2.0 * x + gamma_tau_adi - 2.0 * x.sinh()
}

/// Positive root `x = Gamma tau_h = Gamma tau_c` of `2x + Gamma tau_adi = 2 sinh x`,
/// the isochore time maximizing `F / tau` for equal conductances.
pub fn optimal_isochore_allocation(gamma: f64, tau_adi: f64) -> Result<f64> {
    if !(gamma > 0.0) || !(tau_adi >= 0.0) || !tau_adi.is_finite() {
        return Err(OttoError::InvalidParameter(format!(
            "need Gamma > 0 and finite tau_adi >= 0, got {gamma}, {tau_adi}"
        )));
    }
    let c = gamma * tau_adi;
    if c == 0.0 {
        return Ok(0.0);
    }
    // 2 sinh x - 2x >= x^3/3, so (3c)^{1/3} bounds the root from above
    let hi = (3.0 * c).cbrt();
    let x = bisect(|x| isochore_allocation_residual(x, c), 0.0, hi)?;
    Ok(x)
}

/// Residual of the general optimal-cycle-time condition
/// `Gamma_c tau (cosh(Gamma_h tau_h) - 1) = sinh(x_h + x_c) - sinh(x_c) - sinh(x_h)`
/// with `tau` the total cycle time.
pub fn optimal_cycle_time_residual(gamma_h: f64, gamma_c: f64, tau_h: f64, tau_c: f64, tau: f64) -> f64 {
    let (xh, xc) = (gamma_h * tau_h, gamma_c * tau_c);
    gamma_c * tau * (xh.cosh() - 1.0) - ((xh + xc).sinh() - xc.sinh() - xh.sinh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Quasistatic,
    Sudden,
}

/// Grid for a compression-ratio scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CompressionMethod {
    AnalyticHighTemperature,
    Scan(CompressionGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompressionOptimum {
    /// Best compression ratio (refined between grid neighbours for scans).
    pub compression: f64,
    /// Best grid point, for scans.
    pub grid_compression: Option<f64>,
    /// Maximal produced work `-W` at `compression`.
    pub max_work: f64,
}

fn with_compression(template: &EngineSpec, c: f64) -> Result<EngineSpec> {
    EngineSpec::new(c * template.omega_c, template.omega_c, template.hot, template.cold)
}

/// Produced work `-W` at full equilibration for compression ratio `c`, with
/// `omega_c` and the baths of `template` held fixed.
pub fn produced_work(template: &EngineSpec, c: f64, regime: Regime, mode: FormulaMode) -> Result<f64> {
    let e = with_compression(template, c)?;
    match regime {
        Regime::Quasistatic => Ok(g_work(&e, mode)),
        Regime::Sudden => Ok(-sudden_work(&e, mode)?),
    }
}

/// Compression ratio maximizing the produced work of a fully equilibrated cycle.
pub fn optimal_compression(
    template: &EngineSpec,
    regime: Regime,
    method: CompressionMethod,
    mode: FormulaMode,
) -> Result<CompressionOptimum> {
    let r = template.temperature_ratio();
    if !(r > 1.0) {
        return Err(OttoError::InvalidParameter(format!("need T_h > T_c, got ratio {r}")));
    }
    match method {
        CompressionMethod::AnalyticHighTemperature => {
            let c = match regime {
                Regime::Quasistatic => r.sqrt(),
                Regime::Sudden => r.powf(0.25),
            };
            Ok(CompressionOptimum {
                compression: c,
                grid_compression: None,
                max_work: produced_work(template, c, regime, FormulaMode::HighTemperature)?,
            })
        }
        CompressionMethod::Scan(grid) => {
            if !(grid.lo > 1.0) || !(grid.hi > grid.lo) || !(grid.step > 0.0) {
                return Err(OttoError::InvalidParameter(format!("bad compression grid {grid:?}")));
            }
            let n = ((grid.hi - grid.lo) / grid.step + 1e-9).floor() as usize;
            let mut best = (grid.lo, f64::NEG_INFINITY);
            for k in 0..=n {
                let c = grid.lo + k as f64 * grid.step;
                let w = produced_work(template, c, regime, mode)?;
                if w > best.1 {
                    best = (c, w);
                }
            }
            let lo = (best.0 - grid.step).max(grid.lo);
            let hi = (best.0 + grid.step).min(grid.lo + n as f64 * grid.step);
            let c = golden_max(|c| produced_work(template, c, regime, mode).unwrap_or(f64::NEG_INFINITY), lo, hi);
            let refined = produced_work(template, c, regime, mode)?;
            let (compression, max_work) = if refined >= best.1 { (c, refined) } else { best };
            Ok(CompressionOptimum {
                compression,
                grid_compression: Some(best.0),
                max_work,
            })
        }
    }
}

/// Golden-section search for the maximum of a unimodal function.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (a.abs() + b.abs()) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}
