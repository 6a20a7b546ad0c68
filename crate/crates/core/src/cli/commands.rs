use std::fmt::Write as _;

use serde_json::{json, Value};

use super::config::{RunConfig, Scale};
use super::format::sig12;
use crate::analysis::{
    adiabat_time_floor, efficiency_hierarchy, entropy_production_quasistatic, f_transport, friction_upper_bound,
    friction_upper_bound_constructive, g_entropy, g_work, optimal_isochore_allocation, optimal_time_partition,
    quasistatic_power_bound, quasistatic_work, random_sweep, sudden_cycle, sudden_work_diagnostics,
};
use crate::cycle::{cycle_metrics, limit_cycle_with, trajectory_sample, EngineSpec};
use crate::error::{OttoError, Result};
use crate::fock_oracle::{oracle_config, oracle_limit_cycle, FockConfig};
use crate::propagators::friction_work_closed_form;
use crate::state::{von_neumann_entropy, StateVector};

const TRAJECTORY_HEADER: &str = "t,branch,omega,H,L,D,S_vn,S_e,T_int,heat_current,power";
const SWEEP_HEADER: &str = "seed_index,tau_h,tau_hc,tau_c,tau_ch,tau_total,W,Qh,Qc,eta,P,dSu,tag";

fn row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

/// One period of the limit cycle sampled every `dt`, as CSV.
pub fn simulate(cfg: &RunConfig) -> Result<String> {
    let engine = cfg.engine()?;
    let alloc = cfg.allocation()?;
    let s = cfg.scale();
    let samples = trajectory_sample(&engine, &alloc, cfg.adiabat_mode, cfg.dt)?;
    let mut out = String::with_capacity(160 * (samples.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for p in &samples {
        row(
            &mut out,
            &[
                sig12(s.time(p.t)),
                p.branch.label().to_string(),
                sig12(s.energy(p.omega)),
                sig12(s.energy(p.state.energy)),
                sig12(s.energy(p.state.lagrangian)),
                sig12(p.state.correlation),
                sig12(p.s_vn),
                sig12(p.s_e),
                sig12(s.energy(p.t_int)),
                sig12(s.power(p.heat_current)),
                sig12(s.power(p.power)),
            ],
        );
    }
    Ok(out)
}

fn state_json(v: &StateVector, s: Scale) -> Value {
    json!({
        "H": s.energy(v.energy),
        "L": s.energy(v.lagrangian),
        "D": v.correlation,
        "omega": s.energy(v.omega),
    })
}

/// Corners, cycle map, thermodynamics and convergence diagnostics as JSON.
pub fn limit_cycle_report(cfg: &RunConfig) -> Result<Value> {
    let engine = cfg.engine()?;
    let alloc = cfg.allocation()?;
    let s = cfg.scale();
    let lc = limit_cycle_with(&engine, &alloc, cfg.adiabat_mode, cfg.tolerances()?)?;
    let m = cycle_metrics(&lc, &engine, &alloc)?;
    let names = ["A", "B", "C", "D"];
    let corners: serde_json::Map<String, Value> = names
        .iter()
        .zip(lc.corners.iter().zip(m.corners.iter()))
        .map(|(n, (v, e))| {
            let mut j = state_json(v, s);
            j["S_vn"] = json!(e.s_vn);
            j["S_e"] = json!(e.s_e);
            j["T_int"] = json!(s.energy(e.t_int));
            (n.to_string(), j)
        })
        .collect();
    let matrix: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| lc.map.matrix[(i, j)]).collect()).collect();
    Ok(json!({
        "adiabat_mode": cfg.adiabat_mode.to_string(),
        "corners": corners,
        "cycle_map": {
            "matrix": matrix,
            "offset": [lc.map.offset[0], lc.map.offset[1], lc.map.offset[2]],
            "spectral_radius": lc.spectral_radius,
        },
        "metrics": {
            "W": s.energy(m.work),
            "Q_h": s.energy(m.heat_hot),
            "Q_c": s.energy(m.heat_cold),
            "eta": m.efficiency,
            "P": s.power(m.power),
            "dS_u": m.entropy_production,
            "W_f_hc": s.energy(m.friction_hc),
            "W_f_ch": s.energy(m.friction_ch),
            "is_engine": m.is_engine,
            "period": s.time(m.period),
        },
        "convergence": {
            "residual": lc.residual,
            "iteration_gap": lc.iteration_gap,
            "iterations": lc.iterations,
        },
    }))
}

/// Random allocation sweep as CSV in record order.
pub fn sweep(cfg: &RunConfig) -> Result<String> {
    let engine = cfg.engine()?;
    let sc = cfg.sweep(&engine);
    let records = match cfg.thread_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| OttoError::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(|| random_sweep(&engine, &sc))?,
        None => random_sweep(&engine, &sc)?,
    };
    let s = cfg.scale();
    let mut out = String::with_capacity(200 * (records.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in &records {
        let a = r.allocation;
        let tag = if r.error.is_some() { "failed" } else { r.tags.label() };
        row(
            &mut out,
            &[
                r.seed_index.to_string(),
                sig12(s.time(a.tau_h)),
                sig12(s.time(a.tau_hc)),
                sig12(s.time(a.tau_c)),
                sig12(s.time(a.tau_ch)),
                sig12(s.time(r.tau_total)),
                sig12(s.energy(r.work)),
                sig12(s.energy(r.heat_hot)),
                sig12(s.energy(r.heat_cold)),
                sig12(r.efficiency.unwrap_or(f64::NAN)),
                sig12(s.power(r.power)),
                sig12(r.entropy_production),
                tag.to_string(),
            ],
        );
    }
    Ok(out)
}

fn power_curve(engine: &EngineSpec, cfg: &RunConfig, s: Scale) -> Result<Value> {
    let floor = adiabat_time_floor(engine);
    let n = cfg.power_curve_points.max(2);
    let gamma = 0.5 * (cfg.gamma_h + cfg.gamma_c);
    // log-spaced from just above the floor to 100 floors
    let pts: Result<Vec<Value>> = (0..n)
        .map(|k| {
            let tau = floor * (1.01f64).powf(1.0 - k as f64 / (n - 1) as f64) * 100f64.powf(k as f64 / (n - 1) as f64);
            let p = quasistatic_power_bound(engine, gamma, tau, cfg.formula)?;
            Ok(json!({ "tau": s.time(tau), "P_q": s.power(p) }))
        })
        .collect();
    Ok(json!({ "gamma": s.rate(gamma), "floor": s.time(floor), "points": pts? }))
}

/// Closed-form quantities at the configured parameters as JSON.
pub fn analyze(cfg: &RunConfig) -> Result<Value> {
    let engine = cfg.engine()?;
    let alloc = cfg.allocation()?;
    let s = cfg.scale();
    let mode = cfg.formula;
    let (x_h, x_c) = (cfg.gamma_h * alloc.tau_h, cfg.gamma_c * alloc.tau_c);
    let (part_h, part_c) = optimal_time_partition(cfg.gamma_h, cfg.gamma_c, alloc.tau_h + alloc.tau_c)?;
    let tau_adi = alloc.tau_hc + alloc.tau_ch;
    let iso_x = if cfg.gamma_h == cfg.gamma_c && tau_adi > 0.0 {
        Some(optimal_isochore_allocation(cfg.gamma_h, tau_adi)?)
    } else {
        None
    };
    let sudden = sudden_cycle(&engine, mode)?;
    let diag = sudden_work_diagnostics(&engine)?;
    let r = engine.temperature_ratio();
    let hierarchy = if r >= 1.0 { Some(efficiency_hierarchy(r)?) } else { None };
    let alpha_hc = (alloc.tau_hc > 0.0).then(|| (engine.omega_c / engine.omega_h).ln() / alloc.tau_hc);
    let e = |x: f64| s.energy(x);
    Ok(json!({
        "formula": cfg.get("formula"),
        "compression_ratio": engine.compression_ratio(),
        "temperature_ratio": r,
        "quasistatic": {
            "G_W": e(g_work(&engine, mode)),
            "G_S": g_entropy(&engine, mode),
            "F": f_transport(x_c, x_h)?,
            "W_q": e(quasistatic_work(&engine, x_c, x_h, mode)?),
            "dS_u": entropy_production_quasistatic(&engine, x_c, x_h, mode)?,
        },
        "optimal_partition": {
            "tau_iso": s.time(alloc.tau_h + alloc.tau_c),
            "tau_h": s.time(part_h),
            "tau_c": s.time(part_c),
            "F": f_transport(cfg.gamma_c * part_c, cfg.gamma_h * part_h)?,
        },
        "optimal_isochore_allocation": iso_x.map(|x| json!({
            "tau_adi": s.time(tau_adi),
            "x": x,
            "tau_h": s.time(x / cfg.gamma_h),
            "tau_c": s.time(x / cfg.gamma_c),
        })),
        "power_bound": power_curve(&engine, cfg, s)?,
        "sudden": {
            "W_s": e(sudden.work),
            "Q_h": e(sudden.heat_hot),
            "Q_c": e(sudden.heat_cold),
            "eta": sudden.efficiency,
            "diagnostics": {
                "constructive": e(diag.constructive),
                "factored": e(diag.factored),
                "printed_full_argument": e(diag.printed_full_argument),
                "printed_half_argument": e(diag.printed_half_argument),
                "high_temperature": e(diag.high_temperature),
                "printed_optimum": e(diag.printed_optimum),
                "constructive_optimum": e(diag.constructive_optimum),
            },
        },
        "friction": {
            "upper_bound": e(friction_upper_bound(&engine, mode)?),
            "upper_bound_constructive": e(friction_upper_bound_constructive(&engine, mode)?),
            "alpha_hc": alpha_hc.map(|a| s.rate(a)),
            "closed_form_at_alpha_hc": alpha_hc.map(|a| e(friction_work_closed_form(&engine, a, mode))),
        },
        "efficiency": hierarchy.map(|h| json!({
            "sudden": h.sudden,
            "endoreversible": h.endoreversible,
            "carnot": h.carnot,
        })),
    }))
}

/// Outcome of the Fock-space cross-check.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub text: String,
    pub passed: bool,
}

/// Compares limit-cycle corners and entropies with the Fock-space oracle.
pub fn oracle_check(cfg: &RunConfig) -> Result<OracleReport> {
    let engine = cfg.engine()?;
    let alloc = cfg.allocation()?;
    let fast = limit_cycle_with(&engine, &alloc, cfg.adiabat_mode, cfg.tolerances()?)?;
    let mut fc = match cfg.oracle_n_max {
        Some(n) => FockConfig::new(n),
        None => oracle_config(&engine)?,
    };
    fc.tol = cfg.tolerances()?;
    let oc = oracle_limit_cycle(&engine, &alloc, &fc, cfg.oracle_max_cycles)?;
    let mut text = String::new();
    let mut passed = true;
    let _ = writeln!(text, "oracle n_max = {}, cycles = {}", oc.n_max, oc.cycles);
    for (i, name) in ["A", "B", "C", "D"].iter().enumerate() {
        let (f, o) = (&fast.corners[i], &oc.corners[i]);
        let rel = f.distance(o) / o.energy_norm();
        let ok = rel <= cfg.oracle_tol;
        passed &= ok;
        let _ = writeln!(
            text,
            "{} corner {name}: relative difference {} (tol {})",
            if ok { "PASS" } else { "FAIL" },
            sig12(rel),
            sig12(cfg.oracle_tol)
        );
        let ds = (von_neumann_entropy(f)? - oc.entropies[i]).abs();
        let ok = ds <= 1e-6;
        passed &= ok;
        let _ = writeln!(
            text,
            "{} entropy {name}: difference {} (tol 1e-06)",
            if ok { "PASS" } else { "FAIL" },
            sig12(ds)
        );
    }
    let checks = [
        ("trace", oc.max_trace_error, 1e-10),
        ("hermiticity", oc.max_hermiticity_error, 1e-10),
        ("positivity", (-oc.min_eigenvalue).max(0.0), 1e-10),
    ];
    for (name, err, tol) in checks {
        let ok = err <= tol;
        passed &= ok;
        let _ = writeln!(
            text,
            "{} {name}: {} (tol {})",
            if ok { "PASS" } else { "FAIL" },
            sig12(err),
            sig12(tol)
        );
    }
    Ok(OracleReport { text, passed })
}
