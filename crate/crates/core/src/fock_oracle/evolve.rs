use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{thermal_density, Density, FockConfig};
use crate::cycle::{EngineSpec, TimeAllocation};
use crate::error::{OttoError, Result};
use crate::ode::DormandPrince;
use crate::propagators::AdiabatSchedule;
use crate::state::{equilibrium_energy, BathSpec, StateVector};

fn flatten(rho: &DMatrix<Complex64>) -> Vec<f64> {
    let n = rho.nrows();
    let mut y = vec![0.0; 2 * n * n];
    for m in 0..n {
        for k in 0..n {
            let z = rho[(m, k)];
            y[2 * (m * n + k)] = z.re;
            y[2 * (m * n + k) + 1] = z.im;
        }
    }
    y
}

fn unflatten(y: &[f64], n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |m, k| Complex64::new(y[2 * (m * n + k)], y[2 * (m * n + k) + 1]))
}

fn same_frequency(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs()
}

/// Lindblad evolution at fixed frequency:
/// `k_down (a rho a+ - {a+a, rho}/2) + k_up (a+ rho a - {a a+, rho}/2)` plus
/// the free rotation. The dissipator is phase covariant and couples only
/// elements on the same diagonal `m - n`, so each diagonal is propagated by
/// its own matrix exponential in the interaction picture. The truncated
/// `a a+` keeps the trace exactly.
pub fn evolve_isochore(rho0: &Density, bath: &BathSpec, tau: f64, cfg: &FockConfig) -> Result<Density> {
    IsochoreStep::new(rho0.dim(), rho0.omega, bath, tau)?.run(rho0, cfg)
}

#[derive(Debug, Clone)]
pub(crate) struct IsochoreStep {
    omega: f64,
    tau: f64,
    // propagator for the diagonal at offset d, acting on (rho_{j+d, j})_j
    diagonals: Vec<DMatrix<f64>>,
}

impl IsochoreStep {
    pub(crate) fn new(n: usize, omega: f64, bath: &BathSpec, tau: f64) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(OttoError::InvalidParameter(format!("isochore duration must be >= 0, got {tau}")));
        }
        let (k_down, k_up) = bath.rates(omega);
        let top = |m: usize| if m + 1 < n { (m + 1) as f64 } else { 0.0 };
        let diagonals = (0..n)
            .map(|d| {
                let len = n - d;
                let mut g = DMatrix::<f64>::zeros(len, len);
                for j in 0..len {
                    g[(j, j)] = -0.5 * k_down * (2 * j + d) as f64 - 0.5 * k_up * (top(j + d) + top(j));
                    if j + 1 < len {
                        g[(j, j + 1)] = k_down * (((j + d + 1) * (j + 1)) as f64).sqrt();
                    }
                    if j > 0 {
                        g[(j, j - 1)] = k_up * (((j + d) * j) as f64).sqrt();
                    }
                }
                (g * tau).exp()
            })
            .collect();
        Ok(Self { omega, tau, diagonals })
    }

    pub(crate) fn run(&self, rho0: &Density, cfg: &FockConfig) -> Result<Density> {
        if !same_frequency(rho0.omega, self.omega) || rho0.dim() != self.diagonals.len() {
            return Err(OttoError::InvalidParameter(format!(
                "state (omega = {}, n = {}) does not match the isochore (omega = {}, n = {})",
                rho0.omega,
                rho0.dim(),
                self.omega,
                self.diagonals.len()
            )));
        }
        let n = rho0.dim();
        let mut rho = DMatrix::<Complex64>::zeros(n, n);
        for (d, prop) in self.diagonals.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -self.omega * d as f64 * self.tau);
            for j in 0..n - d {
                let mut z = Complex64::new(0.0, 0.0);
                for i in 0..n - d {
                    z += rho0.rho[(i + d, i)] * prop[(j, i)];
                }
                z *= phase;
                rho[(j + d, j)] = z;
                rho[(j, j + d)] = z.conj();
            }
        }
        let out = Density { rho, omega: self.omega };
        out.check_leak(cfg)?;
        Ok(out)
    }
}

/// Real orthogonal block relating the Fock bases of two frequencies; the
/// density matrix transforms as `S^T rho S`.
#[derive(Debug, Clone)]
pub(crate) struct FrequencyChange {
    block: DMatrix<f64>,
    omega_to: f64,
}

impl FrequencyChange {
    pub(crate) fn new(n: usize, omega_from: f64, omega_to: f64) -> Self {
        // exp(r/2 (a^2 - a+^2)) with r = ln(omega_to/omega_from)/2, computed in
        // an enlarged basis so the retained block is free of edge effects
        let big = 2 * n + 40;
        let r = 0.5 * (omega_to / omega_from).ln();
        let mut g = DMatrix::<f64>::zeros(big, big);
        for m in 0..big - 2 {
            let s = (((m + 1) * (m + 2)) as f64).sqrt();
            g[(m, m + 2)] = 0.5 * r * s;
            g[(m + 2, m)] = -0.5 * r * s;
        }
        let full = g.exp();
        Self {
            block: full.view((0, 0), (n, n)).into_owned(),
            omega_to,
        }
    }

    pub(crate) fn apply(&self, rho: &Density) -> Density {
        let s = self.block.map(|x| Complex64::new(x, 0.0));
        Density {
            rho: s.transpose() * &rho.rho * s,
            omega: self.omega_to,
        }
    }
}

/// Re-expresses `rho` in the Fock basis of `omega_to`: an instantaneous
/// frequency jump.
pub fn change_frequency(rho: &Density, omega_to: f64, cfg: &FockConfig) -> Result<Density> {
    let out = FrequencyChange::new(rho.dim(), rho.omega, omega_to).apply(rho);
    out.check_leak(cfg)?;
    Ok(out)
}

/// Unitary evolution through a frequency ramp, integrated in the Fock basis of
/// the start frequency where `H(t) = c0 (2n + 1) + c2 (a^2 + a+^2)`, then
/// re-expressed at the end frequency.
pub fn evolve_adiabat(rho0: &Density, sched: &AdiabatSchedule, cfg: &FockConfig) -> Result<Density> {
    let mid = unitary_in_start_basis(rho0, sched, cfg)?;
    change_frequency(&mid, sched.omega_end, cfg)
}

fn unitary_in_start_basis(rho0: &Density, sched: &AdiabatSchedule, cfg: &FockConfig) -> Result<Density> {
    if !same_frequency(rho0.omega, sched.omega_start) {
        return Err(OttoError::InvalidParameter(format!(
            "state basis omega = {} differs from the schedule start {}",
            rho0.omega, sched.omega_start
        )));
    }
    let n = rho0.dim();
    let w0 = sched.omega_start;
    let alpha = sched.alpha();
    let s: Vec<f64> = (0..n).map(|m| (((m + 1) * (m + 2)) as f64).sqrt()).collect();
    let mut sys = (2 * n * n, move |t: f64, y: &[f64], dy: &mut [f64]| {
        let w = w0 * (alpha * t).exp();
        let c0 = (w0 * w0 + w * w) / (4.0 * w0);
        let c2 = (w * w - w0 * w0) / (4.0 * w0);
        let at = |m: usize, k: usize| Complex64::new(y[2 * (m * n + k)], y[2 * (m * n + k) + 1]);
        for m in 0..n {
            for k in 0..n {
                // [H, rho]_{mk}
                let mut c = at(m, k) * (c0 * 2.0 * (m as f64 - k as f64));
                let mut band = Complex64::new(0.0, 0.0);
                if m + 2 < n {
                    band += at(m + 2, k) * s[m];
                }
                if m >= 2 {
                    band += at(m - 2, k) * s[m - 2];
                }
                if k >= 2 {
                    band -= at(m, k - 2) * s[k - 2];
                }
                if k + 2 < n {
                    band -= at(m, k + 2) * s[k];
                }
                c += band * c2;
                // d rho / dt = -i [H, rho]
                let i = 2 * (m * n + k);
                dy[i] = c.im;
                dy[i + 1] = -c.re;
            }
        }
    });
    let mut y = flatten(&rho0.rho);
    DormandPrince::new(2 * n * n, cfg.tol).integrate(&mut sys, 0.0, sched.duration, &mut y, |_, _| {})?;
    Ok(Density {
        rho: unflatten(&y, n),
        omega: w0,
    })
}

/// Corner expectations of the limit cycle found by repeated cycling in Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCycle {
    pub corners: [StateVector; 4],
    /// Eigenvalue entropies at the corners.
    pub entropies: [f64; 4],
    pub n_max: usize,
    pub cycles: usize,
    pub min_eigenvalue: f64,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
}

/// Cycles a density matrix (starting from hot equilibrium at corner A) until
/// the corner expectations change by less than `1e-8` relative. The basis is
/// doubled on truncation leaks up to `cfg.n_cap`.
pub fn oracle_limit_cycle(
    engine: &EngineSpec,
    alloc: &TimeAllocation,
    cfg: &FockConfig,
    max_cycles: usize,
) -> Result<OracleCycle> {
    let mut n = cfg.n_max;
    loop {
        let attempt = FockConfig { n_max: n, ..*cfg };
        match cycle_at(engine, alloc, &attempt, max_cycles) {
            Err(OttoError::TruncationLeak { .. }) if n < cfg.n_cap => n = (2 * n).min(cfg.n_cap),
            other => return other,
        }
    }
}

/// Default oracle settings for an engine: basis sized from the larger bath
/// occupation and the compression ratio.
pub fn oracle_config(engine: &EngineSpec) -> Result<FockConfig> {
    let n_h = equilibrium_energy(engine.omega_h, engine.hot.temperature)? / engine.omega_h - 0.5;
    let n_c = equilibrium_energy(engine.omega_c, engine.cold.temperature)? / engine.omega_c - 0.5;
    Ok(FockConfig::adaptive(n_h.max(n_c), engine.compression_ratio()))
}

struct AdiabatStep {
    sched: Option<AdiabatSchedule>,
    change: FrequencyChange,
}

impl AdiabatStep {
    fn new(n: usize, from: f64, to: f64, tau: f64) -> Result<Self> {
        Ok(Self {
            sched: if tau > 0.0 { Some(AdiabatSchedule::new(from, to, tau)?) } else { None },
            change: FrequencyChange::new(n, from, to),
        })
    }

    fn run(&self, rho: &Density, cfg: &FockConfig) -> Result<Density> {
        let mid = match &self.sched {
            Some(s) => unitary_in_start_basis(rho, s, cfg)?,
            None => rho.clone(),
        };
        let out = self.change.apply(&mid);
        out.check_leak(cfg)?;
        Ok(out)
    }
}

fn cycle_at(engine: &EngineSpec, alloc: &TimeAllocation, cfg: &FockConfig, max_cycles: usize) -> Result<OracleCycle> {
    let n = cfg.n_max;
    let hc = AdiabatStep::new(n, engine.omega_h, engine.omega_c, alloc.tau_hc)?;
    let ch = AdiabatStep::new(n, engine.omega_c, engine.omega_h, alloc.tau_ch)?;
    let hot = IsochoreStep::new(n, engine.omega_h, &engine.hot, alloc.tau_h)?;
    let cold = IsochoreStep::new(n, engine.omega_c, &engine.cold, alloc.tau_c)?;
    let mut rho = thermal_density(n, engine.omega_h, engine.hot.temperature)?;
    let mut prev: Option<[StateVector; 4]> = None;
    for cycle in 1..=max_cycles {
        let a = rho.clone();
        let b = hot.run(&a, cfg)?;
        let c = hc.run(&b, cfg)?;
        let d = cold.run(&c, cfg)?;
        rho = ch.run(&d, cfg)?;
        let states = [&a, &b, &c, &d];
        let corners = states.map(|r| r.expectations());
        if let Some(p) = prev {
            let change = (0..4)
                .map(|i| corners[i].distance(&p[i]) / corners[i].energy_norm())
                .fold(0.0, f64::max);
            if change < 1e-8 {
                let eigs: Vec<Vec<f64>> = states.iter().map(|r| r.eigenvalues()).collect();
                let entropies = states.map(|r| r.entropy());
                return Ok(OracleCycle {
                    corners,
                    entropies,
                    n_max: n,
                    cycles: cycle,
                    min_eigenvalue: eigs.iter().flatten().copied().fold(f64::INFINITY, f64::min),
                    max_trace_error: states.iter().map(|r| (r.trace() - 1.0).abs()).fold(0.0, f64::max),
                    max_hermiticity_error: states.iter().map(|r| r.hermiticity_error()).fold(0.0, f64::max),
                });
            }
        }
        prev = Some(corners);
    }
    Err(OttoError::NotConverged {
        iterations: max_cycles,
        residual: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock_oracle::canonical_density;
    use crate::propagators::{adiabat_map_numeric, adiabat_map_sudden, isochore_map};
    use crate::state::von_neumann_entropy;
    use crate::ode::Tolerances;

    fn rel(a: &StateVector, b: &StateVector) -> f64 {
        a.distance(b) / b.energy_norm()
    }

    #[test]
    fn thermal_state_is_fixed() {
        let cfg = FockConfig::new(80);
        let bath = BathSpec::new(2.0, 0.4);
        let rho = thermal_density(80, 1.5, 2.0).unwrap();
        let out = evolve_isochore(&rho, &bath, 3.0, &cfg).unwrap();
        assert!(out.trace_distance(&rho) < 1e-8);
    }

    #[test]
    fn isochore_matches_closed_form() {
        let cfg = FockConfig::new(90);
        let s0 = StateVector::new(2.2, 0.7, -0.5, 1.3);
        let rho = canonical_density(&s0, 90).unwrap();
        let bath = BathSpec::new(1.0, 0.3);
        let out = evolve_isochore(&rho, &bath, 2.5, &cfg).unwrap();
        let expect = isochore_map(&bath, 1.3, 2.5).unwrap().apply(&s0);
        assert!(rel(&out.expectations(), &expect) < 1e-6);
        assert!((out.trace() - 1.0).abs() < 1e-10);
        assert!(out.hermiticity_error() < 1e-12);
    }

    #[test]
    fn jump_matches_sudden_map() {
        let cfg = FockConfig::new(120);
        let s0 = StateVector::thermal(2.0, 1.0).unwrap();
        let rho = thermal_density(120, 2.0, 1.0).unwrap();
        for wf in [1.0, 3.0] {
            let out = change_frequency(&rho, wf, &cfg).unwrap();
            let expect = adiabat_map_sudden(2.0, wf).unwrap().apply(&s0);
            assert!(rel(&out.expectations(), &expect) < 1e-9, "{:?} vs {expect:?}", out.expectations());
        }
    }

    #[test]
    fn adiabat_matches_numeric_map_and_keeps_spectrum() {
        let cfg = FockConfig {
            tol: Tolerances::new(1e-11, 1e-14),
            ..FockConfig::new(80)
        };
        let s0 = StateVector::new(1.6, 0.2, 0.3, 1.0);
        let rho = canonical_density(&s0, 80).unwrap();
        let sched = AdiabatSchedule::new(1.0, 2.0, 1.3).unwrap();
        let out = evolve_adiabat(&rho, &sched, &cfg).unwrap();
        let expect = adiabat_map_numeric(&sched, Tolerances::new(1e-12, 1e-14)).unwrap().apply(&s0);
        assert!(rel(&out.expectations(), &expect) < 1e-6);
        assert!((out.entropy() - rho.entropy()).abs() < 1e-8);
        assert!((out.entropy() - von_neumann_entropy(&expect).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn free_evolution_keeps_eigenvalues() {
        let cfg = FockConfig::new(60);
        let rho = canonical_density(&StateVector::new(1.5, 0.3, 0.2, 1.0), 60).unwrap();
        let sched = AdiabatSchedule::new(1.0, 1.0, 2.0).unwrap();
        let out = evolve_adiabat(&rho, &sched, &cfg).unwrap();
        let (mut e0, mut e1) = (rho.eigenvalues(), out.eigenvalues());
        e0.sort_by(f64::total_cmp);
        e1.sort_by(f64::total_cmp);
        for (x, y) in e0.iter().zip(&e1) {
            assert!((x - y).abs() < 1e-9);
        }
        // pure rotation by 2 omega t
        let s = out.expectations();
        let expect = isochore_map(&BathSpec::new(1.0, 0.0), 1.0, 2.0).unwrap().apply(&rho.expectations());
        assert!(rel(&s, &expect) < 1e-8);
    }

    #[test]
    fn leak_is_reported() {
        let cfg = FockConfig::new(12);
        let rho = thermal_density(12, 1.0, 5.0).unwrap();
        assert!(matches!(
            evolve_isochore(&rho, &BathSpec::new(5.0, 0.1), 1.0, &cfg),
            Err(OttoError::TruncationLeak { .. })
        ));
    }

    #[test]
    fn energy_relaxes_at_the_conductance() {
        let cfg = FockConfig::new(100);
        let bath = BathSpec::new(2.0, 0.25);
        let rho0 = thermal_density(100, 1.0, 0.5).unwrap();
        let h_eq = equilibrium_energy(1.0, 2.0).unwrap();
        let dev = |t: f64| evolve_isochore(&rho0, &bath, t, &cfg).unwrap().expectations().energy - h_eq;
        let (d1, d2) = (dev(1.0), dev(5.0));
        let rate = (d1 / d2).ln() / 4.0;
        assert!((rate / 0.25 - 1.0).abs() < 1e-3, "rate {rate}");
    }

    #[test]
    fn a_squared_rotates_at_twice_omega() {
        let cfg = FockConfig::new(90);
        let (w, g) = (1.7, 0.2);
        let bath = BathSpec::new(1.0, g);
        let rho0 = canonical_density(&StateVector::new(2.0, 0.6, -0.4, w), 90).unwrap();
        let a0 = rho0.expectations().a_squared();
        for t in [0.3, 1.1, 2.6] {
            let at = evolve_isochore(&rho0, &bath, t, &cfg).unwrap().expectations().a_squared();
            let expect = a0 * Complex64::new(-g * t, -2.0 * w * t).exp();
            assert!((at - expect).norm() < 1e-7 * a0.norm(), "t={t}");
        }
    }

    #[test]
    fn fast_ramp_approaches_the_jump() {
        let cfg = FockConfig::new(100);
        let s0 = StateVector::thermal(1.0, 1.5).unwrap();
        let rho = thermal_density(100, 1.0, 1.5).unwrap();
        let jump = adiabat_map_sudden(1.0, 2.0).unwrap().apply(&s0);
        let deviation = |rate: f64| {
            let sched = AdiabatSchedule::new(1.0, 2.0, 2f64.ln() / rate).unwrap();
            let out = evolve_adiabat(&rho, &sched, &cfg).unwrap().expectations();
            let numeric = adiabat_map_numeric(&sched, Tolerances::new(1e-12, 1e-14)).unwrap().apply(&s0);
            assert!(rel(&out, &numeric) < 1e-6);
            let norm = jump.energy_norm();
            (
                ((out.energy - jump.energy).powi(2) + (out.lagrangian - jump.lagrangian).powi(2)).sqrt() / norm,
                rel(&out, &jump),
            )
        };
        // |alpha| / omega = 100: H and L are second order in the ramp time,
        // D picks up 4 <L> tau at first order
        let (hl, full) = deviation(100.0);
        assert!(hl < 1e-3);
        assert!(full < 1e-2);
        let (_, full) = deviation(1000.0);
        assert!(full < 1e-3);
    }

    #[test]
    fn canonical_form_is_preserved() {
        let cfg = FockConfig::new(90);
        let s0 = StateVector::new(2.4, 0.5, 0.7, 1.2);
        let rho = canonical_density(&s0, 90).unwrap();
        let after_ramp = evolve_adiabat(&rho, &AdiabatSchedule::new(1.2, 0.8, 0.9).unwrap(), &cfg).unwrap();
        let after_bath = evolve_isochore(&rho, &BathSpec::new(1.5, 0.4), 1.7, &cfg).unwrap();
        for out in [after_ramp, after_bath] {
            let rebuilt = canonical_density(&out.expectations(), 90).unwrap();
            assert!(out.trace_distance(&rebuilt) < 1e-6);
        }
    }

    #[test]
    fn long_isochores_reach_equilibrium_corners() {
        let engine = EngineSpec::new(2.0, 1.0, BathSpec::new(3.0, 1.0), BathSpec::new(1.0, 1.0)).unwrap();
        let alloc = TimeAllocation::new(25.0, 0.5, 25.0, 0.5).unwrap();
        let oc = oracle_limit_cycle(&engine, &alloc, &FockConfig::new(60), 50).unwrap();
        let b = StateVector::thermal(2.0, 3.0).unwrap();
        let d = StateVector::thermal(1.0, 1.0).unwrap();
        assert!(rel(&oc.corners[1], &b) < 1e-9);
        assert!(rel(&oc.corners[3], &d) < 1e-9);
        for (s, e) in oc.corners.iter().zip(oc.entropies) {
            assert!((von_neumann_entropy(s).unwrap() - e).abs() < 1e-6);
        }
        assert!(oc.min_eigenvalue > -1e-10);
    }
}
