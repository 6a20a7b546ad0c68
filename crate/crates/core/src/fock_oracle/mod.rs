//! Brute-force reference: density matrices in a truncated Fock basis.
//!
//! Everything here is deliberately direct (dense matrices, explicit ladder
//! operators, generic ODE stepping) so it can serve as ground truth for the
//! three-observable propagators.

mod evolve;

pub use evolve::{
    change_frequency, evolve_adiabat, evolve_isochore, oracle_config, oracle_limit_cycle, OracleCycle,
};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{OttoError, Result};
use crate::ode::Tolerances;
use crate::state::{chi_from_expectations, StateVector};

/// Truncation and accuracy settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    /// Basis size (levels 0..n_max-1).
    pub n_max: usize,
    /// Largest tolerated population of the top two levels.
    pub leak_tol: f64,
    pub tol: Tolerances,
    /// Adaptive growth stops here.
    pub n_cap: usize,
}

impl FockConfig {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            leak_tol: 1e-10,
            tol: Tolerances::new(1e-10, 1e-13),
            n_cap: 512,
        }
    }

    /// Initial basis size for occupations up to `n_mean` under compression `c`.
    pub fn adaptive(n_mean: f64, c: f64) -> Self {
        Self::new(((n_mean * c * c).ceil() as usize + 20).max(2))
    }
}

/// Ladder and observable matrices at frequency `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperators {
    pub a: DMatrix<Complex64>,
    pub adag: DMatrix<Complex64>,
    pub h: DMatrix<Complex64>,
    pub l: DMatrix<Complex64>,
    pub d: DMatrix<Complex64>,
}

/// `H = (omega/2)(a a+ + a+ a)`, `L = -(omega/2)(a^2 + a+^2)`, `D = -i(a^2 - a+^2)`.
///
/// The truncated `a a+` misses its top entry, so H is built from the exact
/// diagonal `omega (n + 1/2)` instead.
pub fn build_operators(n_max: usize, omega: f64) -> Result<FockOperators> {
    if n_max < 2 {
        return Err(OttoError::InvalidParameter(format!("Fock basis needs n_max >= 2, got {n_max}")));
    }
    let a = DMatrix::from_fn(n_max, n_max, |m, n| {
        if n == m + 1 {
            Complex64::new((n as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let adag = a.adjoint();
    let h = DMatrix::from_fn(n_max, n_max, |m, n| {
        if m == n {
            Complex64::new(omega * (m as f64 + 0.5), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let a2 = &a * &a;
    let ad2 = &adag * &adag;
    let l = (&a2 + &ad2) * Complex64::new(-0.5 * omega, 0.0);
    let d = (&a2 - &ad2) * Complex64::new(0.0, -1.0);
    Ok(FockOperators { a, adag, h, l, d })
}

/// A density matrix together with the frequency defining its Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub rho: DMatrix<Complex64>,
    pub omega: f64,
}

impl Density {
    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// `(<H>, <L>, <D>)` read off the matrix elements.
    pub fn expectations(&self) -> StateVector {
        let n = self.dim();
        let w = self.omega;
        let mut energy = 0.0;
        // <a^2> = sum_m rho_{m+2,m} sqrt((m+1)(m+2))
        let mut a2 = Complex64::new(0.0, 0.0);
        for m in 0..n {
            energy += w * (m as f64 + 0.5) * self.rho[(m, m)].re;
            if m + 2 < n {
                a2 += self.rho[(m + 2, m)] * (((m + 1) * (m + 2)) as f64).sqrt();
            }
        }
        StateVector::new(energy, -w * a2.re, 2.0 * a2.im, w)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian(&self.rho).eigenvalues.iter().copied().collect()
    }

    /// `-tr rho ln rho` from the eigenvalues.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }

    /// Population of the two highest levels.
    pub fn top_population(&self) -> f64 {
        let n = self.dim();
        self.rho[(n - 1, n - 1)].re + self.rho[(n - 2, n - 2)].re
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `1/2 sum |eig(rho - sigma)|`.
    pub fn trace_distance(&self, other: &Density) -> f64 {
        let diff = &self.rho - &other.rho;
        0.5 * hermitian(&diff).eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
    }

    pub(crate) fn check_leak(&self, cfg: &FockConfig) -> Result<()> {
        let pop = self.top_population();
        if pop > cfg.leak_tol {
            return Err(OttoError::TruncationLeak {
                population: pop,
                tolerance: cfg.leak_tol,
                n_max: self.dim(),
            });
        }
        Ok(())
    }
}

fn hermitian(m: &DMatrix<Complex64>) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    // symmetrize against round-off before the Hermitian solver
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(sym)
}

/// Gibbs state `exp(-H/T)/Z` in an `n_max`-level basis.
pub fn thermal_density(n_max: usize, omega: f64, temperature: f64) -> Result<Density> {
    if n_max < 2 || !(omega > 0.0) || !(temperature >= 0.0) {
        return Err(OttoError::InvalidParameter(format!(
            "thermal density needs n_max >= 2, omega > 0, T >= 0; got {n_max}, {omega}, {temperature}"
        )));
    }
    let q = if temperature == 0.0 { 0.0 } else { (-omega / temperature).exp() };
    let mut p: Vec<f64> = (0..n_max).map(|m| q.powi(m as i32)).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    Ok(Density {
        rho: DMatrix::from_fn(n_max, n_max, |m, n| {
            if m == n {
                Complex64::new(p[m], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        omega,
    })
}

/// Generalized canonical state `exp(chi1 a^2 + chi2 H + chi1* a+^2)/Z` with the
/// given expectations, built in an enlarged basis and truncated to `n_max`.
pub fn canonical_density(s: &StateVector, n_max: usize) -> Result<Density> {
    let chi = chi_from_expectations(s)?;
    let big = 2 * n_max + 40;
    let ops = build_operators(big, s.omega)?;
    let a2 = &ops.a * &ops.a;
    let k = &ops.h * Complex64::new(chi.chi2, 0.0) + &a2 * chi.chi1 + a2.adjoint() * chi.chi1.conj();
    let eig = hermitian(&k);
    let top = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|&x| (x - top).exp()).collect();
    let v = &eig.eigenvectors;
    let mut rho = DMatrix::from_element(n_max, n_max, Complex64::new(0.0, 0.0));
    for (j, w) in weights.iter().enumerate() {
        if *w < 1e-300 {
            continue;
        }
        for m in 0..n_max {
            let vm = v[(m, j)] * *w;
            for n in 0..n_max {
                rho[(m, n)] += vm * v[(n, j)].conj();
            }
        }
    }
    let tr = rho.trace().re;
    rho /= Complex64::new(tr, 0.0);
    Ok(Density { rho, omega: s.omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{equilibrium_energy, von_neumann_entropy};
    use approx::assert_relative_eq;

    #[test]
    fn operator_identities() {
        let ops = build_operators(12, 1.7).unwrap();
        assert_relative_eq!(ops.h[(0, 0)].re, 0.85);
        let comm = &ops.a * &ops.adag - &ops.adag * &ops.a;
        for m in 0..11 {
            for n in 0..11 {
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((comm[(m, n)] - Complex64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
        assert!(build_operators(1, 1.0).is_err());
    }

    #[test]
    fn thermal_expectations() {
        let (w, t) = (1.0, 3.0);
        let n = 120;
        let rho = thermal_density(n, w, t).unwrap();
        let s = rho.expectations();
        assert_relative_eq!(s.energy, equilibrium_energy(w, t).unwrap(), epsilon = 1e-8);
        assert_eq!(s.lagrangian, 0.0);
        assert_relative_eq!(rho.entropy(), von_neumann_entropy(&s).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn canonical_state_round_trip() {
        for s in [
            StateVector::new(2.0, 0.6, -0.8, 1.0),
            StateVector::new(3.0, 1.2, -0.9, 1.5),
            StateVector::new(1.2, -0.3, 0.1, 2.0),
        ] {
            let rho = canonical_density(&s, 90).unwrap();
            let back = rho.expectations();
            assert!(back.distance(&s) < 1e-8 * s.energy, "{s:?} -> {back:?}");
            assert_relative_eq!(rho.entropy(), von_neumann_entropy(&s).unwrap(), epsilon = 1e-8);
            assert!(rho.eigenvalues().iter().all(|&p| p > -1e-12));
        }
    }
}
