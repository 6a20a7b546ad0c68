//! Thermodynamic observables of the harmonic working medium and the Gaussian
//! states they determine.
//!
//! Natural units are used throughout: hbar = k_B = m = 1. A centered Gaussian
//! state of the oscillator is fixed by the three expectations
//! (<H>, <L>, <D>) at a given frequency, so every thermodynamic quantity in
//! this module is a function of a [`StateVector`].

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OttoError, Result};

/// Below this gap `X - omega/2` (relative to omega) a state is treated as pure.
pub const PURE_STATE_GAP: f64 = 1e-12;

/// Expectations of the Hamiltonian, the Lagrangian and the position-momentum
/// correlation, together with the frequency they refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub energy: f64,
    pub lagrangian: f64,
    pub correlation: f64,
    pub omega: f64,
}

impl StateVector {
    pub fn new(energy: f64, lagrangian: f64, correlation: f64, omega: f64) -> Self {
        Self {
            energy,
            lagrangian,
            correlation,
            omega,
        }
    }

    /// Gibbs state at temperature `temperature`.
    pub fn thermal(omega: f64, temperature: f64) -> Result<Self> {
        Ok(Self::new(equilibrium_energy(omega, temperature)?, 0.0, 0.0, omega))
    }

    /// Oscillator ground state.
    pub fn ground(omega: f64) -> Self {
        Self::new(0.5 * omega, 0.0, 0.0, omega)
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.energy, self.lagrangian, self.correlation)
    }

    pub fn from_vector(v: &Vector3<f64>, omega: f64) -> Self {
        Self::new(v[0], v[1], v[2], omega)
    }

    /// `X^2 = H^2 - L^2 - omega^2 D^2 / 4`, without any physicality check.
    pub fn casimir_sq(&self) -> f64 {
        let w = self.omega;
        self.energy * self.energy
            - self.lagrangian * self.lagrangian
            - 0.25 * w * w * self.correlation * self.correlation
    }

    /// Number expectation `H/omega - 1/2`.
    pub fn number(&self) -> f64 {
        self.energy / self.omega - 0.5
    }

    /// `<a^2> = -L/omega + i D/2`.
    pub fn a_squared(&self) -> Complex64 {
        Complex64::new(-self.lagrangian / self.omega, 0.5 * self.correlation)
    }

    /// Euclidean norm on (H, L, omega D / 2), all in energy units.
    pub fn energy_norm(&self) -> f64 {
        let d = 0.5 * self.omega * self.correlation;
        (self.energy * self.energy + self.lagrangian * self.lagrangian + d * d).sqrt()
    }

    /// Distance in the same energy-unit norm. Both states must share omega.
    pub fn distance(&self, other: &StateVector) -> f64 {
        let dh = self.energy - other.energy;
        let dl = self.lagrangian - other.lagrangian;
        let dd = 0.5 * self.omega * (self.correlation - other.correlation);
        (dh * dh + dl * dl + dd * dd).sqrt()
    }
}

/// Heat bath seen by the working medium on an isochore.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub temperature: f64,
    /// Heat conductance `Gamma = k_down - k_up`.
    pub conductance: f64,
}

impl BathSpec {
    pub fn new(temperature: f64, conductance: f64) -> Self {
        Self {
            temperature,
            conductance,
        }
    }

    /// Lindblad rates `(k_down, k_up)` obeying detailed balance at frequency `omega`.
    pub fn rates(&self, omega: f64) -> (f64, f64) {
        let g = self.conductance;
        if self.temperature <= 0.0 {
            return (g, 0.0);
        }
        let boltz = (-omega / self.temperature).exp();
        let denom = -(-omega / self.temperature).exp_m1();
        (g / denom, g * boltz / denom)
    }
}

/// Parameters of the product form `exp(g a^2) exp(-beta H) exp(g* a+^2) / Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub beta: f64,
    pub gamma: Complex64,
}

/// Parameters of the exponential-sum form `exp(chi1 a^2 + chi2 H + chi1* a+^2) / Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSumParams {
    pub chi1: Complex64,
    pub chi2: f64,
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Thermal energy `(omega/2) coth(omega / 2T)`; the ground-state energy at `T = 0`.
pub fn equilibrium_energy(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(OttoError::InvalidParameter(format!(
            "frequency must be positive, got {omega}"
        )));
    }
    if temperature < 0.0 || temperature.is_nan() {
        return Err(OttoError::InvalidParameter(format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.5 * omega);
    }
    Ok(0.5 * omega * coth(0.5 * omega / temperature))
}

/// `X = sqrt(H^2 - L^2 - omega^2 D^2/4)`, which must satisfy `X >= omega/2`.
pub fn casimir(s: &StateVector) -> Result<f64> {
    let x2 = s.casimir_sq();
    let half = 0.5 * s.omega;
    // Rounding on a pure state can leave X a hair below omega/2.
    let slack = 1e-12 * s.energy * s.energy;
    if !x2.is_finite() || x2 < half * half - slack || s.energy <= 0.0 || s.omega <= 0.0 {
        return Err(OttoError::UnphysicalState {
            casimir_sq: x2,
            half_omega: half,
        });
    }
    Ok(x2.max(half * half).sqrt())
}

/// Symplectic eigenvalue `nu = X / omega` of the covariance matrix.
pub fn symplectic_eigenvalue(s: &StateVector) -> Result<f64> {
    Ok(casimir(s)? / s.omega)
}

/// Entropy of a centered Gaussian state from its symplectic eigenvalue.
pub fn symplectic_entropy(s: &StateVector) -> Result<f64> {
    let nu = symplectic_eigenvalue(s)?;
    Ok(entropy_of_occupation(nu - 0.5))
}

/// `(n+1) ln(n+1) - n ln n`, continuous at `n = 0`.
pub(crate) fn entropy_of_occupation(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    (n + 1.0) * (n + 1.0).ln() - n * n.ln()
}

/// Product-form chart in terms of `z = e^{beta omega}`. `z` may be negative for
/// strongly squeezed states, which have no real `beta`; the closed forms below
/// remain valid there as an analytic continuation.
#[derive(Debug, Clone, Copy)]
struct ProductChart {
    z: f64,
    gamma: Complex64,
}

fn product_chart(s: &StateVector) -> Result<ProductChart> {
    let x = casimir(s)?;
    let w = s.omega;
    let gap = x - 0.5 * w;
    if gap < PURE_STATE_GAP * w {
        return Err(OttoError::PureState { gap });
    }
    let (h, l, d) = (s.energy, s.lagrangian, s.correlation);
    // 4L^2 + w^2 D^2 - (w - 2H)^2 written through X to avoid cancellation.
    let x2 = x * x;
    let denom = 4.0 * h * w - w * w - 4.0 * x2;
    let numer = -(4.0 * x2 - w * w);
    let z = numer / denom;
    let gamma = Complex64::new(2.0 * l, w * d) * (w / denom);
    Ok(ProductChart { z, gamma })
}

/// Inverts the expectation formulas to the product-form parameters.
///
/// States squeezed beyond the reach of a real `beta` (where `e^{beta omega}`
/// would be negative) are rejected with a domain error.
pub fn params_from_expectations(s: &StateVector) -> Result<GaussianParams> {
    let chart = product_chart(s)?;
    if !(chart.z > 1.0) {
        return Err(OttoError::Domain(format!(
            "state outside the real product-form chart (e^(beta omega) = {:.6e})",
            chart.z
        )));
    }
    Ok(GaussianParams {
        beta: chart.z.ln() / s.omega,
        gamma: chart.gamma,
    })
}

/// Expectations `(H, L, D)` of the product-form state.
pub fn expectations_from_params(p: &GaussianParams, omega: f64) -> Result<StateVector> {
    if !(omega > 0.0) || !(p.beta > 0.0) {
        return Err(OttoError::InvalidParameter(format!(
            "need omega > 0 and beta > 0, got omega = {omega}, beta = {}",
            p.beta
        )));
    }
    if p.beta.is_infinite() {
        if p.gamma.norm() != 0.0 {
            return Err(OttoError::Domain("infinite beta with nonzero gamma".into()));
        }
        return Ok(StateVector::ground(omega));
    }
    let em1 = (p.beta * omega).exp_m1();
    let gg = p.gamma.norm_sqr();
    let norm = em1 * em1 - 4.0 * gg;
    if !(norm > 0.0) {
        return Err(OttoError::Domain(format!(
            "product form not normalizable: 4|gamma|^2 = {:.6e} >= (e^(beta omega) - 1)^2 = {:.6e}",
            4.0 * gg,
            em1 * em1
        )));
    }
    // e^{2 b w} - 1 = em1 (em1 + 2)
    let energy = omega * (em1 * (em1 + 2.0) - 4.0 * gg) / (2.0 * norm);
    let a2 = 2.0 * p.gamma.conj() / norm;
    Ok(StateVector::new(energy, -omega * a2.re, 2.0 * a2.im, omega))
}

/// `asinh(s / 2z) / s`, even in `s` and regular at `s = 0`.
fn asinh_ratio(s: f64, z: f64) -> f64 {
    let u = s / (2.0 * z);
    if u.abs() < 1e-8 {
        1.0 / (2.0 * z)
    } else {
        u.asinh() / s
    }
}

fn chi_from_chart(chart: &ProductChart, omega: f64) -> Result<ExpSumParams> {
    let z = chart.z;
    let gg = chart.gamma.norm_sqr();
    let t = z * z - 1.0 - 4.0 * gg;
    let s2 = t * t - 16.0 * gg;
    if !(s2 >= 0.0) {
        return Err(OttoError::Domain(format!(
            "negative radicand {s2:.6e} in the exponential-sum relation"
        )));
    }
    // chi1 = 2 asinh(gamma e^{-bw} q / 2) / q with q = s / gamma; the ratio is
    // even in q so the square-root branch drops out.
    let f = asinh_ratio(s2.sqrt(), z);
    Ok(ExpSumParams {
        chi1: chart.gamma * (2.0 * f),
        chi2: f * (-t) / omega,
    })
}

/// Exponential-sum coefficients of the mixed Gaussian state with these
/// expectations. Defined also beyond the real product-form chart.
pub fn chi_from_expectations(s: &StateVector) -> Result<ExpSumParams> {
    chi_from_chart(&product_chart(s)?, s.omega)
}

/// Coefficients of the exponential-sum form equivalent to a product form.
pub fn chi_from_product_params(p: &GaussianParams, omega: f64) -> Result<ExpSumParams> {
    if !(omega > 0.0) || !(p.beta > 0.0) {
        return Err(OttoError::InvalidParameter(format!(
            "need omega > 0 and beta > 0, got omega = {omega}, beta = {}",
            p.beta
        )));
    }
    let em1 = (p.beta * omega).exp_m1();
    if !(em1 * em1 > 4.0 * p.gamma.norm_sqr()) {
        return Err(OttoError::Domain("product form not normalizable".into()));
    }
    let chart = ProductChart {
        z: em1 + 1.0,
        gamma: p.gamma,
    };
    chi_from_chart(&chart, omega)
}

/// Linear functional `l` and `ln Z` with `-ln rho = l . (H, L, D) + ln Z`.
fn log_density_functional(s: &StateVector) -> Result<(Vector3<f64>, f64)> {
    let chart = product_chart(s)?;
    let w = s.omega;
    let chi = chi_from_chart(&chart, w)?;
    let z = chart.z;
    let gg = chart.gamma.norm_sqr();
    let zm1 = z - 1.0;
    // ln Z = ln( csch(bw/2) / (2 sqrt(1 - 4gg/(z-1)^2)) ), written with |.| so
    // that the continuation to z < 0 stays real.
    let ln_z = 0.5 * z.abs().ln() - zm1.abs().ln() - 0.5 * (1.0 - 4.0 * gg / (zm1 * zm1)).abs().ln();
    Ok((Vector3::new(-chi.chi2, chi.chi1.re * 2.0 / w, chi.chi1.im), ln_z))
}

/// Von Neumann entropy from the exponential-sum parameters,
/// `S = -chi2 H + Im(chi1) D + Re(chi1) (2/omega) L + ln Z`.
///
/// Pure states return 0 directly.
pub fn von_neumann_entropy(s: &StateVector) -> Result<f64> {
    match log_density_functional(s) {
        Ok((l, ln_z)) => Ok(l.dot(&s.to_vector()) + ln_z),
        Err(OttoError::PureState { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Quantum relative entropy `S(rho || sigma) = tr rho (ln rho - ln sigma)`
/// between two centered Gaussian states at the same frequency.
///
/// `-tr rho ln sigma` is linear in the expectations of `rho`, so this needs
/// no density matrices. `sigma` must be mixed.
pub fn relative_entropy(rho: &StateVector, sigma: &StateVector) -> Result<f64> {
    if (rho.omega - sigma.omega).abs() > 1e-12 * sigma.omega {
        return Err(OttoError::InvalidParameter(format!(
            "relative entropy needs a common frequency, got {} and {}",
            rho.omega, sigma.omega
        )));
    }
    let (l, ln_z) = log_density_functional(sigma)?;
    Ok(l.dot(&rho.to_vector()) + ln_z - von_neumann_entropy(rho)?)
}

/// Entropy of an energy measurement; equals the thermal entropy at the same `<H>`.
pub fn energy_entropy(s: &StateVector) -> Result<f64> {
    let w = s.omega;
    let h = s.energy;
    if !(w > 0.0) {
        return Err(OttoError::InvalidParameter("frequency must be positive".into()));
    }
    if h == 0.5 * w {
        return Ok(0.0);
    }
    if !(2.0 * h > w) {
        return Err(OttoError::Domain(format!(
            "energy entropy needs 2H > omega, got H = {h}, omega = {w}"
        )));
    }
    Ok(entropy_of_occupation(h / w - 0.5))
}

/// Temperature of the Gibbs state with the same energy at the same frequency.
pub fn internal_temperature(s: &StateVector) -> Result<f64> {
    let w = s.omega;
    let y = 2.0 * s.energy / w;
    if !(w > 0.0) || !(y >= 1.0) {
        return Err(OttoError::Domain(format!(
            "internal temperature needs H >= omega/2, got H = {}, omega = {w}",
            s.energy
        )));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    // arccoth(y) = atanh(1/y)
    Ok(w / (2.0 * (1.0 / y).atanh()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equilibrium_energy_values() {
        assert_relative_eq!(equilibrium_energy(2.0, 5.0).unwrap(), 5.066490, epsilon = 1e-6);
        assert_relative_eq!(equilibrium_energy(1.0, 1.0).unwrap(), 1.081977, epsilon = 1e-6);
        assert_eq!(equilibrium_energy(1.0, 0.0).unwrap(), 0.5);
        assert!(equilibrium_energy(1.0, 1e-4).unwrap() - 0.5 < 1e-12);
        assert!(equilibrium_energy(0.0, 1.0).is_err());
        assert!(equilibrium_energy(-1.0, 1.0).is_err());
    }

    #[test]
    fn equilibrium_energy_high_temperature() {
        for t in [50.0, 100.0, 1000.0] {
            let e = equilibrium_energy(1.0, t).unwrap();
            assert!((e - t).abs() / t < 0.01);
        }
        let mut last = 0.0;
        for i in 0..200 {
            let e = equilibrium_energy(1.0, 0.05 * (i + 1) as f64).unwrap();
            assert!(e > last);
            last = e;
        }
    }

    #[test]
    fn casimir_examples() {
        let th = StateVector::new(5.066490, 0.0, 0.0, 2.0);
        assert_relative_eq!(casimir(&th).unwrap(), 5.066490, epsilon = 1e-12);
        assert_relative_eq!(casimir(&StateVector::ground(1.0)).unwrap(), 0.5);
        assert!(matches!(
            casimir(&StateVector::new(1.0, 1.0, 0.0, 1.0)),
            Err(OttoError::UnphysicalState { .. })
        ));
    }

    #[test]
    fn thermal_params() {
        let s = StateVector::new(equilibrium_energy(1.0, 1.0).unwrap(), 0.0, 0.0, 1.0);
        let p = params_from_expectations(&s).unwrap();
        assert_relative_eq!((p.beta * 1.0).exp(), std::f64::consts::E, epsilon = 1e-9);
        assert_eq!(p.gamma, Complex64::new(0.0, 0.0));
        for &(w, t) in &[(0.3, 0.1), (1.0, 3.0), (2.0, 5.0), (0.025, 0.25)] {
            let s = StateVector::thermal(w, t).unwrap();
            let p = params_from_expectations(&s).unwrap();
            assert_relative_eq!(p.beta, 1.0 / t, max_relative = 1e-9);
        }
    }

    #[test]
    fn params_reject_pure_and_unphysical() {
        assert!(matches!(
            params_from_expectations(&StateVector::ground(1.0)),
            Err(OttoError::PureState { .. })
        ));
        assert!(params_from_expectations(&StateVector::new(1.0, 1.0, 0.0, 1.0)).is_err());
        // squeezed beyond the real-beta chart
        let s = StateVector::new(1.6, (1.6f64 * 1.6 - 1.0).sqrt(), 0.0, 1.0);
        assert!(matches!(params_from_expectations(&s), Err(OttoError::Domain(_))));
    }

    #[test]
    fn expectations_examples() {
        let p = GaussianParams {
            beta: 1.0,
            gamma: Complex64::new(0.0, 0.0),
        };
        let s = expectations_from_params(&p, 1.0).unwrap();
        assert_relative_eq!(s.energy, 1.081977, epsilon = 1e-6);
        assert_eq!(s.lagrangian, 0.0);
        let g = GaussianParams {
            beta: f64::INFINITY,
            gamma: Complex64::new(0.0, 0.0),
        };
        assert_eq!(expectations_from_params(&g, 3.0).unwrap(), StateVector::ground(3.0));
        let bad = GaussianParams {
            beta: 0.1,
            gamma: Complex64::new(1.0, 0.0),
        };
        assert!(expectations_from_params(&bad, 1.0).is_err());
    }

    #[test]
    fn chi_limits() {
        let p = GaussianParams {
            beta: 1.0,
            gamma: Complex64::new(0.0, 0.0),
        };
        let c = chi_from_product_params(&p, 1.0).unwrap();
        assert_eq!(c.chi1, Complex64::new(0.0, 0.0));
        assert_relative_eq!(c.chi2, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let (w, t1, t2) = (1.5, 2.0, 0.7);
        let r = StateVector::thermal(w, t1).unwrap();
        let s = StateVector::thermal(w, t2).unwrap();
        let ln_z2 = -(2.0 * (0.5 * w / t2).sinh()).ln();
        let expect = r.energy / t2 + ln_z2 - von_neumann_entropy(&r).unwrap();
        assert_relative_eq!(relative_entropy(&r, &s).unwrap(), expect, epsilon = 1e-12);
        let sq = StateVector::new(3.0, 1.2, -0.9, 1.5);
        assert!(relative_entropy(&sq, &sq).unwrap().abs() < 1e-12);
        assert!(relative_entropy(&sq, &s).unwrap() > 0.0);
        assert!(relative_entropy(&s, &sq).unwrap() > 0.0);
        assert!(relative_entropy(&s, &StateVector::thermal(2.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn entropy_examples() {
        let th = StateVector::thermal(1.0, 1.0).unwrap();
        assert_relative_eq!(von_neumann_entropy(&th).unwrap(), 1.040652, epsilon = 1e-6);
        assert_relative_eq!(energy_entropy(&th).unwrap(), 1.040652, epsilon = 1e-6);
        // pure squeezed state: X = 1/2 with H = 1
        let sq = StateVector::new(1.0, 0.75f64.sqrt(), 0.0, 1.0);
        assert_eq!(von_neumann_entropy(&sq).unwrap(), 0.0);
        assert_relative_eq!(
            energy_entropy(&sq).unwrap(),
            1.5 * 3f64.ln() - 2f64.ln(),
            epsilon = 1e-12
        );
        assert_relative_eq!(energy_entropy(&sq).unwrap(), 0.954771, epsilon = 1e-6);
        assert_eq!(energy_entropy(&StateVector::ground(2.0)).unwrap(), 0.0);
        assert!(energy_entropy(&StateVector::new(0.4, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn internal_temperature_examples() {
        assert_relative_eq!(
            internal_temperature(&StateVector::new(5.066490, 0.0, 0.0, 2.0)).unwrap(),
            5.0,
            epsilon = 1e-5
        );
        assert_eq!(internal_temperature(&StateVector::ground(1.0)).unwrap(), 0.0);
        assert_relative_eq!(
            internal_temperature(&StateVector::new(1.081977, 0.0, 0.0, 1.0)).unwrap(),
            1.0,
            epsilon = 1e-5
        );
        assert!(internal_temperature(&StateVector::new(0.4, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn detailed_balance_rates() {
        let bath = BathSpec::new(2.0, 0.1);
        let (down, up) = bath.rates(1.0);
        assert_relative_eq!(down - up, 0.1, epsilon = 1e-14);
        assert_relative_eq!(up / down, (-0.5f64).exp(), epsilon = 1e-14);
    }
}
