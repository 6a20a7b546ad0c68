//! Adaptive Dormand-Prince 5(4) integrator for small dense systems.
//!
//! The state is a flat `[f64]` slice so the same stepper drives the 3x3
//! observable propagators and the density-matrix oracle.

use crate::error::{OttoError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth order minus embedded fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 5_000_000;

/// Right-hand side `dy/dt = f(t, y)` written into `dy`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]);
}

impl<F> OdeSystem for (usize, F)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.0
    }
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.1)(t, y, dy)
    }
}

/// Counters from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

pub struct DormandPrince {
    tol: Tolerances,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
}

impl DormandPrince {
    pub fn new(dim: usize, tol: Tolerances) -> Self {
        Self {
            tol,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            y_stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
        }
    }

    /// Integrates `y` in place from `t0` to `t1`, calling `observe(t, y)` after
    /// every accepted step (and once at `t0`).
    pub fn integrate<S, O>(
        &mut self,
        sys: &mut S,
        t0: f64,
        t1: f64,
        y: &mut [f64],
        mut observe: O,
    ) -> Result<Stats>
    where
        S: OdeSystem + ?Sized,
        O: FnMut(f64, &[f64]),
    {
        let n = y.len();
        assert_eq!(n, sys.dim(), "state length does not match system dimension");
        assert_eq!(n, self.y_new.len(), "integrator sized for a different system");
        let mut stats = Stats::default();
        observe(t0, y);
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(stats);
        }
        let dir = span.signum();
        sys.rhs(t0, y, &mut self.k[0]);
        let mut h = self.initial_step(sys, t0, y, span.abs()) * dir;
        let mut t = t0;
        let mut err_prev: f64 = 1e-4;
        let mut last_rejected = false;

        while (t1 - t) * dir > 0.0 {
            if stats.accepted + stats.rejected > MAX_STEPS {
                return Err(OttoError::Integrator(format!(
                    "step budget exhausted at t = {t:.6e}"
                )));
            }
            if (t + h - t1) * dir > 0.0 {
                h = t1 - t;
            }
            if h.abs() <= 1e-14 * t.abs().max(span.abs()) {
                return Err(OttoError::Integrator(format!(
                    "step size underflow (h = {h:.3e}) at t = {t:.6e}"
                )));
            }
            let err = self.step(sys, t, h, y);
            if err <= 1.0 {
                t = if (t + h - t1) * dir >= 0.0 { t1 } else { t + h };
                y.copy_from_slice(&self.y_new);
                // FSAL: stage 7 is the derivative at the new point
                let (first, rest) = self.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                stats.accepted += 1;
                observe(t, y);
                // PI controller
                let mut fac = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    SAFETY * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)
                };
                fac = fac.clamp(MIN_FACTOR, MAX_FACTOR);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                h *= fac;
                err_prev = err.max(1e-4);
                last_rejected = false;
            } else {
                stats.rejected += 1;
                let fac = (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
                h *= fac;
                last_rejected = true;
            }
            if !h.is_finite() {
                return Err(OttoError::Integrator("non-finite step size".into()));
            }
        }
        Ok(stats)
    }

    fn initial_step<S: OdeSystem + ?Sized>(&mut self, sys: &mut S, t0: f64, y: &[f64], span: f64) -> f64 {
        let n = y.len();
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..n {
            let sc = self.tol.atol + self.tol.rtol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (self.k[0][i] / sc).powi(2);
        }
        d0 = (d0 / n as f64).sqrt();
        d1 = (d1 / n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        for i in 0..n {
            self.y_stage[i] = y[i] + h0 * self.k[0][i];
        }
        let (head, tail) = self.k.split_at_mut(1);
        sys.rhs(t0 + h0, &self.y_stage, &mut tail[0]);
        let mut d2: f64 = 0.0;
        for i in 0..n {
            let sc = self.tol.atol + self.tol.rtol * y[i].abs();
            d2 += ((tail[0][i] - head[0][i]) / sc).powi(2);
        }
        d2 = (d2 / n as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// One trial step; leaves the candidate in `y_new` and returns the scaled error.
    fn step<S: OdeSystem + ?Sized>(&mut self, sys: &mut S, t: f64, h: f64, y: &[f64]) -> f64 {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let ys = &mut self.y_stage;
        for i in 0..n {
            ys[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, ys, k2);
        for i in 0..n {
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, ys, k3);
        for i in 0..n {
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, ys, k4);
        for i in 0..n {
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, ys, k5);
        for i in 0..n {
            ys[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.rhs(t + h, ys, k6);
        let yn = &mut self.y_new;
        for i in 0..n {
            yn[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(t + h, yn, k7);
        let mut acc = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(yn[i].abs());
            acc += (e / sc).powi(2);
        }
        (acc / n as f64).sqrt()
    }
}

/// Convenience wrapper: integrates a closure system and returns the final state.
pub fn solve<F>(dim: usize, f: F, t0: f64, t1: f64, y0: &[f64], tol: Tolerances) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut sys = (dim, f);
    let mut y = y0.to_vec();
    DormandPrince::new(dim, tol).integrate(&mut sys, t0, t1, &mut y, |_, _| {})?;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = solve(1, |_, y, dy| dy[0] = -y[0], 0.0, 3.0, &[1.0], Tolerances::default()).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_many_periods() {
        let w = 3.0;
        let t1 = 200.0;
        let y = solve(
            2,
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -w * w * y[0];
            },
            0.0,
            t1,
            &[1.0, 0.0],
            Tolerances::new(1e-12, 1e-14),
        )
        .unwrap();
        assert!((y[0] - (w * t1).cos()).abs() < 1e-8, "{}", y[0]);
    }

    #[test]
    fn backwards_and_zero_span() {
        let y = solve(1, |_, y, dy| dy[0] = y[0], 1.0, 0.0, &[1.0], Tolerances::default()).unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-9);
        let y = solve(1, |_, y, dy| dy[0] = y[0], 1.0, 1.0, &[2.0], Tolerances::default()).unwrap();
        assert_eq!(y[0], 2.0);
    }

    #[test]
    fn time_dependent_rhs() {
        // dy/dt = t^2 -> y = t^3/3
        let y = solve(1, |t, _, dy| dy[0] = t * t, 0.0, 2.0, &[0.0], Tolerances::default()).unwrap();
        assert!((y[0] - 8.0 / 3.0).abs() < 1e-10);
    }
}
