use nalgebra::{Matrix3, Vector3};
use crate::state::StateVector;

/// Exact affine action `v -> M v + b` of one branch on (H, L, D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineBranchMap {
    pub matrix: Matrix3<f64>,
    pub offset: Vector3<f64>,
    pub omega_in: f64,
    pub omega_out: f64,
    pub duration: f64,
}

impl AffineBranchMap {
    pub fn identity(omega: f64) -> Self {
        Self {
            matrix: Matrix3::identity(),
            offset: Vector3::zeros(),
            omega_in: omega,
            omega_out: omega,
            duration: 0.0,
        }
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * v + self.offset
    }

    /// Applies the map; the result refers to `omega_out`.
    pub fn apply(&self, s: &StateVector) -> StateVector {
        debug_assert!(
            (s.omega - self.omega_in).abs() <= 1e-12 * self.omega_in,
            "state at omega {} fed to a map expecting {}",
            s.omega,
            self.omega_in
        );
        StateVector::from_vector(&self.apply_vector(&s.to_vector()), self.omega_out)
    }

    /// `next ∘ self`: first `self`, then `next`.
    pub fn then(&self, next: &AffineBranchMap) -> AffineBranchMap {
        AffineBranchMap {
            matrix: next.matrix * self.matrix,
            offset: next.matrix * self.offset + next.offset,
            omega_in: self.omega_in,
            omega_out: next.omega_out,
            duration: self.duration + next.duration,
        }
    }

    /// The 4x4 homogeneous form with the identity row appended.
    pub fn homogeneous(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.matrix[(i, j)];
            }
            out[i][3] = self.offset[i];
        }
        out[3][3] = 1.0;
        out
    }

    /// Largest modulus among the eigenvalues of the linear part.
    pub fn spectral_radius(&self) -> f64 {
        self.matrix
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn inverse(&self) -> Option<AffineBranchMap> {
        let inv = self.matrix.try_inverse()?;
        Some(AffineBranchMap {
            matrix: inv,
            offset: -(inv * self.offset),
            omega_in: self.omega_out,
            omega_out: self.omega_in,
            duration: self.duration,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(seed: f64) -> AffineBranchMap {
        AffineBranchMap {
            matrix: Matrix3::new(
                0.9, 0.1 * seed, 0.0, -0.2, 0.5, 0.3, 0.05, seed, 0.7,
            ),
            offset: Vector3::new(seed, -1.0, 0.5),
            omega_in: 1.0,
            omega_out: 1.0,
            duration: seed,
        }
    }

    #[test]
    fn composition_is_associative() {
        let (a, b, c) = (sample(0.3), sample(-1.1), sample(2.0));
        let left = a.then(&b).then(&c);
        let right = a.then(&b.then(&c));
        assert!((left.matrix - right.matrix).norm() < 1e-12);
        assert!((left.offset - right.offset).norm() < 1e-12);
        let v = Vector3::new(1.0, 2.0, 3.0);
        let seq = c.apply_vector(&b.apply_vector(&a.apply_vector(&v)));
        assert!((left.apply_vector(&v) - seq).norm() < 1e-12);
    }

    #[test]
    fn identity_and_inverse() {
        let a = sample(0.7);
        let id = AffineBranchMap::identity(1.0);
        assert_eq!(id.then(&a).matrix, a.matrix);
        let round = a.then(&a.inverse().unwrap());
        assert!((round.matrix - Matrix3::identity()).norm() < 1e-12);
        assert!(round.offset.norm() < 1e-12);
        assert_eq!(id.homogeneous()[3], [0.0, 0.0, 0.0, 1.0]);
    }
}
