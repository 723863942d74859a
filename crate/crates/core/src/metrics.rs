//! Attitude error functions: the weighted trace error Ψ and its body-frame
//! gradient, the relative velocity error, the composite error σ, the
//! gradient's rate of change along relative motion, and the sublevel
//! threshold τ_L below which Ψ has no spurious critical points.
//!
//! Conventions: the relative attitude of agent i with respect to agent j is
//! `R_ij = R_jᵀ·R_i`, and all velocities are body-frame.

use crate::body::InertiaTensor;
use crate::so3::{exp_so3, vee_skew_part, Mat3, Rotation, Vec3};
use thiserror::Error;

/// Errors from error-weight construction.
#[derive(Debug, Error)]
pub enum WeightError {
    #[error("error weights must be strictly positive, got ({0}, {1}, {2})")]
    NotPositive(f64, f64, f64),
}

/// Strictly positive diagonal weights P = diag(p₁, p₂, p₃) for the attitude
/// error Ψ = ½·tr(P(I − R_ij)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorWeights {
    p: Vec3,
}

impl ErrorWeights {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<ErrorWeights, WeightError> {
        if !(p1 > 0.0 && p2 > 0.0 && p3 > 0.0) {
            return Err(WeightError::NotPositive(p1, p2, p3));
        }
        Ok(ErrorWeights {
            p: Vec3::new(p1, p2, p3),
        })
    }

    /// The unweighted error, P = I₃.
    pub fn identity() -> ErrorWeights {
        ErrorWeights {
            p: Vec3::new(1.0, 1.0, 1.0),
        }
    }

    /// The diagonal entries (p₁, p₂, p₃).
    pub fn diagonal(&self) -> &Vec3 {
        &self.p
    }

    /// P as a matrix.
    pub fn matrix(&self) -> Mat3 {
        Mat3::from_diagonal(&self.p)
    }
}

impl Default for ErrorWeights {
    fn default() -> Self {
        ErrorWeights::identity()
    }
}

/// Relative attitude R_ij = R_jᵀ·R_i of agent i seen from agent j.
pub fn relative_rotation(r_i: &Rotation, r_j: &Rotation) -> Rotation {
    r_j.transpose() * *r_i
}

/// The attitude error Ψ(R_i, R_j) = ½·tr(P(I − R_jᵀR_i)); non-negative and
/// zero exactly at R_i = R_j.
pub fn psi(r_i: &Rotation, r_j: &Rotation, weights: &ErrorWeights) -> f64 {
    let rij = relative_rotation(r_i, r_j);
    let m = rij.matrix();
    let p = weights.diagonal();
    0.5 * (p.x * (1.0 - m[(0, 0)]) + p.y * (1.0 - m[(1, 1)]) + p.z * (1.0 - m[(2, 2)]))
}

/// Body-frame gradient of Ψ with respect to agent i's attitude:
/// `vee(skew(P·R_ij))`. Vanishes exactly on the critical set.
pub fn psi_gradient(r_i: &Rotation, r_j: &Rotation, weights: &ErrorWeights) -> Vec3 {
    let rij = relative_rotation(r_i, r_j);
    // P is diagonal, so skew(P·R_ij) needs only the off-diagonal products.
    vee_skew_part(&(weights.matrix() * rij.matrix()))
}

/// Relative body-frame velocity error ω_ij = ω_i − R_ijᵀ·ω_j.
pub fn velocity_error(r_i: &Rotation, omega_i: &Vec3, r_j: &Rotation, omega_j: &Vec3) -> Vec3 {
    omega_i - relative_rotation(r_i, r_j).rotate_back(omega_j)
}

/// Composite error σ_i = Σ_j ω_ij + K_p·J⁻¹·Σ_j ∇Ψ_ij over the given
/// neighbor states `(R_j, ω_j)`, together with the bare gradient sum
/// Σ_j ∇Ψ_ij (needed separately by the reduced closed-loop dynamics).
pub fn sigma_and_gradient_sum(
    r_i: &Rotation,
    omega_i: &Vec3,
    neighbors: &[(Rotation, Vec3)],
    kp: f64,
    weights: &ErrorWeights,
    inertia: &InertiaTensor,
) -> (Vec3, Vec3) {
    let mut velocity_sum = Vec3::zeros();
    let mut gradient_sum = Vec3::zeros();
    for (r_j, omega_j) in neighbors {
        velocity_sum += velocity_error(r_i, omega_i, r_j, omega_j);
        gradient_sum += psi_gradient(r_i, r_j, weights);
    }
    (
        velocity_sum + kp * inertia.apply_inverse(&gradient_sum),
        gradient_sum,
    )
}

/// Composite error σ_i (see [`sigma_and_gradient_sum`]).
pub fn sigma(
    r_i: &Rotation,
    omega_i: &Vec3,
    neighbors: &[(Rotation, Vec3)],
    kp: f64,
    weights: &ErrorWeights,
    inertia: &InertiaTensor,
) -> Vec3 {
    sigma_and_gradient_sum(r_i, omega_i, neighbors, kp, weights, inertia).0
}

/// The matrix M_ij = ½(tr(R_ijᵀP)·I₃ − R_ijᵀP) such that
/// d/dt ∇Ψ_ij = M_ij·ω_ij along relative motion with velocity error ω_ij.
pub fn gradient_rate_matrix(r_i: &Rotation, r_j: &Rotation, weights: &ErrorWeights) -> Mat3 {
    let b = relative_rotation(r_i, r_j).matrix().transpose() * weights.matrix();
    (Mat3::identity() * b.trace() - b) * 0.5
}

/// Rate of change of the gradient: ½(tr(R_ijᵀP)·I₃ − R_ijᵀP)·ω_ij.
pub fn gradient_rate(r_i: &Rotation, r_j: &Rotation, weights: &ErrorWeights, omega_ij: &Vec3) -> Vec3 {
    gradient_rate_matrix(r_i, r_j, weights) * omega_ij
}

/// The four critical rotations of Ψ(·, I₃): the identity and the three
/// half-turns about the coordinate axes.
pub fn critical_set() -> [Rotation; 4] {
    let pi = std::f64::consts::PI;
    [
        Rotation::IDENTITY,
        exp_so3(&Vec3::new(pi, 0.0, 0.0)),
        exp_so3(&Vec3::new(0.0, pi, 0.0)),
        exp_so3(&Vec3::new(0.0, 0.0, pi)),
    ]
}

/// The largest sublevel threshold free of spurious critical points:
/// τ_L = min(p₁+p₂, p₂+p₃, p₁+p₃), the smallest nonzero critical value of Ψ.
pub fn tau_l(weights: &ErrorWeights) -> f64 {
    let p = weights.diagonal();
    (p.x + p.y).min(p.y + p.z).min(p.x + p.z)
}
