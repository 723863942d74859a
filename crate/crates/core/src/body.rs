//! Rigid-body state and dynamics: agent state on SO(3) × ℝ³, the inertia
//! tensor with its cached inverse, and the forced Euler equation.

use crate::so3::{Mat3, Rotation, Vec3};
use thiserror::Error;

/// Maximum allowed asymmetry ‖J − Jᵀ‖_F for an inertia matrix.
pub const INERTIA_SYMMETRY_TOL: f64 = 1e-12;

/// Errors from inertia-tensor construction.
#[derive(Debug, Error)]
pub enum InertiaError {
    #[error("inertia matrix is not symmetric: ‖J − Jᵀ‖_F = {defect:.3e}")]
    NotSymmetric { defect: f64 },
    #[error("inertia matrix is not positive-definite (eigenvalue {eigenvalue:.3e})")]
    NotPositiveDefinite { eigenvalue: f64 },
}

/// A symmetric positive-definite inertia matrix (kg·m²) with cached inverse.
#[derive(Clone, Debug)]
pub struct InertiaTensor {
    matrix: Mat3,
    inverse: Mat3,
}

impl InertiaTensor {
    /// Admits a symmetric positive-definite matrix.
    pub fn from_matrix(j: Mat3) -> Result<InertiaTensor, InertiaError> {
        let defect = (j - j.transpose()).norm();
        if !(defect <= INERTIA_SYMMETRY_TOL) {
            return Err(InertiaError::NotSymmetric { defect });
        }
        let eigen = nalgebra::SymmetricEigen::new(j);
        let min_eig = eigen.eigenvalues.min();
        if !(min_eig > 0.0) {
            return Err(InertiaError::NotPositiveDefinite {
                eigenvalue: min_eig,
            });
        }
        let inverse = j
            .try_inverse()
            .expect("positive-definite matrices are invertible");
        Ok(InertiaTensor { matrix: j, inverse })
    }

    /// Principal-axis inertia diag(jx, jy, jz).
    pub fn from_diagonal(jx: f64, jy: f64, jz: f64) -> Result<InertiaTensor, InertiaError> {
        Self::from_matrix(Mat3::from_diagonal(&Vec3::new(jx, jy, jz)))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    pub fn inverse(&self) -> &Mat3 {
        &self.inverse
    }

    /// J·v (maps a body velocity to a body momentum).
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.matrix * v
    }

    /// J⁻¹·v (maps a body momentum to a body velocity).
    pub fn apply_inverse(&self, v: &Vec3) -> Vec3 {
        self.inverse * v
    }
}

/// State of one rigid body: attitude, body angular velocity, and the most
/// recently computed closed-loop angular acceleration.
///
/// The stored acceleration is what neighbors receive in their information
/// packets; it lags the true instantaneous acceleration by one integration
/// step (see the simulator module).
#[derive(Clone, Debug)]
pub struct AgentState {
    /// Attitude R (body-to-reference).
    pub rotation: Rotation,
    /// Body angular velocity ω (rad/s).
    pub omega: Vec3,
    /// Last computed body angular acceleration ω̇ (rad/s²).
    pub omega_dot: Vec3,
}

impl AgentState {
    pub fn new(rotation: Rotation, omega: Vec3) -> AgentState {
        AgentState {
            rotation,
            omega,
            omega_dot: Vec3::zeros(),
        }
    }

    /// True iff every stored scalar is finite.
    pub fn is_finite(&self) -> bool {
        self.rotation.matrix().iter().all(|x| x.is_finite())
            && self.omega.iter().all(|x| x.is_finite())
            && self.omega_dot.iter().all(|x| x.is_finite())
    }
}

/// The forced Euler equation: returns the configuration rate (the body
/// angular velocity, as the Lie-algebra element driving Ṙ = R·hat(ω)) and
/// the angular acceleration ω̇ = J⁻¹(Jω × ω + u).
pub fn rigid_body_derivative(state: &AgentState, u: &Vec3, inertia: &InertiaTensor) -> (Vec3, Vec3) {
    (state.omega, angular_acceleration(&state.omega, u, inertia))
}

/// ω̇ = J⁻¹(Jω × ω + u).
pub fn angular_acceleration(omega: &Vec3, u: &Vec3, inertia: &InertiaTensor) -> Vec3 {
    inertia.apply_inverse(&(inertia.apply(omega).cross(omega) + u))
}
