//! The three torque laws.
//!
//! * [`attitude_consensus`] — drives a team on an undirected tree to a common
//!   attitude at rest, using only neighbor attitudes and the agent's own
//!   velocity.
//! * [`velocity_sync`] — drives attitudes *and* body velocities together on
//!   an undirected tree; needs neighbor velocity and acceleration packets.
//! * [`reference_tracking`] — the same second-order law over a directed
//!   out-tree whose root is a reference trajectory every agent ultimately
//!   follows.
//!
//! All controllers are pure functions of their inputs. Neighbor data arrives
//! as already-gathered packets: the packet slice for agent `i` contains one
//! entry per in-neighbor (adjacency weights are all one), so the slice length
//! is the degree δ_i. Also here: [`reduced_sigma_dynamics_check`], which
//! verifies on a finished trajectory that the second-order laws actually
//! collapse the closed loop to the intended first-order σ-dynamics.

use crate::body::{AgentState, InertiaTensor};
use crate::metrics::{
    gradient_rate_matrix, psi_gradient, relative_rotation, sigma_and_gradient_sum, ErrorWeights,
};
use crate::so3::{Rotation, Vec3};
use crate::trajectory::{NeighborRef, TrajectoryLog};
use crate::Mode;
use thiserror::Error;

/// Errors from gain construction.
#[derive(Debug, Error)]
pub enum GainError {
    #[error("K_p must be strictly positive, got {0}")]
    NonPositiveKp(f64),
    #[error("K_D must be non-negative, got {0}")]
    NegativeKd(f64),
    #[error("every α_i must be strictly positive, got α_{index} = {value}")]
    NonPositiveAlpha { index: usize, value: f64 },
    #[error("at least one agent is required")]
    Empty,
}

/// Controller gains: attitude gain K_p, damping gain K_D, per-agent inertia
/// scalings α_i, and the attitude-error weights P.
///
/// K_D = 0 is admitted (it switches damping off, which conserves the
/// consensus energy and is useful for integrator verification); K_p and every
/// α_i must be strictly positive.
#[derive(Clone, Debug)]
pub struct ControllerGains {
    pub kp: f64,
    pub kd: f64,
    pub alpha: Vec<f64>,
    pub weights: ErrorWeights,
}

impl ControllerGains {
    pub fn new(
        kp: f64,
        kd: f64,
        alpha: Vec<f64>,
        weights: ErrorWeights,
    ) -> Result<ControllerGains, GainError> {
        if !(kp > 0.0) {
            return Err(GainError::NonPositiveKp(kp));
        }
        if !(kd >= 0.0) {
            return Err(GainError::NegativeKd(kd));
        }
        if alpha.is_empty() {
            return Err(GainError::Empty);
        }
        for (index, &value) in alpha.iter().enumerate() {
            if !(value > 0.0) {
                return Err(GainError::NonPositiveAlpha { index, value });
            }
        }
        Ok(ControllerGains {
            kp,
            kd,
            alpha,
            weights,
        })
    }

    /// K_p, K_D with α_i = 1 for `n` agents and unit error weights.
    pub fn uniform(kp: f64, kd: f64, n: usize) -> Result<ControllerGains, GainError> {
        Self::new(kp, kd, vec![1.0; n], ErrorWeights::identity())
    }
}

/// Information one agent receives from one in-neighbor for the second-order
/// controllers: attitude, body velocity, and body acceleration.
///
/// The attitude-only controller takes bare rotations instead, which encodes
/// its defining property — it never sees neighbor velocities — in the
/// signature itself.
#[derive(Clone, Copy, Debug)]
pub struct NeighborPacket {
    pub rotation: Rotation,
    pub omega: Vec3,
    pub omega_dot: Vec3,
}

/// Errors from controller evaluation.
#[derive(Debug, Error)]
pub enum ControlError {
    /// The second-order laws divide by the degree; an isolated agent has no
    /// well-defined torque.
    #[error("agent {agent} has no in-neighbors; the degree-normalized torque is undefined")]
    NoNeighbors { agent: usize },
}

/// Attitude-consensus torque:
/// `u = −ω̂·Jω − (1/α_i)(K_p·Σ_j ∇Ψ_ij + K_D·ω)`.
///
/// Uses only the neighbors' attitudes and the agent's own state; with no
/// neighbors it reduces to pure damped rotation.
pub fn attitude_consensus(
    i: usize,
    state: &AgentState,
    neighbor_rotations: &[Rotation],
    gains: &ControllerGains,
    inertia: &InertiaTensor,
) -> Vec3 {
    let mut gradient_sum = Vec3::zeros();
    for r_j in neighbor_rotations {
        gradient_sum += psi_gradient(&state.rotation, r_j, &gains.weights);
    }
    let omega = &state.omega;
    -omega.cross(&inertia.apply(omega))
        - (gains.kp * gradient_sum + gains.kd * omega) / gains.alpha[i]
}

/// Attitude-and-velocity synchronization torque over an undirected tree.
///
/// Given packets from the δ_i neighbors, with G = Σ_j ∇Ψ_ij,
/// σ = Σ_j ω_ij + K_p·J⁻¹G, η_j = R_ijᵀω_j and M_ij the gradient-rate
/// matrix:
///
/// ```text
/// u = ω×Jω + (1/δ_i)·[ −(K_p·G + K_D·σ)/α_i
///                      + Σ_j J·(R_ijᵀ·ω̇_j + η_j×ω)
///                      − K_p·Σ_j M_ij·ω_ij ]
/// ```
///
/// The three bracketed groups are the σ-damping feedback, the transported
/// neighbor-acceleration feed-forward, and the gradient-rate compensation;
/// the gyroscopic term cancels the free rigid-body drift so that σ obeys
/// α_i·σ̇ = −J⁻¹(K_p·G + K_D·σ) exactly along the closed loop.
pub fn velocity_sync(
    i: usize,
    state: &AgentState,
    neighbors: &[NeighborPacket],
    gains: &ControllerGains,
    inertia: &InertiaTensor,
) -> Result<Vec3, ControlError> {
    second_order_torque(i, state, neighbors, gains, inertia)
}

/// Reference-tracking torque over a directed out-tree.
///
/// Identical in form to [`velocity_sync`], evaluated over the agent's
/// in-neighbors; for the agents adjacent to the root, the packet carries the
/// reference attitude, velocity, and analytic acceleration.
pub fn reference_tracking(
    i: usize,
    state: &AgentState,
    in_neighbors: &[NeighborPacket],
    gains: &ControllerGains,
    inertia: &InertiaTensor,
) -> Result<Vec3, ControlError> {
    second_order_torque(i, state, in_neighbors, gains, inertia)
}

fn second_order_torque(
    i: usize,
    state: &AgentState,
    neighbors: &[NeighborPacket],
    gains: &ControllerGains,
    inertia: &InertiaTensor,
) -> Result<Vec3, ControlError> {
    if neighbors.is_empty() {
        return Err(ControlError::NoNeighbors { agent: i });
    }
    let delta = neighbors.len() as f64;
    let omega = &state.omega;

    let mut velocity_sum = Vec3::zeros();
    let mut gradient_sum = Vec3::zeros();
    let mut transport_sum = Vec3::zeros();
    let mut gradient_rate_sum = Vec3::zeros();
    for packet in neighbors {
        let rij = relative_rotation(&state.rotation, &packet.rotation);
        let eta = rij.rotate_back(&packet.omega);
        let omega_ij = omega - eta;
        velocity_sum += omega_ij;
        gradient_sum += psi_gradient(&state.rotation, &packet.rotation, &gains.weights);
        transport_sum +=
            inertia.apply(&(rij.rotate_back(&packet.omega_dot) + eta.cross(omega)));
        gradient_rate_sum +=
            gradient_rate_matrix(&state.rotation, &packet.rotation, &gains.weights) * omega_ij;
    }
    let sigma = velocity_sum + gains.kp * inertia.apply_inverse(&gradient_sum);
    Ok(omega.cross(&inertia.apply(omega))
        + ((-(gains.kp * gradient_sum + gains.kd * sigma) / gains.alpha[i] + transport_sum
            - gains.kp * gradient_rate_sum)
            / delta))
}

/// Errors from the reduced-dynamics consistency check.
#[derive(Debug, Error)]
pub enum ReducedCheckError {
    #[error("the σ-dynamics check applies to velocity-sync and tracking runs only")]
    WrongMode,
    #[error("at least two samples are required")]
    TooShort,
}

/// Verifies that a logged closed-loop trajectory obeys the reduced σ-dynamics
/// `σ̇_i = −(1/α_i)·J⁻¹(K_p·G_i + K_D·σ_i)`.
///
/// σ_i and the gradient sum G_i are recomputed from the logged states at each
/// sample, σ̇ is approximated by the forward difference across consecutive
/// samples, and the maximum norm of the mismatch over all agents and samples
/// is returned. The differencing itself contributes O(dt) error, so the
/// residual shrinks roughly linearly as the logging step is halved.
pub fn reduced_sigma_dynamics_check(log: &TrajectoryLog) -> Result<f64, ReducedCheckError> {
    if log.context.mode == Mode::AttitudeConsensus {
        return Err(ReducedCheckError::WrongMode);
    }
    if log.samples.len() < 2 {
        return Err(ReducedCheckError::TooShort);
    }
    let ctx = &log.context;
    let n = ctx.agent_count();
    let mut neighbor_states: Vec<(Rotation, Vec3)> = Vec::new();
    let mut residual = 0.0_f64;
    for window in log.samples.windows(2) {
        let (now, next) = (&window[0], &window[1]);
        let dt = next.t - now.t;
        for i in 0..n {
            neighbor_states.clear();
            for nbr in ctx.agent_in_neighbors(i) {
                match nbr {
                    NeighborRef::Agent(j) => {
                        let s = &now.states[j];
                        neighbor_states.push((s.rotation, s.omega));
                    }
                    NeighborRef::Reference => {
                        let r = now
                            .reference
                            .as_ref()
                            .expect("tracking logs carry reference samples");
                        neighbor_states.push((r.rotation, r.omega));
                    }
                }
            }
            let (sigma_now, gradient_sum) = sigma_and_gradient_sum(
                &now.states[i].rotation,
                &now.states[i].omega,
                &neighbor_states,
                ctx.gains.kp,
                &ctx.gains.weights,
                &ctx.inertia,
            );
            neighbor_states.clear();
            for nbr in ctx.agent_in_neighbors(i) {
                match nbr {
                    NeighborRef::Agent(j) => {
                        let s = &next.states[j];
                        neighbor_states.push((s.rotation, s.omega));
                    }
                    NeighborRef::Reference => {
                        let r = next
                            .reference
                            .as_ref()
                            .expect("tracking logs carry reference samples");
                        neighbor_states.push((r.rotation, r.omega));
                    }
                }
            }
            let (sigma_next, _) = sigma_and_gradient_sum(
                &next.states[i].rotation,
                &next.states[i].omega,
                &neighbor_states,
                ctx.gains.kp,
                &ctx.gains.weights,
                &ctx.inertia,
            );
            let fd = (sigma_next - sigma_now) / dt;
            let rhs = -ctx
                .inertia
                .apply_inverse(&(ctx.gains.kp * gradient_sum + ctx.gains.kd * sigma_now))
                / ctx.gains.alpha[i];
            residual = residual.max((fd - rhs).norm());
        }
    }
    Ok(residual)
}
