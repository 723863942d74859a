//! Runtime certificates and convergence metrics.
//!
//! The simulator attaches a [`DiagnosticsSample`] to every logged state:
//! consensus-energy certificates that theory says must decay, plus raw
//! disagreement metrics that quantify how far the team is from consensus or
//! from the reference. [`monotonicity_report`] then audits a certificate
//! series after the fact, flagging any increase beyond a floating-point
//! allowance.

use crate::body::{AgentState, InertiaTensor};
use crate::control::ControllerGains;
use crate::graph::CommGraph;
use crate::metrics::{psi, relative_rotation, sigma, velocity_error, ErrorWeights};
use crate::so3::{Rotation, Vec3};
use thiserror::Error;

/// Errors from certificate evaluation.
#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("the team energy certificate is defined for undirected graphs only")]
    RequiresUndirected,
    #[error("expected one state per graph node ({nodes}), got {states}")]
    StateCount { nodes: usize, states: usize },
}

/// Team consensus energy over an undirected graph:
/// `V₁ = (K_p/2)·Σ_i Σ_{j∈N_i} Ψ(g_i, g_j) + ½·Σ_i α_i·ω_iᵀJω_i`.
///
/// The attitude part runs over ordered pairs, so every edge contributes
/// twice; two agents a half-turn apart with unit weights therefore add
/// 2·K_p, not K_p. Along closed-loop attitude-consensus trajectories this
/// function is non-increasing, and exactly conserved when K_D = 0.
pub fn lyapunov_v1(
    states: &[AgentState],
    graph: &CommGraph,
    gains: &ControllerGains,
    inertia: &InertiaTensor,
) -> Result<f64, DiagnosticsError> {
    if graph.is_directed() {
        return Err(DiagnosticsError::RequiresUndirected);
    }
    if states.len() != graph.node_count() {
        return Err(DiagnosticsError::StateCount {
            nodes: graph.node_count(),
            states: states.len(),
        });
    }
    let mut attitude = 0.0;
    for i in 0..states.len() {
        for &j in graph.in_neighbors(i) {
            attitude += psi(&states[i].rotation, &states[j].rotation, &gains.weights);
        }
    }
    let mut kinetic = 0.0;
    for (i, s) in states.iter().enumerate() {
        kinetic += gains.alpha[i] * s.omega.dot(&inertia.apply(&s.omega));
    }
    Ok(0.5 * gains.kp * attitude + 0.5 * kinetic)
}

/// Per-link energy certificate for one agent `k` against a single neighbor:
/// `V₂ = K_p·Ψ(g_k, g_l) + ½·α_k·σ_kᵀJσ_k`, with σ_k formed over that
/// neighbor alone.
///
/// Along velocity-sync trajectories this decays for every leaf against its
/// unique neighbor; along tracking trajectories it decays for every agent
/// against its parent (including the reference itself).
pub fn lyapunov_v2_pair(
    k: usize,
    state_k: &AgentState,
    neighbor_rotation: &Rotation,
    neighbor_omega: &Vec3,
    gains: &ControllerGains,
    inertia: &InertiaTensor,
) -> f64 {
    let s = sigma(
        &state_k.rotation,
        &state_k.omega,
        &[(*neighbor_rotation, *neighbor_omega)],
        gains.kp,
        &gains.weights,
        inertia,
    );
    gains.kp * psi(&state_k.rotation, neighbor_rotation, &gains.weights)
        + 0.5 * gains.alpha[k] * s.dot(&inertia.apply(&s))
}

/// One certificate increase beyond the floating-point allowance.
#[derive(Clone, Copy, Debug)]
pub struct MonotonicityViolation {
    pub t: f64,
    pub previous: f64,
    pub current: f64,
    /// The allowance that was exceeded.
    pub tolerance: f64,
}

/// Outcome of auditing one certificate time series.
#[derive(Clone, Debug, Default)]
pub struct MonotonicityReport {
    pub violations: Vec<MonotonicityViolation>,
    /// Largest increase observed between consecutive samples (0 if none).
    pub max_increase: f64,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits a `(t, V(t))` series for monotone decay.
///
/// An increase between consecutive samples counts as a violation when it
/// exceeds `1e-8·(1 + V)` — a relative-plus-absolute allowance for
/// accumulated rounding in the integrator and in the certificate evaluation
/// itself.
pub fn monotonicity_report(series: &[(f64, f64)]) -> MonotonicityReport {
    let mut report = MonotonicityReport::default();
    for pair in series.windows(2) {
        let (_, previous) = pair[0];
        let (t, current) = pair[1];
        let increase = current - previous;
        report.max_increase = report.max_increase.max(increase);
        let tolerance = 1e-8 * (1.0 + previous.abs());
        if increase > tolerance {
            report.violations.push(MonotonicityViolation {
                t,
                previous,
                current,
                tolerance,
            });
        }
    }
    report
}

/// Raw disagreement metrics over a team, all with unit error weights and
/// maxima over ordered pairs: the largest attitude error Ψ, the largest
/// relative rotation angle (radians), and the largest relative velocity
/// error norm (rad/s).
#[derive(Clone, Copy, Debug, Default)]
pub struct ConsensusMetrics {
    pub max_pairwise_psi: f64,
    pub max_pairwise_angle: f64,
    pub max_velocity_disagreement: f64,
}

/// Computes [`ConsensusMetrics`] over all ordered pairs of agents.
pub fn consensus_metrics(states: &[AgentState]) -> ConsensusMetrics {
    let unit = ErrorWeights::identity();
    let mut m = ConsensusMetrics::default();
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            if i == j {
                continue;
            }
            m.max_pairwise_psi = m.max_pairwise_psi.max(psi(&a.rotation, &b.rotation, &unit));
            m.max_pairwise_angle = m
                .max_pairwise_angle
                .max(relative_rotation(&a.rotation, &b.rotation).angle());
            m.max_velocity_disagreement = m.max_velocity_disagreement.max(
                velocity_error(&a.rotation, &a.omega, &b.rotation, &b.omega).norm(),
            );
        }
    }
    m
}

/// Worst-case tracking errors of a team against the reference: largest
/// attitude angle to the reference (radians) and largest transported
/// velocity error norm (rad/s).
#[derive(Clone, Copy, Debug, Default)]
pub struct TrackingErrors {
    pub max_angle: f64,
    pub max_velocity_error: f64,
}

/// Computes [`TrackingErrors`] of every agent against the reference state.
pub fn tracking_errors(
    states: &[AgentState],
    reference_rotation: &Rotation,
    reference_omega: &Vec3,
) -> TrackingErrors {
    let mut e = TrackingErrors::default();
    for s in states {
        e.max_angle = e
            .max_angle
            .max(relative_rotation(&s.rotation, reference_rotation).angle());
        e.max_velocity_error = e.max_velocity_error.max(
            velocity_error(&s.rotation, &s.omega, reference_rotation, reference_omega).norm(),
        );
    }
    e
}

/// Everything the simulator records alongside each logged state.
#[derive(Clone, Debug)]
pub struct DiagnosticsSample {
    /// Team consensus energy; present for undirected (attitude and sync)
    /// runs only.
    pub v1: Option<f64>,
    /// Per-agent ‖σ_i‖ over the agent's in-neighbors; empty for
    /// attitude-only runs, where no velocity information is exchanged.
    pub sigma_norms: Vec<f64>,
    pub consensus: ConsensusMetrics,
    /// Errors against the reference; tracking runs only.
    pub tracking: Option<TrackingErrors>,
}
