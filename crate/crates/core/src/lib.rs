//! Multi-agent attitude coordination on the rotation group.
//!
//! This crate simulates teams of rigid bodies — think small-satellite
//! formations — that negotiate a common attitude, synchronize their
//! rotational motion, or collectively follow a moving reference, using only
//! neighbor-to-neighbor communication over a tree-shaped network.
//!
//! Everything runs directly on SO(3): attitudes are rotation matrices,
//! errors are measured with a weighted trace metric, and trajectories are
//! integrated with a Lie-group Munthe-Kaas scheme, so there are no
//! quaternion sign conventions and no drift off the group to manage.
//!
//! # Module map
//!
//! * [`so3`] — rotation-group primitives: hat/vee, exp/log, projection,
//!   Euler conversions.
//! * [`graph`] — communication topologies (undirected trees, directed
//!   out-trees) and their validators.
//! * [`body`] — inertia tensors and forced rigid-body dynamics.
//! * [`metrics`] — the weighted attitude error Ψ, its gradient and rate,
//!   velocity errors, and the composite error σ.
//! * [`control`] — the three torque laws, one per [`Mode`], and the reduced
//!   σ-dynamics audit.
//! * [`reference`] — closed-form reference velocity profiles.
//! * [`scenario`] — TOML scenario files: schema, parsing, validation.
//! * [`sim`] — the closed-loop simulator and initial-condition certificates.
//! * [`diagnostics`] — energy certificates, monotonicity auditing, and
//!   consensus/tracking metrics.
//! * [`trajectory`] — run logs and CSV export.
//!
//! # Example
//!
//! ```
//! use attitude_consensus::{scenario::Scenario, sim::run_scenario};
//!
//! let toml = r#"
//!     [scenario]
//!     name = "pair"
//!     mode = "attitude"
//!     step = 1e-3
//!     duration = 0.5
//!     inertia_diag = [0.23, 0.28, 0.35]
//!
//!     [graph]
//!     edges = [[1, 2]]
//!
//!     [gains]
//!     kp = 1.0
//!     kd = 2.0
//!
//!     [[agents]]
//!     euler_deg = [20.0, 10.0, -15.0]
//!     omega_deg_s = [1.0, 0.0, 0.0]
//!
//!     [[agents]]
//!     euler_deg = [0.0, 0.0, 0.0]
//!     omega_deg_s = [0.0, 0.0, 0.0]
//! "#;
//! let scenario = Scenario::from_toml_str(toml).unwrap();
//! let log = run_scenario(&scenario).unwrap();
//! let end = log.final_sample();
//! assert!(
//!     end.diagnostics.consensus.max_pairwise_angle
//!         < log.samples[0].diagnostics.consensus.max_pairwise_angle
//! );
//! ```

pub mod body;
pub mod control;
pub mod diagnostics;
pub mod graph;
pub mod metrics;
pub mod reference;
pub mod scenario;
pub mod sim;
pub mod so3;
pub mod trajectory;

/// The three coordination objectives a scenario can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Agree on a common attitude and come to rest, exchanging attitudes
    /// only, over an undirected tree.
    AttitudeConsensus,
    /// Synchronize attitudes and body velocities, exchanging full motion
    /// packets, over an undirected tree.
    Sync,
    /// Follow a moving reference over a directed tree rooted at it.
    Tracking,
}

impl Mode {
    /// The name used in scenario files and CLI output.
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::AttitudeConsensus => "attitude",
            Mode::Sync => "sync",
            Mode::Tracking => "tracking",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
