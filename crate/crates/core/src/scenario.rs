//! Scenario files: the TOML schema, parsing, and validation.
//!
//! A scenario fully describes one run. Angles and rates in scenario files
//! are written in degrees for readability and converted to radians here.
//!
//! ```toml
//! [scenario]
//! name = "bench"
//! mode = "attitude"            # "attitude" | "sync" | "tracking"
//! step = 1e-3                  # integration step (s)
//! duration = 10.0              # simulated time (s)
//! inertia_diag = [0.23, 0.28, 0.35]
//! consensus_threshold_deg = 1.0   # optional, default 1.0
//! log_every = 10                  # optional, default 1 (log every step)
//!
//! [graph]
//! # Agents are numbered 1..n. Undirected modes list undirected edges;
//! # tracking mode sets directed = true, numbers the reference as node 0,
//! # and lists arcs in the direction information flows.
//! edges = [[1, 2], [2, 3], [3, 4]]
//! # directed = true
//! # root = 0
//!
//! [gains]
//! kp = 1.0
//! kd = 2.0
//! # alpha = 1.0                # scalar or one value per agent; default 1.0
//! # p = [1.0, 1.0, 1.0]        # attitude error weights; default identity
//!
//! [[agents]]                   # one block per agent, in agent order
//! euler_deg = [20.0, 20.0, 20.0]   # roll, pitch, yaw
//! omega_deg_s = [1.0, 1.0, 1.0]
//!
//! # [reference]                # tracking mode only
//! # waveform = ["sin", "cos", "sin"]
//! # amplitude_deg_s = [10.0, 10.0, 10.0]
//! # period_s = 8.0
//! # constant_deg_s = [0.0, 5.0, 0.0]  # alternative to the sinusoid fields
//! # initial_euler_deg = [0.0, 0.0, 0.0]
//! ```

use crate::body::{AgentState, InertiaError, InertiaTensor};
use crate::control::{ControllerGains, GainError};
use crate::graph::{CommGraph, GraphError};
use crate::metrics::{ErrorWeights, WeightError};
use crate::reference::{ReferenceMotion, Waveform};
use crate::so3::{from_euler_zyx, EulerZyx, Rotation, Vec3};
use crate::trajectory::LogContext;
use crate::Mode;
use serde::Deserialize;
use thiserror::Error;

/// Errors from scenario parsing and validation.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario file is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unknown mode {0:?}; expected \"attitude\", \"sync\", or \"tracking\"")]
    UnknownMode(String),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("gains: {0}")]
    Gains(#[from] GainError),
    #[error("inertia: {0}")]
    Inertia(#[from] InertiaError),
    #[error("error weights: {0}")]
    Weights(#[from] WeightError),
    #[error("step must be strictly positive, got {0}")]
    NonPositiveStep(f64),
    #[error("duration must be at least one step ({step}), got {duration}")]
    DurationTooShort { duration: f64, step: f64 },
    #[error("log_every must be at least 1")]
    ZeroLogEvery,
    #[error("at least one agent is required")]
    NoAgents,
    #[error("{mode} mode needs at least {required} agents, got {given}")]
    TooFewAgents {
        mode: &'static str,
        required: usize,
        given: usize,
    },
    #[error("alpha must be a scalar or one value per agent ({agents}), got {given} values")]
    AlphaLength { agents: usize, given: usize },
    #[error(
        "{mode} mode uses an undirected graph over agents 1..{n}; \
         set neither `directed` nor `root`"
    )]
    ExpectsUndirected { mode: &'static str, n: usize },
    #[error("edge [{a}, {b}] refers to node {bad}, but agents are numbered 1..{n}")]
    EdgeNodeOutOfRange {
        a: usize,
        b: usize,
        bad: usize,
        n: usize,
    },
    #[error("the communication graph must be a connected tree over the agents")]
    NotATree,
    #[error("tracking mode needs `directed = true` and arcs over nodes 0..{0} (0 = reference)")]
    ExpectsDirected(usize),
    #[error("tracking mode requires the reference, node 0, as the root")]
    RootMustBeReference,
    #[error(
        "the communication graph must be a directed tree rooted at the reference, \
         with every agent hearing exactly one in-neighbor"
    )]
    NotAnOutTree,
    #[error("a [reference] section is required in tracking mode")]
    MissingReference,
    #[error("[reference] applies to tracking mode only")]
    UnexpectedReference,
    #[error(
        "[reference] must set either the sinusoid fields \
         (waveform, amplitude_deg_s, period_s) or constant_deg_s, not both"
    )]
    AmbiguousReference,
    #[error("[reference] sinusoid needs waveform, amplitude_deg_s, and period_s together")]
    IncompleteSinusoid,
    #[error("reference period must be strictly positive, got {0}")]
    NonPositivePeriod(f64),
    #[error("unknown waveform {0:?}; expected \"sin\" or \"cos\"")]
    UnknownWaveform(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    scenario: RawMeta,
    graph: RawGraph,
    gains: RawGains,
    agents: Vec<RawAgent>,
    reference: Option<RawReference>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeta {
    name: String,
    mode: String,
    step: f64,
    duration: f64,
    inertia_diag: [f64; 3],
    consensus_threshold_deg: Option<f64>,
    log_every: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    edges: Vec<[usize; 2]>,
    directed: Option<bool>,
    root: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGains {
    kp: f64,
    kd: f64,
    alpha: Option<AlphaSpec>,
    p: Option<[f64; 3]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlphaSpec {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    euler_deg: [f64; 3],
    omega_deg_s: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    waveform: Option<[String; 3]>,
    amplitude_deg_s: Option<[f64; 3]>,
    period_s: Option<f64>,
    constant_deg_s: Option<[f64; 3]>,
    initial_euler_deg: Option<[f64; 3]>,
}

/// The reference trajectory of a tracking scenario: initial attitude plus
/// the velocity profile.
#[derive(Clone, Debug)]
pub struct ReferenceConfig {
    pub initial: Rotation,
    pub motion: ReferenceMotion,
}

/// A validated, unit-converted scenario, ready to run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    /// Integration step (s).
    pub step: f64,
    /// Total simulated time (s).
    pub duration: f64,
    /// Log every k-th step (the final step is always logged).
    pub log_every: usize,
    /// Attitude agreement threshold (radians).
    pub consensus_threshold: f64,
    /// Internal graph: agents are nodes 0..n−1, except in tracking mode
    /// where node 0 is the reference and agent i is node i+1.
    pub graph: CommGraph,
    pub gains: ControllerGains,
    pub inertia: InertiaTensor,
    pub initial_states: Vec<AgentState>,
    /// Present exactly when `mode` is tracking.
    pub reference: Option<ReferenceConfig>,
}

impl Scenario {
    /// Parses and validates a scenario from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Scenario, ScenarioError> {
        Self::validate(toml::from_str::<RawScenario>(text)?)
    }

    /// Parses and validates a scenario from an already-assembled TOML value
    /// (the CLI edits the value tree for `--set` overrides first).
    pub fn from_toml_value(value: toml::Value) -> Result<Scenario, ScenarioError> {
        Self::validate(value.try_into::<RawScenario>()?)
    }

    /// The context block attached to logs of this scenario.
    pub fn log_context(&self) -> LogContext {
        LogContext {
            scenario_name: self.name.clone(),
            mode: self.mode,
            graph: self.graph.clone(),
            gains: self.gains.clone(),
            inertia: self.inertia.clone(),
            step: self.step,
            consensus_threshold: self.consensus_threshold,
        }
    }

    /// Number of agents.
    pub fn agent_count(&self) -> usize {
        self.initial_states.len()
    }

    fn validate(raw: RawScenario) -> Result<Scenario, ScenarioError> {
        let mode = match raw.scenario.mode.as_str() {
            "attitude" => Mode::AttitudeConsensus,
            "sync" => Mode::Sync,
            "tracking" => Mode::Tracking,
            other => return Err(ScenarioError::UnknownMode(other.to_string())),
        };
        if !(raw.scenario.step > 0.0) {
            return Err(ScenarioError::NonPositiveStep(raw.scenario.step));
        }
        if raw.scenario.duration < raw.scenario.step {
            return Err(ScenarioError::DurationTooShort {
                duration: raw.scenario.duration,
                step: raw.scenario.step,
            });
        }
        let log_every = raw.scenario.log_every.unwrap_or(1);
        if log_every == 0 {
            return Err(ScenarioError::ZeroLogEvery);
        }
        let n = raw.agents.len();
        if n == 0 {
            return Err(ScenarioError::NoAgents);
        }

        let graph = build_graph(&raw.graph, mode, n)?;

        let alpha = match raw.gains.alpha {
            None => vec![1.0; n],
            Some(AlphaSpec::Uniform(a)) => vec![a; n],
            Some(AlphaSpec::PerAgent(v)) => {
                if v.len() != n {
                    return Err(ScenarioError::AlphaLength {
                        agents: n,
                        given: v.len(),
                    });
                }
                v
            }
        };
        let p = raw.gains.p.unwrap_or([1.0, 1.0, 1.0]);
        let weights = ErrorWeights::new(p[0], p[1], p[2])?;
        let gains = ControllerGains::new(raw.gains.kp, raw.gains.kd, alpha, weights)?;

        let d = raw.scenario.inertia_diag;
        let inertia = InertiaTensor::from_diagonal(d[0], d[1], d[2])?;

        let initial_states = raw
            .agents
            .iter()
            .map(|a| {
                AgentState::new(
                    from_euler_zyx(&EulerZyx::from_degrees(
                        a.euler_deg[0],
                        a.euler_deg[1],
                        a.euler_deg[2],
                    )),
                    Vec3::new(
                        a.omega_deg_s[0].to_radians(),
                        a.omega_deg_s[1].to_radians(),
                        a.omega_deg_s[2].to_radians(),
                    ),
                )
            })
            .collect();

        let reference = match (mode, raw.reference) {
            (Mode::Tracking, None) => return Err(ScenarioError::MissingReference),
            (Mode::Tracking, Some(raw_ref)) => Some(build_reference(raw_ref)?),
            (_, Some(_)) => return Err(ScenarioError::UnexpectedReference),
            (_, None) => None,
        };

        Ok(Scenario {
            name: raw.scenario.name,
            mode,
            step: raw.scenario.step,
            duration: raw.scenario.duration,
            log_every,
            consensus_threshold: raw
                .scenario
                .consensus_threshold_deg
                .unwrap_or(1.0)
                .to_radians(),
            graph,
            gains,
            inertia,
            initial_states,
            reference,
        })
    }
}

fn build_graph(raw: &RawGraph, mode: Mode, n: usize) -> Result<CommGraph, ScenarioError> {
    match mode {
        Mode::AttitudeConsensus | Mode::Sync => {
            let mode_name = if mode == Mode::Sync { "sync" } else { "attitude" };
            if raw.directed.unwrap_or(false) || raw.root.is_some() {
                return Err(ScenarioError::ExpectsUndirected { mode: mode_name, n });
            }
            if mode == Mode::Sync && n < 2 {
                // A lone agent has nobody to synchronize velocities with.
                return Err(ScenarioError::TooFewAgents {
                    mode: "sync",
                    required: 2,
                    given: n,
                });
            }
            let mut edges = Vec::with_capacity(raw.edges.len());
            for &[a, b] in &raw.edges {
                // Scenario files number agents from 1; internally they are 0-based.
                for node in [a, b] {
                    if node == 0 || node > n {
                        return Err(ScenarioError::EdgeNodeOutOfRange { a, b, bad: node, n });
                    }
                }
                edges.push((a - 1, b - 1));
            }
            let graph = CommGraph::undirected(n, &edges)?;
            if !graph.is_connected_tree()? {
                return Err(ScenarioError::NotATree);
            }
            Ok(graph)
        }
        Mode::Tracking => {
            if !raw.directed.unwrap_or(false) {
                return Err(ScenarioError::ExpectsDirected(n));
            }
            if raw.root.unwrap_or(0) != 0 {
                return Err(ScenarioError::RootMustBeReference);
            }
            let mut edges = Vec::with_capacity(raw.edges.len());
            for &[a, b] in &raw.edges {
                for node in [a, b] {
                    if node > n {
                        return Err(ScenarioError::EdgeNodeOutOfRange { a, b, bad: node, n });
                    }
                }
                edges.push((a, b));
            }
            // Node 0 is the reference, agents occupy nodes 1..n.
            let graph = CommGraph::directed(n + 1, &edges, 0)?;
            if !graph.is_directed_out_tree(0)? {
                return Err(ScenarioError::NotAnOutTree);
            }
            Ok(graph)
        }
    }
}

fn build_reference(raw: RawReference) -> Result<ReferenceConfig, ScenarioError> {
    let initial = raw.initial_euler_deg.unwrap_or([0.0; 3]);
    let initial = from_euler_zyx(&EulerZyx::from_degrees(initial[0], initial[1], initial[2]));
    let sinusoid_fields =
        [raw.waveform.is_some(), raw.amplitude_deg_s.is_some(), raw.period_s.is_some()];
    let motion = match (sinusoid_fields.iter().any(|&f| f), raw.constant_deg_s) {
        (true, Some(_)) => return Err(ScenarioError::AmbiguousReference),
        (false, None) => return Err(ScenarioError::IncompleteSinusoid),
        (false, Some(c)) => ReferenceMotion::Constant {
            omega: Vec3::new(c[0].to_radians(), c[1].to_radians(), c[2].to_radians()),
        },
        (true, None) => {
            if !sinusoid_fields.iter().all(|&f| f) {
                return Err(ScenarioError::IncompleteSinusoid);
            }
            let period = raw.period_s.unwrap();
            if !(period > 0.0) {
                return Err(ScenarioError::NonPositivePeriod(period));
            }
            let a = raw.amplitude_deg_s.unwrap();
            let mut waveform = [Waveform::Sin; 3];
            for (slot, name) in waveform.iter_mut().zip(raw.waveform.unwrap().iter()) {
                *slot = match name.as_str() {
                    "sin" => Waveform::Sin,
                    "cos" => Waveform::Cos,
                    other => return Err(ScenarioError::UnknownWaveform(other.to_string())),
                };
            }
            ReferenceMotion::Sinusoid {
                amplitude: Vec3::new(
                    a[0].to_radians(),
                    a[1].to_radians(),
                    a[2].to_radians(),
                ),
                period,
                waveform,
            }
        }
    };
    Ok(ReferenceConfig { initial, motion })
}
