//! Trajectory logs: what a run records, and how it is exported.
//!
//! A [`TrajectoryLog`] is self-contained: it carries the scenario context
//! (graph, gains, inertia, mode) next to the samples, so post-hoc checks
//! like the reduced σ-dynamics audit need nothing but the log itself.

use crate::body::{AgentState, InertiaTensor};
use crate::control::ControllerGains;
use crate::diagnostics::DiagnosticsSample;
use crate::graph::CommGraph;
use crate::so3::{to_euler_zyx, Rotation, Vec3};
use crate::Mode;
use std::io::{self, Write};

/// An in-neighbor as seen from an agent: either another agent (by agent
/// index) or the reference trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeighborRef {
    Agent(usize),
    Reference,
}

/// The scenario context a log carries with it.
///
/// Node convention: for attitude and sync runs the graph nodes are the
/// agents themselves (node i = agent i). For tracking runs the graph has one
/// extra node: node 0 is the reference and node i+1 is agent i.
#[derive(Clone, Debug)]
pub struct LogContext {
    pub scenario_name: String,
    pub mode: Mode,
    pub graph: CommGraph,
    pub gains: ControllerGains,
    pub inertia: InertiaTensor,
    /// Integration step in seconds (samples may be spaced by a multiple).
    pub step: f64,
    /// Attitude agreement threshold in radians used by
    /// [`TrajectoryLog::time_to_consensus`].
    pub consensus_threshold: f64,
}

impl LogContext {
    /// Number of agents (excludes the reference node in tracking runs).
    pub fn agent_count(&self) -> usize {
        match self.mode {
            Mode::Tracking => self.graph.node_count() - 1,
            _ => self.graph.node_count(),
        }
    }

    /// The graph node holding agent `i`.
    pub fn agent_node(&self, i: usize) -> usize {
        match self.mode {
            Mode::Tracking => i + 1,
            _ => i,
        }
    }

    /// The in-neighbors of agent `i`, with graph nodes translated back to
    /// agent indices (or to the reference).
    pub fn agent_in_neighbors(&self, i: usize) -> Vec<NeighborRef> {
        self.graph
            .in_neighbors(self.agent_node(i))
            .iter()
            .map(|&node| match self.mode {
                Mode::Tracking if node == 0 => NeighborRef::Reference,
                Mode::Tracking => NeighborRef::Agent(node - 1),
                _ => NeighborRef::Agent(node),
            })
            .collect()
    }
}

/// Reference state recorded with each sample of a tracking run.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceSample {
    pub rotation: Rotation,
    pub omega: Vec3,
    pub omega_dot: Vec3,
}

/// One logged instant.
#[derive(Clone, Debug)]
pub struct Sample {
    pub t: f64,
    pub states: Vec<AgentState>,
    /// Control torques in effect at this instant (N·m).
    pub controls: Vec<Vec3>,
    /// Present in tracking runs only.
    pub reference: Option<ReferenceSample>,
    pub diagnostics: DiagnosticsSample,
}

/// A complete recorded run.
#[derive(Clone, Debug)]
pub struct TrajectoryLog {
    pub context: LogContext,
    pub samples: Vec<Sample>,
    /// Worst ‖RᵀR − I‖_F over every agent state ever produced during the
    /// run, logged or not.
    pub max_orthonormality_defect: f64,
}

impl TrajectoryLog {
    /// The attitude-agreement indicator for one sample: distance to the
    /// reference for tracking runs, largest pairwise angle otherwise
    /// (radians).
    pub fn consensus_indicator(&self, sample: &Sample) -> f64 {
        match &sample.diagnostics.tracking {
            Some(e) => e.max_angle,
            None => sample.diagnostics.consensus.max_pairwise_angle,
        }
    }

    /// First logged time after which the consensus indicator stays at or
    /// below the context threshold through the end of the run; `None` if the
    /// final sample is still above it.
    pub fn time_to_consensus(&self) -> Option<f64> {
        let threshold = self.context.consensus_threshold;
        let mut first = None;
        for sample in self.samples.iter().rev() {
            if self.consensus_indicator(sample) <= threshold {
                first = Some(sample.t);
            } else {
                break;
            }
        }
        first
    }

    /// The last logged sample. Panics on an empty log, which the simulator
    /// never produces.
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("a run logs at least one sample")
    }

    /// The column layout of [`TrajectoryLog::write_csv`] as
    /// `(name, description)` pairs, in column order.
    pub fn column_descriptions(&self) -> Vec<(String, String)> {
        self.schema()
            .into_iter()
            .map(|c| (c.name, c.description))
            .collect()
    }

    /// Writes the run as CSV: a header row, then one row per sample.
    /// Angles are exported in degrees and rates in degrees per second;
    /// torques and Ψ values are raw.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let schema = self.schema();
        let header: Vec<&str> = schema.iter().map(|c| c.name.as_str()).collect();
        writeln!(out, "{}", header.join(","))?;
        let mut row = Vec::with_capacity(schema.len());
        for sample in &self.samples {
            row.clear();
            for column in &schema {
                row.push(format!("{:.12e}", (column.extract)(sample)));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    fn schema(&self) -> Vec<Column> {
        let mut columns: Vec<Column> = vec![Column {
            name: "t".into(),
            description: "simulation time (s)".into(),
            extract: Box::new(|s| s.t),
        }];
        let second_order = self.context.mode != Mode::AttitudeConsensus;
        for i in 0..self.context.agent_count() {
            let label = i + 1; // agents are numbered from 1 in scenario files
            for (axis, name) in ["roll", "pitch", "yaw"].iter().enumerate() {
                columns.push(Column {
                    name: format!("a{label}_{name}_deg"),
                    description: format!(
                        "agent {label} attitude, intrinsic Z-Y-X {name} angle (deg)"
                    ),
                    extract: Box::new(move |s| {
                        let e = to_euler_zyx(&s.states[i].rotation).to_degrees();
                        [e.0, e.1, e.2][axis]
                    }),
                });
            }
            for (axis, name) in ["x", "y", "z"].iter().enumerate() {
                columns.push(Column {
                    name: format!("a{label}_w{name}_deg_s"),
                    description: format!("agent {label} body angular velocity, {name} (deg/s)"),
                    extract: Box::new(move |s| s.states[i].omega[axis].to_degrees()),
                });
            }
            for (axis, name) in ["x", "y", "z"].iter().enumerate() {
                columns.push(Column {
                    name: format!("a{label}_u{name}_nm"),
                    description: format!("agent {label} control torque, {name} (N·m)"),
                    extract: Box::new(move |s| s.controls[i][axis]),
                });
            }
            if second_order {
                columns.push(Column {
                    name: format!("a{label}_sigma_norm"),
                    description: format!(
                        "agent {label} composite error norm ‖σ‖ over its in-neighbors (rad/s)"
                    ),
                    extract: Box::new(move |s| s.diagnostics.sigma_norms[i]),
                });
            }
        }
        if self.context.mode == Mode::Tracking {
            for (axis, name) in ["roll", "pitch", "yaw"].iter().enumerate() {
                columns.push(Column {
                    name: format!("ref_{name}_deg"),
                    description: format!("reference attitude, {name} angle (deg)"),
                    extract: Box::new(move |s| {
                        let r = s.reference.as_ref().expect("tracking sample");
                        let e = to_euler_zyx(&r.rotation).to_degrees();
                        [e.0, e.1, e.2][axis]
                    }),
                });
            }
            for (axis, name) in ["x", "y", "z"].iter().enumerate() {
                columns.push(Column {
                    name: format!("ref_w{name}_deg_s"),
                    description: format!("reference body angular velocity, {name} (deg/s)"),
                    extract: Box::new(move |s| {
                        s.reference.as_ref().expect("tracking sample").omega[axis].to_degrees()
                    }),
                });
            }
            columns.push(Column {
                name: "max_ref_angle_deg".into(),
                description: "largest agent attitude error to the reference (deg)".into(),
                extract: Box::new(|s| {
                    s.diagnostics
                        .tracking
                        .as_ref()
                        .expect("tracking sample")
                        .max_angle
                        .to_degrees()
                }),
            });
            columns.push(Column {
                name: "max_ref_velocity_err_deg_s".into(),
                description: "largest agent velocity error to the reference (deg/s)".into(),
                extract: Box::new(|s| {
                    s.diagnostics
                        .tracking
                        .as_ref()
                        .expect("tracking sample")
                        .max_velocity_error
                        .to_degrees()
                }),
            });
        } else {
            columns.push(Column {
                name: "v1".into(),
                description: "team consensus energy certificate".into(),
                extract: Box::new(|s| s.diagnostics.v1.expect("undirected sample")),
            });
        }
        columns.push(Column {
            name: "max_pairwise_angle_deg".into(),
            description: "largest attitude angle between any two agents (deg)".into(),
            extract: Box::new(|s| s.diagnostics.consensus.max_pairwise_angle.to_degrees()),
        });
        columns.push(Column {
            name: "max_pairwise_psi".into(),
            description: "largest unit-weight attitude error Ψ between any two agents".into(),
            extract: Box::new(|s| s.diagnostics.consensus.max_pairwise_psi),
        });
        columns.push(Column {
            name: "max_velocity_disagreement_deg_s".into(),
            description: "largest relative velocity error between any two agents (deg/s)".into(),
            extract: Box::new(|s| {
                s.diagnostics
                    .consensus
                    .max_velocity_disagreement
                    .to_degrees()
            }),
        });
        columns
    }
}

struct Column {
    name: String,
    description: String,
    extract: Box<dyn Fn(&Sample) -> f64>,
}
