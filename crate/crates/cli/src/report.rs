//! The run report: a machine-readable summary of one simulation plus the
//! file-writing and human-formatting that goes with it.

use crate::AppError;
use attitude_consensus::diagnostics::monotonicity_report;
use attitude_consensus::scenario::Scenario;
use attitude_consensus::sim::InitialSetReport;
use attitude_consensus::trajectory::TrajectoryLog;
use attitude_consensus::Mode;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub mode: String,
    pub agents: usize,
    pub step_s: f64,
    pub duration_s: f64,
    pub consensus_threshold_deg: f64,
    /// The `--set` overrides exactly as given on the command line.
    pub overrides: Vec<String>,
    /// The full configuration after overrides, rendered as TOML.
    pub effective_config: String,
    pub initial_set: InitialSetSummary,
    pub finals: FinalMetrics,
    /// First logged time from which the team stays within the consensus
    /// threshold; absent when consensus is not reached by the end.
    pub time_to_consensus_s: Option<f64>,
    pub consensus_reached: bool,
    /// Count of sample-to-sample energy increases beyond tolerance (team
    /// energy, plus per-leaf pair energy in sync mode; zero expected).
    pub lyapunov_violations: usize,
    pub max_orthonormality_defect: f64,
    pub outputs: OutputPaths,
}

#[derive(Serialize)]
pub struct InitialSetSummary {
    pub all_satisfied: bool,
    pub margins: Vec<Margin>,
}

#[derive(Serialize)]
pub struct Margin {
    pub label: String,
    pub value: f64,
    pub bound: f64,
    pub satisfied: bool,
}

#[derive(Serialize)]
pub struct FinalMetrics {
    pub max_pairwise_angle_deg: f64,
    pub max_pairwise_psi: f64,
    pub max_velocity_disagreement_deg_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_angle_error_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_velocity_error_deg_s: Option<f64>,
}

#[derive(Serialize)]
pub struct OutputPaths {
    pub trajectory_csv: String,
    pub columns_json: String,
    pub report_json: String,
    pub report_txt: String,
}

#[derive(Serialize)]
struct ColumnDoc {
    column: String,
    description: String,
}

/// Counts increases (beyond tolerance) of the energy certificate that the
/// running mode actually guarantees to decay: the team energy for attitude
/// consensus, the per-leaf pair energies for velocity sync. Tracking mode
/// has no logged certificate, so its count is zero.
pub fn lyapunov_violations(log: &TrajectoryLog) -> usize {
    match log.context.mode {
        Mode::AttitudeConsensus => {
            let team: Vec<(f64, f64)> = log
                .samples
                .iter()
                .filter_map(|s| s.diagnostics.v1.map(|v| (s.t, v)))
                .collect();
            if team.len() >= 2 {
                monotonicity_report(&team).violations.len()
            } else {
                0
            }
        }
        Mode::Sync => {
            let graph = &log.context.graph;
            let mut count = 0;
            for leaf in graph.leaves().unwrap_or_default() {
                let neighbor = graph.in_neighbors(leaf)[0];
                let series: Vec<(f64, f64)> = log
                    .samples
                    .iter()
                    .map(|s| {
                        let v2 = attitude_consensus::diagnostics::lyapunov_v2_pair(
                            leaf,
                            &s.states[leaf],
                            &s.states[neighbor].rotation,
                            &s.states[neighbor].omega,
                            &log.context.gains,
                            &log.context.inertia,
                        );
                        (s.t, v2)
                    })
                    .collect();
                count += monotonicity_report(&series).violations.len();
            }
            count
        }
        Mode::Tracking => 0,
    }
}

pub fn build(
    scenario: &Scenario,
    log: &TrajectoryLog,
    initial: &InitialSetReport,
    overrides: Vec<String>,
    effective_config: String,
    output_dir: &Path,
) -> RunReport {
    let last = log.final_sample();
    let consensus = last.diagnostics.consensus;
    let tracking = last.diagnostics.tracking;
    let time_to_consensus = log.time_to_consensus();
    let stem = file_stem(&scenario.name);
    let path_for = |suffix: &str| output_dir.join(format!("{stem}_{suffix}")).display().to_string();

    RunReport {
        scenario: scenario.name.clone(),
        mode: scenario.mode.to_string(),
        agents: scenario.agent_count(),
        step_s: scenario.step,
        duration_s: scenario.duration,
        consensus_threshold_deg: scenario.consensus_threshold.to_degrees(),
        overrides,
        effective_config,
        initial_set: InitialSetSummary {
            all_satisfied: initial.all_satisfied(),
            margins: initial
                .checks
                .iter()
                .map(|c| Margin {
                    label: c.label.clone(),
                    value: c.value,
                    bound: c.bound,
                    satisfied: c.satisfied(),
                })
                .collect(),
        },
        finals: FinalMetrics {
            max_pairwise_angle_deg: consensus.max_pairwise_angle.to_degrees(),
            max_pairwise_psi: consensus.max_pairwise_psi,
            max_velocity_disagreement_deg_s: consensus.max_velocity_disagreement.to_degrees(),
            reference_angle_error_deg: tracking.map(|t| t.max_angle.to_degrees()),
            reference_velocity_error_deg_s: tracking.map(|t| t.max_velocity_error.to_degrees()),
        },
        time_to_consensus_s: time_to_consensus,
        consensus_reached: time_to_consensus.is_some(),
        lyapunov_violations: lyapunov_violations(log),
        max_orthonormality_defect: log.max_orthonormality_defect,
        outputs: OutputPaths {
            trajectory_csv: path_for("trajectory.csv"),
            columns_json: path_for("columns.json"),
            report_json: path_for("report.json"),
            report_txt: path_for("report.txt"),
        },
    }
}

pub fn write_outputs(
    report: &RunReport,
    log: &TrajectoryLog,
    output_dir: &Path,
) -> Result<(), AppError> {
    std::fs::create_dir_all(output_dir).map_err(|source| AppError::File {
        context: format!("creating output directory {}", output_dir.display()),
        source,
    })?;

    write_file(&report.outputs.trajectory_csv, |out| log.write_csv(out))?;

    let columns: Vec<ColumnDoc> = log
        .column_descriptions()
        .into_iter()
        .map(|(column, description)| ColumnDoc {
            column,
            description,
        })
        .collect();
    let columns_json = serde_json::to_string_pretty(&columns).expect("columns serialize");
    write_file(&report.outputs.columns_json, |out| {
        writeln!(out, "{columns_json}")
    })?;

    let report_json = serde_json::to_string_pretty(report).expect("report serializes");
    write_file(&report.outputs.report_json, |out| {
        writeln!(out, "{report_json}")
    })?;

    let summary = human_summary(report);
    write_file(&report.outputs.report_txt, |out| {
        write!(out, "{summary}")
    })?;
    Ok(())
}

pub fn human_summary(report: &RunReport) -> String {
    let mut s = String::new();
    let push = |s: &mut String, line: String| {
        s.push_str(&line);
        s.push('\n');
    };
    push(
        &mut s,
        format!(
            "{}: {} mode, {} agents, step {} s, duration {} s",
            report.scenario, report.mode, report.agents, report.step_s, report.duration_s
        ),
    );
    if report.overrides.is_empty() {
        push(&mut s, "overrides: none".into());
    } else {
        push(&mut s, format!("overrides: {}", report.overrides.join(", ")));
    }
    let region = if report.initial_set.all_satisfied {
        "inside the certified region".to_string()
    } else {
        format!(
            "{} condition(s) outside the certified region",
            report
                .initial_set
                .margins
                .iter()
                .filter(|m| !m.satisfied)
                .count()
        )
    };
    push(
        &mut s,
        format!(
            "start: {region} ({} condition(s) checked)",
            report.initial_set.margins.len()
        ),
    );
    push(&mut s, format!("at t = {} s:", report.duration_s));
    push(
        &mut s,
        format!(
            "  max pairwise angle        {:.6} deg",
            report.finals.max_pairwise_angle_deg
        ),
    );
    push(
        &mut s,
        format!(
            "  max pairwise psi          {:.6e}",
            report.finals.max_pairwise_psi
        ),
    );
    push(
        &mut s,
        format!(
            "  max velocity disagreement {:.6} deg/s",
            report.finals.max_velocity_disagreement_deg_s
        ),
    );
    if let (Some(angle), Some(vel)) = (
        report.finals.reference_angle_error_deg,
        report.finals.reference_velocity_error_deg_s,
    ) {
        push(
            &mut s,
            format!("  worst reference angle     {angle:.6} deg"),
        );
        push(
            &mut s,
            format!("  worst reference velocity  {vel:.6} deg/s"),
        );
    }
    match report.time_to_consensus_s {
        Some(t) => push(
            &mut s,
            format!(
                "time to consensus: {t} s (threshold {} deg)",
                report.consensus_threshold_deg
            ),
        ),
        None => push(
            &mut s,
            format!(
                "time to consensus: not reached within {} s (threshold {} deg)",
                report.duration_s, report.consensus_threshold_deg
            ),
        ),
    }
    push(
        &mut s,
        format!("energy monotonicity violations: {}", report.lyapunov_violations),
    );
    push(
        &mut s,
        format!(
            "max orthonormality defect: {:.3e}",
            report.max_orthonormality_defect
        ),
    );
    push(
        &mut s,
        format!("trajectory: {}", report.outputs.trajectory_csv),
    );
    push(&mut s, format!("columns:    {}", report.outputs.columns_json));
    push(&mut s, format!("report:     {}", report.outputs.report_json));
    s
}

/// Scenario names become file-name stems; anything exotic is mapped to '-'.
fn file_stem(name: &str) -> String {
    let stem: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '-'
            }
        })
        .collect();
    if stem.is_empty() {
        "scenario".into()
    } else {
        stem
    }
}

fn write_file<F>(path: &str, body: F) -> Result<(), AppError>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>,
{
    let file = std::fs::File::create(path).map_err(|source| AppError::File {
        context: format!("writing {path}"),
        source,
    })?;
    let mut out = std::io::BufWriter::new(file);
    body(&mut out).map_err(|source| AppError::File {
        context: format!("writing {path}"),
        source,
    })
}
