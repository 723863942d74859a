//! Gain/step sweeps: a cartesian grid of scenario variations, each cell an
//! isolated deterministic run; failures are recorded per cell and the sweep
//! continues.

use crate::{config, report, AppError};
use attitude_consensus::scenario::Scenario;
use attitude_consensus::sim::run_scenario;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Kp,
    Kd,
    Step,
}

impl Param {
    fn parse(name: &str) -> Option<Param> {
        match name.to_ascii_lowercase().as_str() {
            "kp" => Some(Param::Kp),
            "kd" => Some(Param::Kd),
            "step" | "h" => Some(Param::Step),
            _ => None,
        }
    }

    /// The config key the axis drives.
    fn key(self) -> &'static str {
        match self {
            Param::Kp => "gains.kp",
            Param::Kd => "gains.kd",
            Param::Step => "scenario.step",
        }
    }

    fn name(self) -> &'static str {
        match self {
            Param::Kp => "kp",
            Param::Kd => "kd",
            Param::Step => "step",
        }
    }
}

pub struct GridAxis {
    pub param: Param,
    pub values: Vec<f64>,
}

pub fn parse_axes(flags: &[String]) -> Result<Vec<GridAxis>, AppError> {
    if flags.is_empty() {
        return Err(AppError::Usage(
            "sweep needs at least one --grid PARAM=V1,V2,... axis (kp, kd, or step)".into(),
        ));
    }
    let mut axes: Vec<GridAxis> = Vec::new();
    for raw in flags {
        let (name, list) = raw.split_once('=').ok_or_else(|| {
            AppError::Usage(format!("--grid expects PARAM=V1,V2,..., got {raw:?}"))
        })?;
        let param = Param::parse(name.trim()).ok_or_else(|| {
            AppError::Usage(format!(
                "--grid parameter {name:?} not recognized; expected kp, kd, or step"
            ))
        })?;
        if axes.iter().any(|a| a.param == param) {
            return Err(AppError::Usage(format!(
                "--grid parameter {} given twice",
                param.name()
            )));
        }
        let values = list
            .split(',')
            .map(|v| {
                let v = v.trim();
                v.parse::<f64>().map_err(|_| {
                    AppError::Usage(format!("--grid {raw:?}: {v:?} is not a number"))
                })
            })
            .collect::<Result<Vec<f64>, AppError>>()?;
        if values.is_empty() {
            return Err(AppError::Usage(format!("--grid {raw:?}: no values")));
        }
        axes.push(GridAxis { param, values });
    }
    Ok(axes)
}

#[derive(Serialize, Clone)]
pub struct SweepRow {
    pub kp: Option<f64>,
    pub kd: Option<f64>,
    pub step_s: Option<f64>,
    /// "ok", or the error that stopped this cell.
    pub status: String,
    pub time_to_consensus_s: Option<f64>,
    pub consensus_reached: Option<bool>,
    pub lyapunov_violations: Option<usize>,
    pub final_max_pairwise_angle_deg: Option<f64>,
    pub final_reference_angle_deg: Option<f64>,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    scenario: String,
    axes: Vec<AxisDoc>,
    rows: &'a [SweepRow],
}

#[derive(Serialize)]
struct AxisDoc {
    param: &'static str,
    values: Vec<f64>,
}

pub fn run(base: &toml::Value, axes: &[GridAxis], output: &Path) -> Result<(), AppError> {
    // Cartesian product; the first --grid axis varies slowest, so rows come
    // out in the order the flags were given.
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut c = prefix.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }

    let rows: Vec<SweepRow> = combos
        .par_iter()
        .map(|combo| evaluate(base, axes, combo))
        .collect();

    let stem = base
        .get("scenario")
        .and_then(|s| s.get("name"))
        .and_then(|n| n.as_str())
        .unwrap_or("sweep")
        .to_string();

    std::fs::create_dir_all(output).map_err(|source| AppError::File {
        context: format!("creating output directory {}", output.display()),
        source,
    })?;
    let csv_path = output.join(format!("{stem}_sweep.csv"));
    let json_path = output.join(format!("{stem}_sweep.json"));

    let mut csv = String::new();
    csv.push_str(
        "kp,kd,step_s,status,time_to_consensus_s,consensus_reached,\
         lyapunov_violations,final_max_pairwise_angle_deg,final_reference_angle_deg\n",
    );
    for row in &rows {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            cell(row.kp),
            cell(row.kd),
            cell(row.step_s),
            quote_csv(&row.status),
            cell(row.time_to_consensus_s),
            row.consensus_reached.map(|b| b.to_string()).unwrap_or_default(),
            row.lyapunov_violations.map(|n| n.to_string()).unwrap_or_default(),
            cell(row.final_max_pairwise_angle_deg),
            cell(row.final_reference_angle_deg),
        ));
    }
    write_text(&csv_path, &csv)?;

    let summary = SweepSummary {
        scenario: stem,
        axes: axes
            .iter()
            .map(|a| AxisDoc {
                param: a.param.name(),
                values: a.values.clone(),
            })
            .collect(),
        rows: &rows,
    };
    let json = serde_json::to_string_pretty(&summary).expect("sweep summary serializes");
    write_text(&json_path, &format!("{json}\n"))?;

    println!(
        "{:>10} {:>10} {:>10}  {:>18} {:>10} {:>22}  status",
        "kp", "kd", "step", "t2c (s)", "violations", "final angle (deg)"
    );
    for row in &rows {
        let show = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>10} {:>10} {:>10}  {:>18} {:>10} {:>22}  {}",
            show(row.kp),
            show(row.kd),
            row.step_s.map(|x| x.to_string()).unwrap_or_else(|| "-".into()),
            row.time_to_consensus_s
                .map(|t| format!("{t:.3}"))
                .unwrap_or_else(|| "not reached".into()),
            row.lyapunov_violations
                .map(|n| n.to_string())
                .unwrap_or_else(|| "-".into()),
            show(row.final_max_pairwise_angle_deg),
            row.status
        );
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn evaluate(base: &toml::Value, axes: &[GridAxis], combo: &[f64]) -> SweepRow {
    let mut value = base.clone();
    for (axis, &v) in axes.iter().zip(combo) {
        if let Err(e) = config::apply_value(&mut value, axis.param.key(), toml::Value::Float(v)) {
            return error_row(&value, e.to_string());
        }
    }
    let scenario = match Scenario::from_toml_value(value.clone()) {
        Ok(sc) => sc,
        Err(e) => return error_row(&value, e.to_string()),
    };
    let log = match run_scenario(&scenario) {
        Ok(log) => log,
        Err(e) => return error_row(&value, e.to_string()),
    };
    let last = log.final_sample();
    SweepRow {
        kp: Some(scenario.gains.kp),
        kd: Some(scenario.gains.kd),
        step_s: Some(scenario.step),
        status: "ok".into(),
        time_to_consensus_s: log.time_to_consensus(),
        consensus_reached: Some(log.time_to_consensus().is_some()),
        lyapunov_violations: Some(report::lyapunov_violations(&log)),
        final_max_pairwise_angle_deg: Some(
            last.diagnostics.consensus.max_pairwise_angle.to_degrees(),
        ),
        final_reference_angle_deg: last
            .diagnostics
            .tracking
            .map(|t| t.max_angle.to_degrees()),
    }
}

/// A row for a failed cell, with whatever parameter values the tree holds.
fn error_row(value: &toml::Value, status: String) -> SweepRow {
    let float_at = |section: &str, key: &str| {
        value
            .get(section)
            .and_then(|s| s.get(key))
            .and_then(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
    };
    SweepRow {
        kp: float_at("gains", "kp"),
        kd: float_at("gains", "kd"),
        step_s: float_at("scenario", "step"),
        status,
        time_to_consensus_s: None,
        consensus_reached: None,
        lyapunov_violations: None,
        final_max_pairwise_angle_deg: None,
        final_reference_angle_deg: None,
    }
}

fn quote_csv(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), AppError> {
    let mut file = std::fs::File::create(path).map_err(|source| AppError::File {
        context: format!("writing {}", path.display()),
        source,
    })?;
    file.write_all(text.as_bytes()).map_err(|source| AppError::File {
        context: format!("writing {}", path.display()),
        source,
    })
}
