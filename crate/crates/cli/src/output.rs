//! Data files: fixed-format CSV tables and JSON reports. Nothing
//! run-dependent (time, host, thread count) is written.

use std::fmt::Write as _;
use std::path::Path;

use nmflow_core::analysis::RelationReport;
use nmflow_core::Trajectory;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::scenario::{OracleSummary, ScenarioOutcome};
use crate::sweep::SweepRow;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut header = vec!["t", "B1", "B2", "B3", "F_M", "I_Q", "I_E"];
    header.extend(traj.rates.iter().chain(&traj.extras).map(|s| s.name));
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..traj.len() {
        let b = traj.bloch[i];
        let fixed = [traj.t[i], b.x(), b.y(), b.z(), traj.f_m[i], traj.i_q[i], traj.i_e[i]];
        let columns = traj.rates.iter().chain(&traj.extras).map(|s| s.values[i]);
        let row: Vec<String> = fixed.into_iter().chain(columns).map(fmt_f64).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationJson {
    pub model: &'static str,
    pub residual: f64,
    pub max_abs: f64,
    pub checked: usize,
    pub excluded: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl RelationJson {
    pub fn new(model: &'static str, r: &RelationReport<f64>, tolerance: f64) -> Self {
        Self {
            model,
            residual: r.residual,
            max_abs: r.max_abs,
            checked: r.checked,
            excluded: r.excluded,
            tolerance,
            pass: r.residual < tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport<'a> {
    pub command: &'static str,
    pub version: &'static str,
    pub model: &'static str,
    pub provenance: &'static str,
    pub samples: usize,
    pub classification: &'static str,
    pub threshold: f64,
    pub qfi_backflow_intervals: &'a [(f64, f64)],
    pub energy_backflow_intervals: &'a [(f64, f64)],
    pub relation_residual_max: f64,
    pub relation: RelationJson,
    pub sign_lock_violations: usize,
    pub overlap_correlation: Option<f64>,
    pub overlap_correlation_positive_population: Option<f64>,
    pub sigma_z_sign_change: Option<f64>,
    pub oracle: Option<&'a OracleSummary>,
    pub advisories: &'a [String],
    pub config: &'a ScenarioConfig,
}

impl<'a> RunReport<'a> {
    pub fn new(
        command: &'static str,
        cfg: &'a ScenarioConfig,
        out: &'a ScenarioOutcome,
        relation: RelationJson,
    ) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            model: out.trajectory.model.as_str(),
            provenance: out.trajectory.provenance.as_str(),
            samples: out.trajectory.len(),
            classification: out.report.classification.as_str(),
            threshold: out.report.threshold,
            qfi_backflow_intervals: &out.report.qfi_backflow_intervals,
            energy_backflow_intervals: &out.report.energy_backflow_intervals,
            relation_residual_max: out.report.relation_residual_max,
            relation,
            sign_lock_violations: out.sign_lock_violations,
            overlap_correlation: out.overlap,
            overlap_correlation_positive_population: out.overlap_positive_population,
            sigma_z_sign_change: out.report.sigma_z_sign_change,
            oracle: out.oracle.as_ref(),
            advisories: &out.advisories,
            config: cfg,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

pub fn sweep_csv(parameters: &[String], rows: &[SweepRow]) -> String {
    let mut out = String::from("index,");
    for p in parameters {
        out.push_str(p);
        out.push(',');
    }
    out.push_str(
        "classification,qfi_intervals,energy_intervals,qfi_measure,energy_measure,relation_residual,overlap,error\n",
    );
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for row in rows {
        let _ = write!(out, "{},", row.index);
        for v in &row.values {
            let _ = write!(out, "{},", fmt_f64(*v));
        }
        match &row.result {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},",
                    r.classification.as_str(),
                    r.qfi_intervals,
                    r.energy_intervals,
                    fmt_f64(r.qfi_measure),
                    fmt_f64(r.energy_measure),
                    fmt_f64(r.relation_residual),
                    opt(r.overlap),
                );
            }
            Err(e) => {
                let _ = writeln!(out, ",,,,,,,\"{}\"", e.replace('"', "\"\""));
            }
        }
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)
}
