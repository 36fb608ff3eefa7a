//! `run`, `sweep` and `verify`, with their exit-code mapping.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::output::{self, RelationJson, RunReport};
use crate::scenario::{self, OracleSummary};
use crate::sweep::{self, SweepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    Ok = 0,
    Io = 1,
    InvalidConfig = 2,
    Numerical = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] nmflow_core::Error),
    #[error("{0}")]
    Sweep(#[from] SweepError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::InvalidConfig,
            CliError::Sweep(SweepError::MissingSweep | SweepError::BadThreads(_)) => ExitCode::InvalidConfig,
            CliError::Sweep(SweepError::Pool(_)) | CliError::Io { .. } => ExitCode::Io,
            CliError::Numerical(_) | CliError::VerificationFailed(_) => ExitCode::Numerical,
        }
    }
}

fn resolve(out_dir: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    output::write_file(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn warn_all(advisories: &[String], err: &mut impl Write) {
    for a in advisories {
        let _ = writeln!(err, "warning: {a}");
    }
}

/// `nmflow run`: trajectory CSV and report JSON; the oracle runs when the
/// config enables it.
pub fn run(config: &Path, out_dir: &Path, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(config)?;
    warn_all(&scenario::advisories(&cfg), stderr);
    let out = scenario::execute(&cfg, cfg.oracle.enabled)?;
    let relation = RelationJson::new(
        out.trajectory.model.as_str(),
        &out.relation,
        scenario::relation_tolerance(&cfg.model),
    );
    let report = RunReport::new("run", &cfg, &out, relation);
    let csv = write(
        resolve(out_dir, &cfg.outputs.trajectory_csv),
        &output::trajectory_csv(&out.trajectory),
    )?;
    let json = write(resolve(out_dir, &cfg.outputs.report_json), &output::to_json(&report))?;
    let _ = writeln!(stdout, "model: {}", report.model);
    let _ = writeln!(stdout, "classification: {}", report.classification);
    let _ = writeln!(
        stdout,
        "intervals: {} qfi backflow, {} energy backflow",
        report.qfi_backflow_intervals.len(),
        report.energy_backflow_intervals.len()
    );
    let _ = writeln!(stdout, "relation residual: {:e}", report.relation.residual);
    if let Some(o) = &out.oracle {
        let _ = writeln!(
            stdout,
            "oracle max deviation: {:e} ({})",
            o.ode_max_abs,
            if o.pass { "pass" } else { "fail" }
        );
    }
    let _ = writeln!(stdout, "wrote {}", csv.display());
    let _ = writeln!(stdout, "wrote {}", json.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepReport<'a> {
    command: &'static str,
    version: &'static str,
    points: usize,
    failed: usize,
    config: &'a ScenarioConfig,
}

/// `nmflow sweep`: one classification row per product point.
pub fn sweep(config: &Path, out_dir: &Path, stdout: &mut impl Write) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(config)?;
    let threads = sweep::thread_cap()?;
    let rows = sweep::run_sweep(&cfg, threads)?;
    let names: Vec<String> = cfg
        .sweep
        .as_ref()
        .map(|s| s.keys().cloned().collect())
        .unwrap_or_default();
    let table = output::sweep_csv(&names, &rows);
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    let csv = write(resolve(out_dir, &cfg.outputs.sweep_csv), &table)?;
    let report = SweepReport {
        command: "sweep",
        version: env!("CARGO_PKG_VERSION"),
        points: rows.len(),
        failed,
        config: &cfg,
    };
    let json = write(resolve(out_dir, &cfg.outputs.report_json), &output::to_json(&report))?;
    for row in &rows {
        let values: Vec<String> = names.iter().zip(&row.values).map(|(n, v)| format!("{n}={v}")).collect();
        let status = match &row.result {
            Ok(r) => r.classification.as_str().to_string(),
            Err(e) => format!("error: {e}"),
        };
        let _ = writeln!(stdout, "[{}] {}: {}", row.index, values.join(" "), status);
    }
    let _ = writeln!(stdout, "wrote {}", csv.display());
    let _ = writeln!(stdout, "wrote {}", json.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    command: &'static str,
    model: &'static str,
    relation: RelationJson,
    sign_lock_violations: usize,
    oracle: &'a OracleSummary,
    pass: bool,
}

/// `nmflow verify`: oracle comparison and relation residuals only, printed
/// as JSON. Fails with the numerical exit code when a check misses its bound.
pub fn verify(config: &Path, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(config)?;
    warn_all(&scenario::advisories(&cfg), stderr);
    let out = scenario::execute(&cfg, true)?;
    let relation = RelationJson::new(
        out.trajectory.model.as_str(),
        &out.relation,
        scenario::relation_tolerance(&cfg.model),
    );
    let oracle = out.oracle.as_ref().expect("oracle requested");
    let pass = relation.pass && oracle.pass && out.sign_lock_violations == 0;
    let report = VerifyReport {
        command: "verify",
        model: out.trajectory.model.as_str(),
        relation,
        sign_lock_violations: out.sign_lock_violations,
        oracle,
        pass,
    };
    let _ = stdout.write_all(output::to_json(&report).as_bytes());
    if pass {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(format!(
            "relation residual {:e} (bound {:e}), oracle deviation {:e} (bound {:e}), {} sign-lock violations",
            report.relation.residual,
            report.relation.tolerance,
            oracle.ode_max_abs,
            oracle.tolerance,
            out.sign_lock_violations
        )))
    }
}
