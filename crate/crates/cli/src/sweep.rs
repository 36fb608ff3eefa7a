//! Cartesian parameter sweeps with order-preserving concurrent execution.

use nmflow_core::analysis::{overlap_correlation, total_measure, Classification};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ScenarioConfig, SweepConfig};
use crate::scenario;

pub const THREADS_ENV: &str = "NMFLOW_THREADS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("config has no [sweep] table")]
    MissingSweep,
    #[error("{THREADS_ENV} must be a positive integer, got {0:?}")]
    BadThreads(String),
    #[error("cannot build thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub classification: Classification,
    pub qfi_intervals: usize,
    pub energy_intervals: usize,
    pub qfi_measure: f64,
    pub energy_measure: f64,
    pub relation_residual: f64,
    pub overlap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    /// Swept parameter values, in sweep key order.
    pub values: Vec<f64>,
    /// Per-point failures are recorded rather than aborting the sweep.
    pub result: Result<PointSummary, String>,
}

/// Points of the cartesian product, last key varying fastest.
pub fn product(sweep: &SweepConfig) -> Vec<Vec<f64>> {
    sweep.values().fold(vec![Vec::new()], |acc, range| {
        acc.iter()
            .flat_map(|prefix| {
                range.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Thread cap from `NMFLOW_THREADS`; `None` when unset or empty.
pub fn thread_cap() -> Result<Option<usize>, SweepError> {
    match std::env::var(THREADS_ENV) {
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or(SweepError::BadThreads(s)),
        Err(_) => Ok(None),
    }
}

fn run_point(base: &ScenarioConfig, names: &[&String], values: &[f64]) -> Result<PointSummary, String> {
    let mut cfg = base.clone();
    cfg.sweep = None;
    for (name, &v) in names.iter().zip(values) {
        cfg.model = cfg
            .model
            .with(name, v)
            .ok_or_else(|| format!("unknown parameter `{name}`"))?;
    }
    let out = scenario::execute(&cfg, false).map_err(|e| e.to_string())?;
    Ok(PointSummary {
        classification: out.report.classification,
        qfi_intervals: out.report.qfi_backflow_intervals.len(),
        energy_intervals: out.report.energy_backflow_intervals.len(),
        qfi_measure: total_measure(&out.report.qfi_backflow_intervals),
        energy_measure: total_measure(&out.report.energy_backflow_intervals),
        relation_residual: out.relation.residual,
        overlap: overlap_correlation(&out.report),
    })
}

/// Runs every sweep point on at most `threads` workers (all cores when
/// `None`). Rows come back in product order.
pub fn run_sweep(cfg: &ScenarioConfig, threads: Option<usize>) -> Result<Vec<SweepRow>, SweepError> {
    let sweep = cfg.sweep.as_ref().ok_or(SweepError::MissingSweep)?;
    let names: Vec<&String> = sweep.keys().collect();
    let points = product(sweep);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| SweepError::Pool(e.to_string()))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, values)| SweepRow {
                index,
                values: values.clone(),
                result: run_point(cfg, &names, values),
            })
            .collect()
    });
    Ok(rows)
}
