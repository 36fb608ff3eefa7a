//! Model pipelines: trajectory, interval report and optional oracle checks.

use std::f64::consts::FRAC_PI_2;

use nmflow_core::analysis::{
    detect_intervals, overlap_correlation, overlap_correlation_within, positive_population_window,
    sign_lock_violations, verify_relation, Model, RelationReport,
};
use nmflow_core::dynamics::{integrate, jc_oracle, TimeLocalGenerator};
use nmflow_core::jc::{g_closed_form, g_volterra, g_zeros};
use nmflow_core::sbm::solve_sbm;
use nmflow_core::{
    BlochState, IntegratorConfig, IntervalReport, JcParams, SbmParams, SbmSolution, SpectralDensity, Trajectory,
};
use serde::Serialize;

use crate::config::{ModelConfig, OracleConfig, ScenarioConfig, VOLTERRA_HORIZON};

pub type Result<T> = nmflow_core::Result<T>;

/// Deviations of independent references from the primary trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    /// Max-norm Bloch-vector deviation of the integrated master equation.
    pub ode_max_abs: f64,
    pub ode_samples_compared: usize,
    /// Samples skipped inside guard bands around zeros of `G`.
    pub ode_samples_skipped: usize,
    pub ode_steps_accepted: usize,
    pub ode_steps_rejected: usize,
    /// Relation residual of the integrated trajectory with finite-difference `I_Q`.
    pub ode_relation_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volterra: Option<VolterraSummary>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolterraSummary {
    pub dt: f64,
    pub t_max: f64,
    pub max_abs: f64,
    /// Largest distance between matched zero crossings of `G`.
    pub zero_crossing_max_shift: Option<f64>,
    pub zero_crossings_matched: bool,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub trajectory: Trajectory,
    pub report: IntervalReport,
    pub relation: RelationReport<f64>,
    pub sign_lock_violations: usize,
    pub overlap: Option<f64>,
    pub overlap_positive_population: Option<f64>,
    pub oracle: Option<OracleSummary>,
    pub advisories: Vec<String>,
}

fn model_of(cfg: &ModelConfig) -> Model {
    match cfg {
        ModelConfig::Jc { .. } => Model::Jc,
        ModelConfig::Sbm { .. } => Model::Sbm,
    }
}

fn jc_params(cfg: &ModelConfig) -> Option<Result<JcParams>> {
    match *cfg {
        ModelConfig::Jc { omega0, gamma0, lambda } => Some(JcParams::new(omega0, gamma0, lambda)),
        ModelConfig::Sbm { .. } => None,
    }
}

fn sbm_params(cfg: &ModelConfig) -> Option<Result<(SbmParams, f64)>> {
    match *cfg {
        ModelConfig::Sbm {
            omega0,
            alpha,
            s,
            omega_c,
            temperature,
            step,
        } => Some(
            SpectralDensity::ohmic_family(alpha, s, omega_c)
                .and_then(|sd| SbmParams::new(omega0, sd, temperature))
                .map(|p| (p, step)),
        ),
        ModelConfig::Jc { .. } => None,
    }
}

fn integrator(o: &OracleConfig) -> IntegratorConfig {
    IntegratorConfig::default().with_tolerances(o.rel_tol, o.abs_tol)
}

/// Warnings about the validity of the model at the configured parameters.
pub fn advisories(cfg: &ScenarioConfig) -> Vec<String> {
    match sbm_params(&cfg.model) {
        Some(Ok((p, _))) => p.advisory().into_iter().collect(),
        _ => Vec::new(),
    }
}

/// Trajectory and analysis for `cfg`; runs the oracle when `with_oracle`.
pub fn execute(cfg: &ScenarioConfig, with_oracle: bool) -> Result<ScenarioOutcome> {
    let grid = cfg.grid.times();
    let advisories = advisories(cfg);
    let (trajectory, oracle) = match &cfg.model {
        m @ ModelConfig::Jc { .. } => {
            let p = jc_params(m).expect("jc model")?;
            let traj = Trajectory::from_jc(&p, &grid)?;
            let oracle = with_oracle
                .then(|| jc_oracle_summary(&p, &traj, &cfg.oracle))
                .transpose()?;
            (traj, oracle)
        }
        m @ ModelConfig::Sbm { .. } => {
            let (p, step) = sbm_params(m).expect("sbm model")?;
            let sol = solve_sbm(&p, cfg.grid.t_max, cfg.grid.n_samples, step)?;
            let traj = Trajectory::from_sbm(&sol)?;
            let oracle = with_oracle
                .then(|| sbm_oracle_summary(&sol, &traj, &cfg.oracle))
                .transpose()?;
            (traj, oracle)
        }
    };
    let report = detect_intervals(&trajectory, cfg.analysis.threshold)?;
    let model = model_of(&cfg.model);
    Ok(ScenarioOutcome {
        relation: verify_relation(&trajectory, model),
        sign_lock_violations: sign_lock_violations(&trajectory, model),
        overlap: overlap_correlation(&report),
        overlap_positive_population: overlap_correlation_within(&report, positive_population_window(&report)),
        trajectory,
        report,
        oracle,
        advisories,
    })
}

fn jc_oracle_summary(p: &JcParams, traj: &Trajectory, o: &OracleConfig) -> Result<OracleSummary> {
    let guard = o.guard.unwrap_or(1e-2 / p.lambda);
    let states = jc_oracle(p, FRAC_PI_2, &traj.t, &integrator(o), guard)?;
    let mut max_abs = 0.0_f64;
    let mut compared = 0;
    for (ode, exact) in states.iter().zip(&traj.bloch) {
        if let Some(b) = ode {
            max_abs = max_abs.max(b.max_abs_diff(exact));
            compared += 1;
        }
    }
    // relation check on an unsegmented integration up to the first zero of G
    let t_max = *traj.t.last().expect("non-empty grid");
    let first_zero = g_zeros(p, t_max).first().copied().unwrap_or(f64::INFINITY);
    let head: Vec<f64> = traj.t.iter().copied().take_while(|&t| t < first_zero - guard).collect();
    let (relation, accepted, rejected) = if head.len() >= 3 {
        let sol = integrate(
            &TimeLocalGenerator::jaynes_cummings(*p),
            traj.bloch[0],
            &head,
            &integrator(o),
        )?;
        let ode = Trajectory::from_ode(Model::Jc, p.omega0, &sol, |b: &BlochState| {
            b.x() * b.x() + b.y() * b.y()
        })?;
        (
            verify_relation(&ode, Model::Jc).residual,
            sol.stats.accepted,
            sol.stats.rejected,
        )
    } else {
        (0.0, 0, 0)
    };

    let dt = o.volterra_dt.unwrap_or(1e-3 / p.lambda);
    let v_max = o.volterra_t_max.unwrap_or(VOLTERRA_HORIZON / p.lambda).min(t_max);
    let vol = g_volterra(p, v_max, dt)?;
    let mut v_abs = 0.0_f64;
    for (i, g) in vol.g.iter().enumerate() {
        v_abs = v_abs.max((g - g_closed_form(p, vol.time(i))?.g).abs());
    }
    let numeric = vol.zero_crossings();
    let exact = g_zeros(p, vol.time(vol.g.len() - 1));
    let matched = numeric.len() == exact.len();
    let shift = matched
        .then(|| {
            numeric
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))))
        })
        .flatten();
    let volterra = VolterraSummary {
        dt,
        t_max: v_max,
        max_abs: v_abs,
        zero_crossing_max_shift: shift,
        zero_crossings_matched: matched && shift.is_none_or(|s| s <= dt),
    };
    let pass = max_abs < o.tolerance && volterra.max_abs < o.tolerance && volterra.zero_crossings_matched;
    Ok(OracleSummary {
        ode_max_abs: max_abs,
        ode_samples_compared: compared,
        ode_samples_skipped: states.len() - compared,
        ode_steps_accepted: accepted,
        ode_steps_rejected: rejected,
        ode_relation_residual: relation,
        volterra: Some(volterra),
        tolerance: o.tolerance,
        pass,
    })
}

fn sbm_oracle_summary(sol: &SbmSolution, traj: &Trajectory, o: &OracleConfig) -> Result<OracleSummary> {
    let gen = TimeLocalGenerator::spin_boson(
        sol.omega0,
        |t| sol.rates_at(t).gamma_plus,
        |t| sol.rates_at(t).gamma_minus,
    );
    let ode = integrate(&gen, traj.bloch[0], &traj.t, &integrator(o))?;
    let max_abs = ode
        .states
        .iter()
        .zip(&traj.bloch)
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max);
    let ode_traj = Trajectory::from_ode(Model::Sbm, sol.omega0, &ode, |b: &BlochState| b.norm_sq())?;
    Ok(OracleSummary {
        ode_max_abs: max_abs,
        ode_samples_compared: traj.len(),
        ode_samples_skipped: 0,
        ode_steps_accepted: ode.stats.accepted,
        ode_steps_rejected: ode.stats.rejected,
        ode_relation_residual: verify_relation(&ode_traj, Model::Sbm).residual,
        volterra: None,
        tolerance: o.tolerance,
        pass: max_abs < o.tolerance,
    })
}

/// Pass bound on the analytic relation residual.
pub fn relation_tolerance(model: &ModelConfig) -> f64 {
    match model {
        ModelConfig::Jc { .. } => 1e-12,
        ModelConfig::Sbm { .. } => 1e-8,
    }
}
