//! Scenario configuration: TOML input with line-anchored validation errors,
//! and the resolved form embedded in every report.

use std::fmt;
use std::ops::Range;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

pub const MIN_SAMPLES: usize = 16;
pub const DEFAULT_THRESHOLD: f64 = nmflow_core::analysis::DEFAULT_THRESHOLD;
pub const DEFAULT_ORACLE_TOLERANCE: f64 = 1e-6;
/// Longest Volterra reference horizon in units of `1/lambda`.
pub const VOLTERRA_HORIZON: f64 = 20.0;

/// Invalid configuration, anchored to a position in the source when known.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub source_name: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{}:{}: {}", self.source_name, l, c, self.message),
            (Some(l), None) => write!(f, "{}:{}: {}", self.source_name, l, self.message),
            _ => write!(f, "{}: {}", self.source_name, self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Jc {
        omega0: f64,
        gamma0: f64,
        lambda: f64,
    },
    Sbm {
        omega0: f64,
        alpha: f64,
        s: f64,
        omega_c: f64,
        temperature: f64,
        /// Largest internal step of the rate integration.
        step: f64,
    },
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Jc { .. } => "jc",
            ModelConfig::Sbm { .. } => "sbm",
        }
    }

    /// Sweepable parameter names for this model, in declaration order.
    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            ModelConfig::Jc { .. } => &["omega0", "gamma0", "lambda"],
            ModelConfig::Sbm { .. } => &["omega0", "alpha", "s", "omega_c", "temperature", "step"],
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match *self {
            ModelConfig::Jc { omega0, gamma0, lambda } => match name {
                "omega0" => Some(omega0),
                "gamma0" => Some(gamma0),
                "lambda" => Some(lambda),
                _ => None,
            },
            ModelConfig::Sbm {
                omega0,
                alpha,
                s,
                omega_c,
                temperature,
                step,
            } => match name {
                "omega0" => Some(omega0),
                "alpha" => Some(alpha),
                "s" => Some(s),
                "omega_c" => Some(omega_c),
                "temperature" => Some(temperature),
                "step" => Some(step),
                _ => None,
            },
        }
    }

    /// Copy with `name` replaced; `None` if the model has no such parameter.
    pub fn with(&self, name: &str, value: f64) -> Option<Self> {
        let mut out = *self;
        let slot = match &mut out {
            ModelConfig::Jc { omega0, gamma0, lambda } => match name {
                "omega0" => omega0,
                "gamma0" => gamma0,
                "lambda" => lambda,
                _ => return None,
            },
            ModelConfig::Sbm {
                omega0,
                alpha,
                s,
                omega_c,
                temperature,
                step,
            } => match name {
                "omega0" => omega0,
                "alpha" => alpha,
                "s" => s,
                "omega_c" => omega_c,
                "temperature" => temperature,
                "step" => step,
                _ => return None,
            },
        };
        *slot = value;
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub n_samples: usize,
}

impl GridConfig {
    pub fn times(&self) -> Vec<f64> {
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples).map(|i| self.t_max * i as f64 / last).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub enabled: bool,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Pass bound on the max-norm deviation from the reference.
    pub tolerance: f64,
    /// Half-width of the excluded band around zeros of `G` (Jaynes-Cummings).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub guard: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub volterra_dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub volterra_t_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub trajectory_csv: String,
    pub report_json: String,
    pub sweep_csv: String,
}

/// Parameter ranges; points are the cartesian product in key order with the
/// last key varying fastest.
pub type SweepConfig = IndexMap<String, Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub analysis: AnalysisConfig,
    pub oracle: OracleConfig,
    pub outputs: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<SweepConfig>,
}

impl ScenarioConfig {
    /// Reads a `.toml`/`.cfg` scenario, or the `config` object of a
    /// previously written `.json` report.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source_name: name.clone(),
            line: None,
            column: None,
            message: format!("cannot read config: {e}"),
        })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_report_json(&text, &name, stem)
        } else {
            Self::parse(&text, &name, stem)
        }
    }

    /// Parses TOML text. `stem` names default output files.
    pub fn parse(text: &str, source_name: &str, stem: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map(|s| line_col(text, s.start)).unzip();
            ConfigError {
                source_name: source_name.to_string(),
                line,
                column,
                message: e.message().trim_end().to_string(),
            }
        })?;
        Resolver { text, source_name }.resolve(raw, stem)
    }

    fn from_report_json(text: &str, source_name: &str, stem: &str) -> Result<Self, ConfigError> {
        let err = |line, column, message: String| ConfigError {
            source_name: source_name.to_string(),
            line,
            column,
            message,
        };
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| err(Some(e.line()), Some(e.column()), e.to_string()))?;
        let Some(config) = value.get("config") else {
            return Err(err(None, None, "report has no `config` object".into()));
        };
        let toml_text = toml::to_string(config)
            .map_err(|e| err(None, None, format!("embedded config is not representable: {e}")))?;
        Self::parse(&toml_text, &format!("{source_name}#config"), stem)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved config serialises")
    }
}

type RawSweep = IndexMap<Spanned<String>, Spanned<Vec<Spanned<f64>>>>;

/// Keys set in the file that belong to another model kind.
type ForeignKeys<'a> = Vec<(&'static str, &'a Option<Spanned<f64>>)>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Spanned<RawModel>,
    grid: Spanned<RawGrid>,
    analysis: Option<RawAnalysis>,
    oracle: Option<RawOracle>,
    outputs: Option<RawOutputs>,
    sweep: Option<Spanned<RawSweep>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: Spanned<String>,
    omega0: Option<Spanned<f64>>,
    gamma0: Option<Spanned<f64>>,
    lambda: Option<Spanned<f64>>,
    alpha: Option<Spanned<f64>>,
    s: Option<Spanned<f64>>,
    omega_c: Option<Spanned<f64>>,
    temperature: Option<Spanned<f64>>,
    step: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_max: Option<Spanned<f64>>,
    n_samples: Option<Spanned<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    threshold: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    enabled: Option<bool>,
    rel_tol: Option<Spanned<f64>>,
    abs_tol: Option<Spanned<f64>>,
    tolerance: Option<Spanned<f64>>,
    guard: Option<Spanned<f64>>,
    volterra_dt: Option<Spanned<f64>>,
    volterra_t_max: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    trajectory_csv: Option<Spanned<String>>,
    report_json: Option<Spanned<String>>,
    sweep_csv: Option<Spanned<String>>,
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Resolver<'a> {
    text: &'a str,
    source_name: &'a str,
}

impl Resolver<'_> {
    fn error(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        let (line, column) = line_col(self.text, span.start);
        ConfigError {
            source_name: self.source_name.to_string(),
            line: Some(line),
            column: Some(column),
            message: message.into(),
        }
    }

    fn require(&self, v: &Option<Spanned<f64>>, name: &str, table: Range<usize>) -> Result<Spanned<f64>, ConfigError> {
        v.clone()
            .ok_or_else(|| self.error(table, format!("missing key `{name}`")))
    }

    fn positive(&self, v: &Spanned<f64>, name: &str) -> Result<f64, ConfigError> {
        let x = *v.get_ref();
        if x.is_finite() && x > 0.0 {
            Ok(x)
        } else {
            Err(self.error(v.span(), format!("`{name}` must be finite and > 0, got {x}")))
        }
    }

    fn non_negative(&self, v: &Spanned<f64>, name: &str) -> Result<f64, ConfigError> {
        let x = *v.get_ref();
        if x.is_finite() && x >= 0.0 {
            Ok(x)
        } else {
            Err(self.error(v.span(), format!("`{name}` must be finite and >= 0, got {x}")))
        }
    }

    fn optional_positive(&self, v: &Option<Spanned<f64>>, name: &str, default: f64) -> Result<f64, ConfigError> {
        v.as_ref().map_or(Ok(default), |v| self.positive(v, name))
    }

    fn resolve(&self, raw: RawConfig, stem: &str) -> Result<ScenarioConfig, ConfigError> {
        let model = self.model(&raw.model)?;
        let grid = self.grid(&raw.grid)?;

        let threshold = match raw.analysis.as_ref().and_then(|a| a.threshold.as_ref()) {
            Some(v) => self.non_negative(v, "threshold")?,
            None => DEFAULT_THRESHOLD,
        };

        let o = raw.oracle.unwrap_or(RawOracle {
            enabled: None,
            rel_tol: None,
            abs_tol: None,
            tolerance: None,
            guard: None,
            volterra_dt: None,
            volterra_t_max: None,
        });
        let jc_only = [
            ("guard", &o.guard),
            ("volterra_dt", &o.volterra_dt),
            ("volterra_t_max", &o.volterra_t_max),
        ];
        if let ModelConfig::Sbm { .. } = model {
            if let Some((name, Some(v))) = jc_only.iter().find(|(_, v)| v.is_some()) {
                return Err(self.error(v.span(), format!("oracle key `{name}` applies only to model \"jc\"")));
            }
        }
        let oracle = OracleConfig {
            enabled: o.enabled.unwrap_or(false),
            rel_tol: self.optional_positive(&o.rel_tol, "rel_tol", 1e-10)?,
            abs_tol: self.optional_positive(&o.abs_tol, "abs_tol", 1e-12)?,
            tolerance: self.optional_positive(&o.tolerance, "tolerance", DEFAULT_ORACLE_TOLERANCE)?,
            guard: o.guard.as_ref().map(|v| self.positive(v, "guard")).transpose()?,
            volterra_dt: o
                .volterra_dt
                .as_ref()
                .map(|v| self.positive(v, "volterra_dt"))
                .transpose()?,
            volterra_t_max: o
                .volterra_t_max
                .as_ref()
                .map(|v| self.positive(v, "volterra_t_max"))
                .transpose()?,
        };

        let out = raw.outputs.unwrap_or(RawOutputs {
            trajectory_csv: None,
            report_json: None,
            sweep_csv: None,
        });
        let path = |v: &Option<Spanned<String>>, default: String| -> Result<String, ConfigError> {
            match v {
                Some(s) if s.get_ref().trim().is_empty() => Err(self.error(s.span(), "output path is empty")),
                Some(s) => Ok(s.get_ref().clone()),
                None => Ok(default),
            }
        };
        let outputs = OutputConfig {
            trajectory_csv: path(&out.trajectory_csv, format!("{stem}.csv"))?,
            report_json: path(&out.report_json, format!("{stem}.report.json"))?,
            sweep_csv: path(&out.sweep_csv, format!("{stem}.sweep.csv"))?,
        };

        let sweep = raw.sweep.as_ref().map(|s| self.sweep(s, &model)).transpose()?;

        Ok(ScenarioConfig {
            model,
            grid,
            analysis: AnalysisConfig { threshold },
            oracle,
            outputs,
            sweep,
        })
    }

    fn model(&self, raw: &Spanned<RawModel>) -> Result<ModelConfig, ConfigError> {
        let span = raw.span();
        let m = raw.get_ref();
        let omega0 = self.optional_positive(&m.omega0, "omega0", 1.0)?;
        let (kind, foreign): (_, ForeignKeys) = match m.kind.get_ref().as_str() {
            "jc" => (
                "jc",
                vec![
                    ("alpha", &m.alpha),
                    ("s", &m.s),
                    ("omega_c", &m.omega_c),
                    ("temperature", &m.temperature),
                    ("step", &m.step),
                ],
            ),
            "sbm" => ("sbm", vec![("gamma0", &m.gamma0), ("lambda", &m.lambda)]),
            other => {
                return Err(self.error(
                    m.kind.span(),
                    format!("unknown model kind \"{other}\" (expected \"jc\" or \"sbm\")"),
                ))
            }
        };
        if let Some((name, Some(v))) = foreign.iter().find(|(_, v)| v.is_some()) {
            return Err(self.error(v.span(), format!("key `{name}` does not apply to model \"{kind}\"")));
        }
        Ok(if kind == "jc" {
            ModelConfig::Jc {
                omega0,
                gamma0: self.positive(&self.require(&m.gamma0, "gamma0", span.clone())?, "gamma0")?,
                lambda: self.positive(&self.require(&m.lambda, "lambda", span)?, "lambda")?,
            }
        } else {
            let s = self.positive(&self.require(&m.s, "s", span.clone())?, "s")?;
            ModelConfig::Sbm {
                omega0,
                alpha: self.positive(&self.require(&m.alpha, "alpha", span.clone())?, "alpha")?,
                s,
                omega_c: self.positive(&self.require(&m.omega_c, "omega_c", span.clone())?, "omega_c")?,
                temperature: self.non_negative(&self.require(&m.temperature, "temperature", span)?, "temperature")?,
                step: self.optional_positive(&m.step, "step", nmflow_core::sbm::DEFAULT_STEP)?,
            }
        })
    }

    fn grid(&self, raw: &Spanned<RawGrid>) -> Result<GridConfig, ConfigError> {
        let g = raw.get_ref();
        let t_max = self.positive(&self.require(&g.t_max, "t_max", raw.span())?, "t_max")?;
        let n = g
            .n_samples
            .as_ref()
            .ok_or_else(|| self.error(raw.span(), "missing key `n_samples`"))?;
        let n_samples = usize::try_from(*n.get_ref())
            .ok()
            .filter(|&n| n >= MIN_SAMPLES)
            .ok_or_else(|| {
                self.error(
                    n.span(),
                    format!("`n_samples` must be >= {MIN_SAMPLES}, got {}", n.get_ref()),
                )
            })?;
        Ok(GridConfig { t_max, n_samples })
    }

    #[allow(clippy::type_complexity)]
    fn sweep(
        &self,
        raw: &Spanned<IndexMap<Spanned<String>, Spanned<Vec<Spanned<f64>>>>>,
        model: &ModelConfig,
    ) -> Result<SweepConfig, ConfigError> {
        if raw.get_ref().is_empty() {
            return Err(self.error(raw.span(), "sweep table is empty"));
        }
        let mut out = IndexMap::new();
        for (key, values) in raw.get_ref() {
            let name = key.get_ref();
            if model.get(name).is_none() {
                return Err(self.error(
                    key.span(),
                    format!(
                        "`{name}` is not a parameter of model \"{}\" (expected one of {})",
                        model.kind(),
                        model.parameter_names().join(", ")
                    ),
                ));
            }
            if values.get_ref().is_empty() {
                return Err(self.error(values.span(), format!("sweep range `{name}` is empty")));
            }
            let resolved = values
                .get_ref()
                .iter()
                .map(|v| {
                    if v.get_ref().is_finite() {
                        Ok(*v.get_ref())
                    } else {
                        Err(self.error(v.span(), format!("sweep value for `{name}` must be finite")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.insert(name.clone(), resolved);
        }
        Ok(out)
    }
}
