//! TOML run configuration.

use serde::{Deserialize, Serialize};
use summax::{Axis, ContinuousFamily, ContinuousModel, DiscreteFamily, DiscreteModel, Variable};
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Problems with the configuration itself; the binary exits with code 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("variables[{index}]: {source}")]
    Variable { index: usize, source: summax::Error },
    #[error("{field}: {message}")]
    Field { field: &'static str, message: String },
    #[error("mixed kinds unsupported for {task}")]
    MixedKinds { task: Task },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Cdf,
    Pdf,
    Pmf,
    Papr,
    Marginal,
    Conditional,
    Moments,
    Validate,
    Sample,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Task::Cdf => "cdf",
            Task::Pdf => "pdf",
            Task::Pmf => "pmf",
            Task::Papr => "papr",
            Task::Marginal => "marginal",
            Task::Conditional => "conditional",
            Task::Moments => "moments",
            Task::Validate => "validate",
            Task::Sample => "sample",
        };
        f.write_str(s)
    }
}

/// One input variable. The family parameters sit next to `kind` and `family`:
///
/// ```toml
/// [[variables]]
/// kind = "continuous"
/// family = "gamma"
/// shape = 2.0
/// rate = 1.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableSpec {
    Continuous {
        #[serde(flatten)]
        family: ContinuousFamily,
        /// The variable is `X - shift`.
        #[serde(default, skip_serializing_if = "is_zero")]
        shift: f64,
    },
    Discrete {
        #[serde(flatten)]
        family: DiscreteFamily,
        #[serde(default, skip_serializing_if = "is_zero_u64")]
        shift: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncation_epsilon: Option<f64>,
    },
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn is_zero_u64(v: &u64) -> bool {
    *v == 0
}

impl VariableSpec {
    pub fn build(&self) -> summax::Result<Variable> {
        Ok(match self {
            VariableSpec::Continuous { family, shift } => {
                Variable::Continuous(ContinuousModel::new(family.clone())?.with_shift(*shift)?)
            }
            VariableSpec::Discrete {
                family,
                shift,
                truncation_epsilon,
            } => {
                let m = match truncation_epsilon {
                    Some(eps) => DiscreteModel::with_truncation(family.clone(), *eps)?,
                    None => DiscreteModel::new(family.clone())?,
                };
                Variable::Discrete(m.with_shift(*shift))
            }
        })
    }
}

/// Grid overrides; the extents default to the `epsilon` support quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_points")]
    pub n_y: usize,
    #[serde(default = "default_points")]
    pub n_z: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_y: DEFAULT_GRID_POINTS,
            n_z: DEFAULT_GRID_POINTS,
            y_max: None,
            z_max: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    /// `(y, z)` evaluation points; `(l, m)` for pmf.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// `[a, b]` for `E(Y^a Z^b)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    /// Conditioning value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Slice resolution for continuous conditionals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Entrywise bound for exact (discrete) comparisons.
    #[serde(default = "default_absolute")]
    pub absolute: f64,
    /// Monte Carlo comparisons allow `sigma` standard errors plus `budget`.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_budget")]
    pub budget: f64,
}

fn default_absolute() -> f64 {
    1e-12
}

fn default_sigma() -> f64 {
    3.0
}

fn default_budget() -> f64 {
    5e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            absolute: default_absolute(),
            sigma: default_sigma(),
            budget: default_budget(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub variables: Vec<VariableSpec>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub query: Query,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerance: Tolerances,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }

    /// Builds the models; errors name the offending entry.
    pub fn build_variables(&self) -> Result<Vec<Variable>, ConfigError> {
        self.variables
            .iter()
            .enumerate()
            .map(|(index, v)| v.build().map_err(|source| ConfigError::Variable { index, source }))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.variables.is_empty() {
            return Err(field("variables", "at least one variable is required"));
        }
        let vars = self.build_variables()?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(field("epsilon", format!("must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.grid.n_y < 16 || self.grid.n_z < 16 {
            return Err(field("grid", "n_y and n_z must be at least 16"));
        }
        for (name, v) in [("grid.y_max", self.grid.y_max), ("grid.z_max", self.grid.z_max)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(field(name, format!("must be positive, got {v}")));
                }
            }
        }

        let discrete = vars.iter().filter(|v| v.is_discrete()).count();
        let mixed = discrete > 0 && discrete < vars.len();
        if mixed && self.task != Task::Cdf {
            return Err(ConfigError::MixedKinds { task: self.task });
        }
        let all_discrete = discrete == vars.len();
        let shifted = self.variables.iter().any(|v| match v {
            VariableSpec::Continuous { shift, .. } => *shift != 0.0,
            VariableSpec::Discrete { shift, .. } => *shift != 0,
        });
        let q = &self.query;

        match self.task {
            Task::Cdf | Task::Sample | Task::Validate => {}
            Task::Pdf => {
                if all_discrete {
                    return Err(field("task", "pdf needs continuous variables; use pmf"));
                }
                if vars.len() < 2 {
                    return Err(field("variables", "pdf needs at least two variables"));
                }
            }
            Task::Pmf => {
                if !all_discrete {
                    return Err(field("task", "pmf needs discrete variables; use pdf"));
                }
            }
            Task::Papr | Task::Marginal | Task::Conditional | Task::Moments => {
                if shifted {
                    return Err(field("variables", format!("{} needs unshifted variables", self.task)));
                }
                if !all_discrete && vars.len() < 2 && self.task != Task::Papr {
                    return Err(field("variables", format!("{} needs at least two continuous variables", self.task)));
                }
            }
        }
        match self.task {
            Task::Papr => {
                let (a, b) = (
                    q.alpha.ok_or_else(|| field("query.alpha", "required for papr"))?,
                    q.beta.ok_or_else(|| field("query.beta", "required for papr"))?,
                );
                summax::PaprQuery::new(a, b, vars.len()).map_err(|e| field("query", e.to_string()))?;
            }
            Task::Marginal => {
                q.axis.ok_or_else(|| field("query.axis", "required for marginal"))?;
            }
            Task::Conditional => {
                q.axis.ok_or_else(|| field("query.axis", "required for conditional"))?;
                q.value.ok_or_else(|| field("query.value", "required for conditional"))?;
                if q.resolution.is_some_and(|r| r < 2) {
                    return Err(field("query.resolution", "must be at least 2"));
                }
            }
            Task::Moments => {
                q.exponents.ok_or_else(|| field("query.exponents", "required for moments"))?;
            }
            Task::Pmf => {
                for p in &q.points {
                    if p.iter().any(|c| c.fract() != 0.0 || !c.is_finite()) {
                        return Err(field("query.points", format!("pmf points must be integers, got {p:?}")));
                    }
                }
            }
            Task::Cdf | Task::Pdf => {
                if shifted && q.points.is_empty() {
                    return Err(field("query.points", "required when variables are shifted"));
                }
            }
            Task::Sample => {
                if q.samples == Some(0) {
                    return Err(field("query.samples", "must be positive"));
                }
            }
            Task::Validate => {}
        }
        if q.points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(field("query.points", "coordinates must be finite"));
        }
        Ok(())
    }
}
