//! Run configuration: a sectioned TOML document.
//!
//! ```toml
//! [model]
//! a = 2.0
//! x0 = 0.0
//! sigma_w = 1.0
//! jump_family = "compound_poisson"   # none | compound_poisson | gamma
//! lambda = 1.0                       # compound_poisson
//! height_std = 1.4142135623730951    # compound_poisson
//! # c = 0.5                          # gamma
//! # rate = 1.0                       # gamma
//! stationary_start = false
//! gamma_substeps = 8
//!
//! [grid]                             # exactly two of T, n, dt
//! T = 20.0
//! n = 2000
//!
//! [filter]
//! mode = "exponent"                  # exponent | absolute | off
//! beta = 0.3                         # exponent
//! # v = 0.25                         # absolute
//!
//! [mc]
//! replications = 100
//! seed = 1
//! estimators = ["filtered_mle", "oracle_mle", "lse"]
//!
//! [[rows]]                           # optional, used by `table`
//! a = 5.0
//! lambda = 5.0
//! T = 20.0
//! n = 2000
//! ```
//!
//! Every value is re-validated when the domain types are built; errors carry
//! the dotted field path.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::estimators::{EstimatorKind, FilterSpec};
use crate::levy::{JumpFamily, LevyModel};
use crate::monte_carlo::McConfig;
use crate::ou::{ObservationGrid, OuModel, StartMode, DEFAULT_GAMMA_SUBSTEPS};

/// A configuration error tied to a field path such as `filter.beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub msg: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, msg: impl Into<String>) -> Self {
        ConfigError { path: path.into(), msg: msg.into() }
    }

    fn within(mut self, prefix: &str) -> Self {
        self.path = format!("{prefix}.{}", self.path);
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.msg)
    }
}

impl std::error::Error for ConfigError {}

type CfgResult<T> = std::result::Result<T, ConfigError>;

fn default_family() -> String {
    "none".into()
}

fn default_mode() -> String {
    "exponent".into()
}

fn default_replications() -> u64 {
    100
}

fn default_estimators() -> Vec<String> {
    vec![EstimatorKind::FilteredMle.as_str().into()]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub a: f64,
    #[serde(default)]
    pub x0: f64,
    pub sigma_w: f64,
    #[serde(default = "default_family")]
    pub jump_family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default)]
    pub stationary_start: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_substeps: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
}

impl Default for FilterSection {
    fn default() -> Self {
        FilterSection { mode: default_mode(), beta: None, v: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<String>,
}

impl Default for McSection {
    fn default() -> Self {
        McSection { replications: default_replications(), seed: 0, estimators: default_estimators() }
    }
}

/// Per-row overrides for table reproduction. Any grid field replaces the
/// base grid as a whole.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<RowOverride>,
}

impl RunConfig {
    /// Parse and fully validate a configuration document.
    pub fn parse(text: &str) -> CfgResult<Self> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| ConfigError::new("<document>", e.to_string().trim_end().to_string()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().message().to_string();
            ConfigError::new(if path == "." { "<document>".into() } else { path }, inner)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML text; re-parses to an equal configuration.
    pub fn to_toml(&self) -> CfgResult<String> {
        toml::to_string(self).map_err(|e| ConfigError::new("<document>", e.to_string()))
    }

    pub fn validate(&self) -> CfgResult<()> {
        self.model()?;
        self.grid()?;
        self.filter()?;
        self.estimators()?;
        if self.mc.replications == 0 {
            return Err(ConfigError::new("mc.replications", "must be >= 1"));
        }
        for (i, _) in self.rows.iter().enumerate() {
            self.row(i)?;
        }
        Ok(())
    }

    pub fn model(&self) -> CfgResult<OuModel> {
        build_model(&self.model).map_err(|e| e.within("model"))
    }

    pub fn grid(&self) -> CfgResult<ObservationGrid> {
        build_grid(&self.grid).map_err(|e| e.within("grid"))
    }

    pub fn filter(&self) -> CfgResult<FilterSpec> {
        build_filter(&self.filter).map_err(|e| e.within("filter"))
    }

    pub fn estimators(&self) -> CfgResult<Vec<EstimatorKind>> {
        if self.mc.estimators.is_empty() {
            return Err(ConfigError::new("mc.estimators", "must name at least one estimator"));
        }
        self.mc
            .estimators
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.parse::<EstimatorKind>()
                    .map_err(|e| ConfigError::new(format!("mc.estimators[{i}]"), e.to_string()))
            })
            .collect()
    }

    /// Monte Carlo campaign for this configuration, optionally overriding the seed.
    pub fn mc_config(&self, seed: Option<u64>) -> CfgResult<McConfig> {
        Ok(McConfig {
            model: self.model()?,
            grid: self.grid()?,
            filter: self.filter()?,
            replications: self.mc.replications,
            seed: seed.unwrap_or(self.mc.seed),
            estimators: self.estimators()?,
        })
    }

    /// Base configuration with row `i` applied (rows themselves cleared).
    pub fn row(&self, i: usize) -> CfgResult<RunConfig> {
        let r = &self.rows[i];
        let mut out = RunConfig { rows: Vec::new(), ..self.clone() };
        let m = &mut out.model;
        m.a = r.a.unwrap_or(m.a);
        m.sigma_w = r.sigma_w.unwrap_or(m.sigma_w);
        m.lambda = r.lambda.or(m.lambda);
        m.height_std = r.height_std.or(m.height_std);
        m.c = r.c.or(m.c);
        m.rate = r.rate.or(m.rate);
        if r.horizon.is_some() || r.n.is_some() || r.dt.is_some() {
            out.grid = GridSection { horizon: r.horizon, n: r.n, dt: r.dt };
        }
        if let Some(reps) = r.replications {
            out.mc.replications = reps;
        }
        out.validate().map_err(|e| e.within(&format!("rows[{i}]")))?;
        Ok(out)
    }

    /// The configurations `table` runs: each row, or the base when no rows exist.
    pub fn table_rows(&self) -> CfgResult<Vec<RunConfig>> {
        if self.rows.is_empty() {
            Ok(vec![self.clone()])
        } else {
            (0..self.rows.len()).map(|i| self.row(i)).collect()
        }
    }
}

fn require(v: Option<f64>, field: &str, family: &str) -> CfgResult<f64> {
    v.ok_or_else(|| ConfigError::new(field, format!("required for jump_family = \"{family}\"")))
}

fn reject(v: Option<f64>, field: &str, family: &str) -> CfgResult<()> {
    match v {
        Some(_) => Err(ConfigError::new(field, format!("not used by jump_family = \"{family}\""))),
        None => Ok(()),
    }
}

fn positive(v: f64, field: &str) -> CfgResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be a positive number, got {v}")))
    }
}

fn build_model(m: &ModelSection) -> CfgResult<OuModel> {
    let family = m.jump_family.as_str();
    let jumps = match family {
        "none" => {
            for (v, f) in [(m.lambda, "lambda"), (m.height_std, "height_std"), (m.c, "c"), (m.rate, "rate")] {
                reject(v, f, family)?;
            }
            JumpFamily::None
        }
        "compound_poisson" => {
            reject(m.c, "c", family)?;
            reject(m.rate, "rate", family)?;
            JumpFamily::CompoundPoisson {
                intensity: positive(require(m.lambda, "lambda", family)?, "lambda")?,
                height_std: positive(require(m.height_std, "height_std", family)?, "height_std")?,
            }
        }
        "gamma" => {
            reject(m.lambda, "lambda", family)?;
            reject(m.height_std, "height_std", family)?;
            JumpFamily::Gamma {
                c: positive(require(m.c, "c", family)?, "c")?,
                rate: positive(require(m.rate, "rate", family)?, "rate")?,
            }
        }
        other => {
            return Err(ConfigError::new(
                "jump_family",
                format!("unknown family {other:?} (expected none, compound_poisson or gamma)"),
            ))
        }
    };
    if !(m.sigma_w.is_finite() && m.sigma_w >= 0.0) {
        return Err(ConfigError::new("sigma_w", format!("must be >= 0, got {}", m.sigma_w)));
    }
    let levy = LevyModel::new(m.sigma_w, jumps).map_err(|e| ConfigError::new("sigma_w", e.to_string()))?;
    positive(m.a, "a")?;
    if !m.x0.is_finite() {
        return Err(ConfigError::new("x0", "must be finite"));
    }
    let start = if m.stationary_start { StartMode::Stationary } else { StartMode::Fixed };
    let model = OuModel::new(m.a, m.x0, levy)
        .map_err(|e| ConfigError::new("a", e.to_string()))?
        .with_start(start);
    match m.gamma_substeps {
        Some(0) => Err(ConfigError::new("gamma_substeps", "must be >= 1")),
        Some(k) => Ok(model.with_gamma_substeps(k).expect("checked")),
        None => Ok(model.with_gamma_substeps(DEFAULT_GAMMA_SUBSTEPS).expect("default")),
    }
}

fn build_grid(g: &GridSection) -> CfgResult<ObservationGrid> {
    let grid = match (g.horizon, g.n, g.dt) {
        (Some(t), Some(n), None) => {
            positive(t, "T")?;
            ObservationGrid::from_horizon(t, n)
        }
        (None, Some(n), Some(dt)) => {
            positive(dt, "dt")?;
            ObservationGrid::new(n, dt)
        }
        (Some(t), None, Some(dt)) => {
            positive(t, "T")?;
            positive(dt, "dt")?;
            let n = (t / dt).round();
            if n > usize::MAX as f64 / 2.0 {
                return Err(ConfigError::new("dt", "too many grid points"));
            }
            ObservationGrid::new(n as usize, dt)
        }
        _ => return Err(ConfigError::new("<section>", "give exactly two of T, n, dt")),
    };
    grid.map_err(|e| ConfigError::new("n", e.to_string()))
}

fn build_filter(f: &FilterSection) -> CfgResult<FilterSpec> {
    match f.mode.as_str() {
        "exponent" => {
            if f.v.is_some() {
                return Err(ConfigError::new("v", "not used by mode = \"exponent\""));
            }
            let beta = f.beta.unwrap_or(crate::estimators::DEFAULT_BETA);
            FilterSpec::exponent(beta).map_err(|_| {
                ConfigError::new("beta", format!("must lie in the open interval (0, 0.5), got {beta}"))
            })
        }
        "absolute" => {
            if f.beta.is_some() {
                return Err(ConfigError::new("beta", "not used by mode = \"absolute\""));
            }
            let v = f.v.ok_or_else(|| ConfigError::new("v", "required for mode = \"absolute\""))?;
            FilterSpec::absolute(v).map_err(|_| ConfigError::new("v", format!("must be positive, got {v}")))
        }
        "off" => {
            if f.beta.is_some() || f.v.is_some() {
                return Err(ConfigError::new("mode", "\"off\" takes neither beta nor v"));
            }
            Ok(FilterSpec::Off)
        }
        other => Err(ConfigError::new(
            "mode",
            format!("unknown mode {other:?} (expected exponent, absolute or off)"),
        )),
    }
}
