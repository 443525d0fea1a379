//! Experiment configuration: TOML or JSON, unknown keys rejected, rationals as `"p/q"`.
//! [`ExperimentConfig::resolve`] fills every default so a report can embed the complete
//! configuration it ran with.

use std::fmt;
use std::path::Path;

use num::Zero;
use serde::{Deserialize, Serialize};

use schauder_core::expansion::CoefficientTermJson;
use schauder_core::fdsolver::{BarrierKind, Scheme};
use schauder_core::operator::OperatorSpec;
use schauder_core::rational::{q_int, Exp};
use schauder_core::spoly::{Gamma, TermJson};
use schauder_core::verify::{default_radii, CubeGeometry, DEFAULT_SAMPLES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    OracleCheck,
    Expand,
    Solve,
    Fit,
    Maxprin,
    Growth,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::OracleCheck => "oracle-check",
            Kind::Expand => "expand",
            Kind::Solve => "solve",
            Kind::Fit => "fit",
            Kind::Maxprin => "maxprin",
            Kind::Growth => "growth",
        };
        f.write_str(s)
    }
}

/// Grid function data: `"zero"`, `"model_oracle"`, a rational constant, or SPoly terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    Named(String),
    Terms(Vec<TermJson>),
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Named("zero".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dims: usize,
    pub k: usize,
    pub k_tangential: usize,
    pub steps: usize,
    pub horizon: String,
    pub scheme: Scheme,
    pub keep_every: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dims: 1, k: 128, k_tangential: 16, steps: 256, horizon: "1/2".into(), scheme: Scheme::ImplicitEuler, keep_every: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub forcing: DataSpec,
    pub initial: DataSpec,
    pub boundary: DataSpec,
    /// Exact solution to compare against, if known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<DataSpec>,
    /// Physical time of the first mesh level; the mesh covers `[t0, t0 + T]`.
    pub time_origin: String,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { forcing: DataSpec::default(), initial: DataSpec::default(), boundary: DataSpec::default(), exact: None, time_origin: "0".into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionMode {
    Particular,
    Interior,
    Hierarchy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpansionConfig {
    pub mode: ExpansionMode,
    /// Order of the particular solution.
    pub kappa: String,
    /// Forcing `f` as SPoly terms; the particular solution only.
    pub forcing: Vec<TermJson>,
    /// `U0(x', t)`; interior and hierarchy modes.
    pub u0: Vec<CoefficientTermJson>,
    pub m: u32,
    pub n: u32,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            mode: ExpansionMode::Particular,
            kappa: "5/2".into(),
            forcing: vec![TermJson { beta: vec![], e: Exp::zero(), log: 0, t: 0, coeff: q_int(1) }],
            u0: vec![CoefficientTermJson { beta: vec![], t: 0, coeff: q_int(1) }],
            m: 1,
            n: 3,
        }
    }
}

/// What `u` is in a fit experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitSource {
    /// Use `rows` as given.
    Rows,
    ModelOracle,
    /// The FD solution of the configured problem.
    Fd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub source: FitSource,
    /// `(r, sup_deviation)` pairs for `source = "rows"`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<[f64; 2]>,
    /// `"model_candidate"`, `"zero"`, or SPoly terms.
    pub candidate: DataSpec,
    pub radii: Vec<f64>,
    pub geometry: CubeGeometry,
    pub samples: usize,
    /// `(x_n, t)` of the center; tangential coordinates are zero.
    pub center: [f64; 2],
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            source: FitSource::ModelOracle,
            rows: vec![],
            candidate: DataSpec::Named("model_candidate".into()),
            radii: default_radii(),
            geometry: CubeGeometry::Parabolic,
            samples: DEFAULT_SAMPLES,
            center: [0.0, 0.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthConfig {
    /// Levels `x_n = 2^{−j/σ}`.
    pub levels_j: Vec<i32>,
    pub samples: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self { levels_j: (2..=7).collect(), samples: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaxprinConfig {
    pub barriers: Vec<BarrierKind>,
    pub barrier_samples: usize,
}

impl Default for MaxprinConfig {
    fn default() -> Self {
        Self { barriers: vec![], barrier_samples: 200 }
    }
}

/// Declared checks; the experiment exits 1 if any fails.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_zero: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_threshold: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_matrix: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_principle: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonpositive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barriers: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_max: Option<f64>,
    /// Finest over coarsest growth ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_growth: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Gamma>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<ExpansionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxprin: Option<MaxprinConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assertions: Option<Assertions>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Gamma>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub experiments: Vec<ExperimentConfig>,
}

/// Carried through `anyhow` to `main`, which maps it to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Reads TOML or JSON by extension (JSON also when the extension is unknown and the
/// text starts with `{`). A `report.json` is accepted too: its embedded `config` is used.
pub fn load_value(path: &Path) -> anyhow::Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e == "toml") || (path.extension().is_none_or(|e| e != "json") && !text.trim_start().starts_with('{'));
    let value: serde_json::Value = if is_toml {
        let t: toml::Table = toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t).map_err(|e| config_error(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?
    };
    match value {
        serde_json::Value::Object(ref m) if m.contains_key("config") && m.contains_key("results") => Ok(m["config"].clone()),
        v => Ok(v),
    }
}

pub fn parse<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> anyhow::Result<T> {
    serde_json::from_value(value).map_err(|e| config_error(e.to_string()))
}

impl ExperimentConfig {
    /// Fills every default for `kind`; the result is what runs and what the report embeds.
    pub fn resolve(mut self, kind: Kind, gamma: Option<Gamma>, seed: Option<u64>) -> anyhow::Result<Self> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(config_error(format!("config kind {k} does not match subcommand {kind}")));
            }
        }
        self.kind = Some(kind);
        if let Some(g) = gamma {
            self.gamma = Some(g);
        }
        self.gamma = Some(self.gamma.ok_or_else(|| config_error("gamma is not set (use --gamma or `gamma` in the config)"))?);
        if let Some(s) = seed {
            self.seed = Some(s);
        }
        self.seed.get_or_insert(0);
        let needs_problem = matches!(kind, Kind::Solve | Kind::Maxprin | Kind::Growth)
            || (kind == Kind::Fit && self.fit.as_ref().is_some_and(|f| f.source == FitSource::Fd));
        if needs_problem || kind == Kind::Expand {
            self.operator.get_or_insert_with(|| OperatorSpec::builtin("model_1d"));
        }
        if needs_problem {
            self.grid.get_or_insert_with(GridConfig::default);
            self.data.get_or_insert_with(|| match kind {
                // Zero data would make every ratio 0/0; unit forcing is the standard growth probe.
                Kind::Growth => DataConfig { forcing: DataSpec::Named("1".into()), ..DataConfig::default() },
                _ => DataConfig::default(),
            });
        }
        let a = self.assertions.get_or_insert_with(Assertions::default);
        match kind {
            Kind::OracleCheck => {
                a.residual_zero.get_or_insert(true);
            }
            Kind::Expand => {
                self.expansion.get_or_insert_with(ExpansionConfig::default);
                a.residual_threshold.get_or_insert(true);
            }
            Kind::Solve => {
                a.m_matrix.get_or_insert(true);
            }
            Kind::Fit => {
                self.fit.get_or_insert_with(FitConfig::default);
            }
            Kind::Maxprin => {
                self.maxprin.get_or_insert_with(MaxprinConfig::default);
                a.m_matrix.get_or_insert(true);
                a.max_principle.get_or_insert(true);
                a.nonpositive.get_or_insert(true);
                a.barriers.get_or_insert(true);
            }
            Kind::Growth => {
                self.growth.get_or_insert_with(GrowthConfig::default);
                a.max_growth.get_or_insert(2.0);
            }
        }
        Ok(self)
    }
}
