//! TOML run configuration with strict keys and dotted-key overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{ExprError, Expression};
use crate::flow::{Mode, ProblemSpec, Tolerances};
use crate::hessfield::{BoundaryExpr, ChiSpec, DomainSpec};
use crate::symkernel::ConeOrder;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Parse(String),
    #[error("bad override `{0}`: expected key=value")]
    Override(String),
    #[error("config key `{key}`: {source}")]
    Expr { key: String, source: ExprError },
    #[error("config: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

fn default_seed() -> u64 {
    42
}

fn default_k() -> usize {
    2
}

fn zero_str() -> String {
    "0".into()
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub tolerances: TolConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsolution: Option<SubsolutionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compat: Option<CompatConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harnack: Option<HarnackConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Two-dimensional grid solve on the configured domain.
    #[default]
    Grid,
    /// One-dimensional solve for radially symmetric data on the disk.
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorConfig {
    #[serde(default = "zero_str")]
    pub xx: String,
    #[serde(default = "zero_str")]
    pub xy: String,
    #[serde(default = "zero_str")]
    pub yy: String,
}

impl TensorConfig {
    pub fn zero() -> Self {
        Self {
            xx: zero_str(),
            xy: zero_str(),
            yy: zero_str(),
        }
    }

    pub fn identity() -> Self {
        Self {
            xx: "1".into(),
            xy: zero_str(),
            yy: "1".into(),
        }
    }

    pub fn parse(&self, key: &str) -> Result<ChiSpec> {
        Ok(ChiSpec {
            xx: expr(&format!("{key}.xx"), &self.xx)?,
            xy: expr(&format!("{key}.xy"), &self.xy)?,
            yy: expr(&format!("{key}.yy"), &self.yy)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainSpec,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default = "TensorConfig::zero")]
    pub chi: TensorConfig,
    /// `a^{ij}` in linear mode.
    #[serde(default = "TensorConfig::identity")]
    pub coeffs: TensorConfig,
    #[serde(default = "zero_str")]
    pub psi: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub psi_t_rate: f64,
    #[serde(default = "zero_str")]
    pub phi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_west: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_east: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_south: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_north: Option<String>,
    pub u0: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_c: Option<f64>,
    pub dt_safety: f64,
    pub dt_min: f64,
    pub max_steps: u64,
    pub monitor_every: u64,
    pub pole_filter: bool,
    /// Evolve to this time instead of running to convergence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Allowed growth of `osc u` over its initial value.
    pub osc_budget: f64,
}

impl Default for TolConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            tol_c: t.tol_c,
            dt_safety: t.dt_safety,
            dt_min: t.dt_min,
            max_steps: t.max_steps,
            monitor_every: t.monitor_every,
            pole_filter: t.pole_filter,
            t_end: None,
            osc_budget: 0.1,
        }
    }
}

impl From<&TolConfig> for Tolerances {
    fn from(t: &TolConfig) -> Self {
        Self {
            tol_c: t.tol_c,
            dt_safety: t.dt_safety,
            dt_min: t.dt_min,
            max_steps: t.max_steps,
            monitor_every: t.monitor_every,
            pole_filter: t.pole_filter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsolutionConfig {
    pub ubar: String,
    /// Constant added to `ψ` to form the target level.
    #[serde(default)]
    pub level: f64,
}

fn default_compat_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatConfig {
    /// Candidate constant in `h = (e^{ψ+c})^{1/k}`.
    #[serde(default)]
    pub c: f64,
    /// Reference field whose Hessian enters the second flux variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default = "default_compat_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackConfig {
    pub times: Vec<f64>,
}

fn default_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

pub(crate) fn expr(key: &str, text: &str) -> Result<Expression> {
    Expression::parse(text).map_err(|source| ConfigError::Expr {
        key: key.to_string(),
        source,
    })
}

fn opt_expr(key: &str, text: &Option<String>) -> Result<Option<Expression>> {
    text.as_deref().map(|t| expr(key, t)).transpose()
}

/// Parses a TOML value, falling back to a bare string.
fn override_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Sets `a.b.c = value` in a table, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(assignment.to_string()))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(assignment.to_string()));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::Invalid(format!("`{p}` in `{key}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), override_value(raw.trim()));
    Ok(())
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &[])
    }

    /// Parses `text` after applying `key=value` overrides.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Config = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_with(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        self.problem_spec().map(|_| ())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let p = &self.problem;
        let k = ConeOrder::new(p.k).map_err(|e| ConfigError::Invalid(format!("problem.k: {e}")))?;
        let phi = BoundaryExpr {
            default: expr("problem.phi", &p.phi)?,
            west: opt_expr("problem.phi_west", &p.phi_west)?,
            east: opt_expr("problem.phi_east", &p.phi_east)?,
            south: opt_expr("problem.phi_south", &p.phi_south)?,
            north: opt_expr("problem.phi_north", &p.phi_north)?,
        };
        Ok(ProblemSpec {
            domain: p.domain,
            k,
            chi: p.chi.parse("problem.chi")?,
            psi_x: expr("problem.psi", &p.psi)?,
            psi_t_rate: p.psi_t_rate,
            phi,
            u0: expr("problem.u0", &p.u0)?,
            mode: p.mode,
            coeffs: p.coeffs.parse("problem.coeffs")?,
            tolerances: (&self.tolerances).into(),
        })
    }
}
