use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sumlab_core::harness::Tolerances;
use sumlab_core::spaces::DualSearchConfig;
use sumlab_core::suites::{Instance, SuiteConfig, SuiteName};
use sumlab_core::summing::{FamilySearchConfig, Operator, SummingParams};
use sumlab_core::vfun::SimpleFunction;

/// A JSON scenario. Which fields are needed depends on the command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<Operator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SummingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<SimpleFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_grid: Option<Vec<f64>>,
    /// Constant for the q11 columns of a sweep; defaults to a provably valid one.
    #[serde(default, rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    /// A single instance to replay instead of generating `instances` of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<Instance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
    #[serde(default)]
    pub search: FamilySearchConfig,
    #[serde(default)]
    pub engine: DualSearchConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jp_batch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Problems with a config; the CLI exits with status 2 on these.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: field `{field}`: {message}")]
    Parse { path: PathBuf, field: String, message: String },
    #[error("field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

pub fn invalid(field: &'static str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid { field, message: message.to_string() }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            ConfigError::Parse { path: path.to_owned(), field, message: e.into_inner().to_string() }
        })
    }

    pub fn require<'a, T>(value: &'a Option<T>, field: &'static str) -> Result<&'a T, ConfigError> {
        value.as_ref().ok_or_else(|| invalid(field, "missing"))
    }

    /// Replaces every tolerance by `tolerance`.
    pub fn override_tolerance(&mut self, tolerance: f64) {
        self.tolerances = Tolerances { identity: tolerance, certified: tolerance, multistart: tolerance };
    }

    pub fn suite_config(&self) -> SuiteConfig {
        let defaults = SuiteConfig::default();
        SuiteConfig {
            seed: self.seed,
            instances: self.instances.unwrap_or(defaults.instances),
            engine: self.engine.clone(),
            family: self.search.clone(),
            tolerances: self.tolerances,
            jp_batch: self.jp_batch.unwrap_or(defaults.jp_batch),
        }
    }
}
