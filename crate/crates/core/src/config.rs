//! Pipeline configuration file.
//!
//! ```toml
//! [memory]
//! taxonomy = "taxonomy.tsv"
//! schema = "schema.toml"
//! classes = ["Normal", "Osteopenia", "Osteoporosis"]
//!
//! [gate]
//! k = 5
//! l = 2
//! quasi_fields = ["age", "bmi", "sex"]
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::DEFAULT_TAU;
use crate::eval::TiePolicy;
use crate::gate::GateConfig;
use crate::memory::{BinSchema, ClassLabel, Distiller};
use crate::scribe::{Fault, LoopConfig, DEFAULT_MAX_ITERATIONS};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryConfig {
    pub taxonomy: PathBuf,
    /// Bin schema file; the bone-health default when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    #[serde(default)]
    pub classes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_support: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupervisorConfig {
    #[serde(default = "default_tau")]
    pub tau: f64,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Template,
    Adversarial,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScribeConfig {
    #[serde(default = "default_backend")]
    pub backend: Backend,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_retry")]
    pub retry_budget: usize,
    #[serde(default = "default_fault_rate")]
    pub fault_rate: f64,
    #[serde(default)]
    pub persistence: f64,
    #[serde(default = "all_faults")]
    pub faults: Vec<Fault>,
    #[serde(default)]
    pub seed: u64,
}

fn default_backend() -> Backend {
    Backend::Template
}
fn default_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}
fn default_retry() -> usize {
    2
}
fn default_fault_rate() -> f64 {
    0.5
}
fn all_faults() -> Vec<Fault> {
    Fault::ALL.to_vec()
}

impl Default for ScribeConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Template,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            retry_budget: default_retry(),
            fault_rate: default_fault_rate(),
            persistence: 0.0,
            faults: all_faults(),
            seed: 0,
        }
    }
}

impl ScribeConfig {
    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            max_iterations: self.max_iterations,
            retry_budget: self.retry_budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    #[serde(default = "default_l_values")]
    pub l_values: Vec<usize>,
}

fn default_k_values() -> Vec<usize> {
    vec![3, 5, 7, 9]
}
fn default_l_values() -> Vec<usize> {
    vec![1, 2, 3]
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k_values: default_k_values(),
            l_values: default_l_values(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMode {
    Fractional,
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tie")]
    pub tie_policy: TieMode,
    /// Signature-overlap fraction at which the membership attacker says "member".
    #[serde(default = "default_threshold")]
    pub mia_threshold: f64,
}

fn default_tie() -> TieMode {
    TieMode::Fractional
}
fn default_threshold() -> f64 {
    1.0
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tie_policy: TieMode::Fractional,
            mia_threshold: 1.0,
        }
    }
}

impl AttackConfig {
    pub fn tie_policy(&self) -> TiePolicy {
        match self.tie_policy {
            TieMode::Fractional => TiePolicy::Fractional,
            TieMode::Strict => TiePolicy::Strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub memory: MemoryConfig,
    pub gate: GateConfig,
    #[serde(default)]
    pub supervisor: SupervisorConfig,
    #[serde(default)]
    pub scribe: ScribeConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub attack: AttackConfig,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads the file and resolves relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.memory.taxonomy);
        if let Some(s) = self.memory.schema.as_mut() {
            fix(s);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.gate.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.supervisor.tau) {
            return Err(ConfigError::Invalid("supervisor.tau must lie in [0, 1]".into()));
        }
        if self.scribe.max_iterations == 0 {
            return Err(ConfigError::Invalid("scribe.max_iterations must be at least 1".into()));
        }
        for (name, v) in [
            ("fault_rate", self.scribe.fault_rate),
            ("persistence", self.scribe.persistence),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::Invalid(format!("scribe.{name} must lie in [0, 1]")));
            }
        }
        if self.memory.min_support == Some(0) {
            return Err(ConfigError::Invalid("memory.min_support must be at least 1".into()));
        }
        if self.sweep.k_values.is_empty() || self.sweep.l_values.is_empty() {
            return Err(ConfigError::Invalid("sweep grids must be nonempty".into()));
        }
        if self.sweep.k_values.contains(&0) || self.sweep.l_values.contains(&0) {
            return Err(ConfigError::Invalid("sweep values must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.attack.mia_threshold) {
            return Err(ConfigError::Invalid("attack.mia_threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn taxonomy(&self) -> Result<Taxonomy, ConfigError> {
        Taxonomy::load(&self.memory.taxonomy)
            .map_err(|e| ConfigError::Invalid(format!("{}: {e}", self.memory.taxonomy.display())))
    }

    pub fn schema(&self) -> Result<BinSchema, ConfigError> {
        match &self.memory.schema {
            Some(p) => BinSchema::load(p).map_err(|e| ConfigError::Invalid(format!("{}: {e}", p.display()))),
            None => Ok(BinSchema::bone_health_default()),
        }
    }

    pub fn distiller(&self) -> Result<Distiller, ConfigError> {
        Ok(Distiller {
            taxonomy: self.taxonomy()?,
            schema: self.schema()?,
            classes: self.memory.classes.iter().map(ClassLabel::new).collect(),
            min_support: self.memory.min_support,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[memory]\ntaxonomy = \"t.tsv\"\n\n[gate]\nk = 5\nl = 2\nquasi_fields = [\"age\", \"sex\"]\n";

    #[test]
    fn defaults_fill_in() {
        let cfg = PipelineConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.supervisor.tau, 0.5);
        assert_eq!(cfg.scribe.max_iterations, 4);
        assert_eq!(cfg.scribe.backend, Backend::Template);
        assert_eq!(cfg.sweep.k_values, vec![3, 5, 7, 9]);
        let mut cfg = cfg;
        cfg.resolve_paths(Path::new("/etc/run"));
        assert_eq!(cfg.memory.taxonomy, PathBuf::from("/etc/run/t.tsv"));
    }

    #[test]
    fn rejects_bad_values() {
        let bad_tau = format!("{MINIMAL}\n[supervisor]\ntau = 1.5\n");
        assert!(PipelineConfig::from_toml_str(&bad_tau).is_err());
        let unknown = format!("{MINIMAL}\n[scribe]\nbackend = \"template\"\nmystery = 1\n");
        assert!(PipelineConfig::from_toml_str(&unknown).is_err());
        assert!(PipelineConfig::from_toml_str("[gate]\nk=1\nl=1\nquasi_fields=[]\n").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = PipelineConfig::from_toml_str(MINIMAL).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(PipelineConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
