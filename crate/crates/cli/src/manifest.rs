use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::io::write_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
}

/// One per run: what was read, what was written and under which settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: String,
    pub tool: String,
    pub command: String,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub schema_versions: BTreeMap<String, String>,
    pub timing: Timing,
}

pub struct ManifestBuilder {
    command: String,
    config: Value,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    schema_versions: BTreeMap<String, String>,
    started: Instant,
    started_unix_ms: u128,
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        let started_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        Self {
            command: command.to_string(),
            config: Value::Null,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            schema_versions: BTreeMap::new(),
            started: Instant::now(),
            started_unix_ms,
        }
    }

    pub fn config<T: Serialize>(&mut self, config: &T) -> &mut Self {
        self.config = serde_json::to_value(config).unwrap_or(Value::Null);
        self
    }

    pub fn seed(&mut self, name: &str, seed: u64) -> &mut Self {
        self.seeds.insert(name.to_string(), seed);
        self
    }

    pub fn input(&mut self, p: &Path) -> &mut Self {
        self.inputs.push(show(p));
        self
    }

    pub fn output(&mut self, p: &Path) -> &mut Self {
        self.outputs.push(show(p));
        self
    }

    pub fn schema(&mut self, artifact: &str, version: &str) -> &mut Self {
        self.schema_versions.insert(artifact.to_string(), version.to_string());
        self
    }

    pub fn finish(&self, path: &Path) -> Result<RunManifest, CliError> {
        let mut outputs = self.outputs.clone();
        outputs.push(show(path));
        let manifest = RunManifest {
            schema_version: "manifest/v1".into(),
            tool: concat!("protoscribe ", env!("CARGO_PKG_VERSION")).into(),
            command: self.command.clone(),
            config: self.config.clone(),
            seeds: self.seeds.clone(),
            inputs: self.inputs.clone(),
            outputs,
            schema_versions: self.schema_versions.clone(),
            timing: Timing {
                started_unix_ms: self.started_unix_ms,
                elapsed_ms: self.started.elapsed().as_millis(),
            },
        };
        let text = protoscribe_core::json::to_canonical_pretty(&manifest).map_err(|e| CliError::data("manifest", e))?;
        write_text(path, &(text + "\n"))?;
        Ok(manifest)
    }
}

/// `<output>.manifest.json` next to the primary output.
pub fn default_manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    primary.with_file_name(name)
}
