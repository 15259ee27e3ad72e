use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

/// Files of one run, kept in memory until the run succeeds or fails cleanly.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Invariant(e.to_string()))?;
        bytes.push(b'\n');
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Invariant(e.to_string());
        wtr.write_record(header).map_err(fail)?;
        for r in rows {
            wtr.write_record(r).map_err(fail)?;
        }
        let bytes = wtr.into_inner().map_err(|e| CliError::Invariant(e.to_string()))?;
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.insert(name.to_string(), bytes);
    }

    pub fn records(&self) -> Vec<ArtifactRecord> {
        self.files
            .iter()
            .map(|(name, bytes)| ArtifactRecord { file: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 })
            .collect()
    }

    pub fn write_all(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Versions {
    pub fpp_core: String,
    pub fpp_cli: String,
}

impl Versions {
    pub fn current() -> Self {
        Versions { fpp_core: fpp_core::VERSION.to_string(), fpp_cli: env!("CARGO_PKG_VERSION").to_string() }
    }
}

/// Everything needed to repeat a run. No timestamps or host data, so two
/// runs of the same config produce the same manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    /// Config after `--seed` and `--budget` overrides.
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub exit_code: u8,
    pub artifacts: Vec<ArtifactRecord>,
}

pub fn config_hash(cfg: &ExperimentConfig) -> CliResult<String> {
    let bytes = serde_json::to_vec(cfg).map_err(|e| CliError::Invariant(e.to_string()))?;
    Ok(sha256_hex(&bytes))
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, artifacts: &Artifacts, exit_code: u8) -> CliResult<Self> {
        Ok(Manifest {
            schema_version: SCHEMA_VERSION,
            command: cfg.experiment.command().to_string(),
            config: cfg.clone(),
            config_sha256: config_hash(cfg)?,
            seed: cfg.experiment.seed(),
            versions: Versions::current(),
            exit_code,
            artifacts: artifacts.records(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!("manifest schema_version {} is not supported", m.schema_version)));
        }
        if config_hash(&m.config)? != m.config_sha256 {
            return Err(CliError::Schema("manifest config does not match its sha256".into()));
        }
        Ok(m)
    }

    /// Files whose hash differs from the record, plus missing and extra files.
    pub fn mismatches(&self, artifacts: &Artifacts) -> Vec<String> {
        let now: BTreeMap<String, ArtifactRecord> =
            artifacts.records().into_iter().map(|r| (r.file.clone(), r)).collect();
        let mut out = Vec::new();
        for r in &self.artifacts {
            match now.get(&r.file) {
                Some(n) if n == r => {}
                Some(_) => out.push(format!("{} differs", r.file)),
                None => out.push(format!("{} was not produced", r.file)),
            }
        }
        for name in now.keys() {
            if !self.artifacts.iter().any(|r| &r.file == name) {
                out.push(format!("{name} is new"));
            }
        }
        out
    }
}

/// Shortest round-trip decimal; `inf` and `NaN` spelled out, `-0` printed as `0`.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn coords(x: &[i64]) -> String {
    x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}
