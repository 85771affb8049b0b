//! Provenance manifests and atomic output files.
//!
//! Every output `X` is accompanied by `X.manifest.json` recording the tool
//! version, the command, its configuration, SHA-256 digests of inputs and
//! outputs and, where applicable, the content hash of the dataset.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "kasus";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every setting a pipeline stage may use. Fields a command does not use
/// are left empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scores: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotations: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub aucs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fillers: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vocab_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scorer_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub include_punctuation: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restriction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation_mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_hash: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, config: RunConfig, dataset_hash: Option<String>) -> Self {
        Manifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config,
            dataset_hash,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .insert(path.display().to_string(), file_sha256(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        self.outputs
            .insert(path.display().to_string(), file_sha256(path)?);
        Ok(())
    }

    /// Writes the manifest next to `primary`.
    pub fn write_for(&self, primary: &Path) -> Result<PathBuf> {
        let path = manifest_path(primary);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    primary.with_file_name(name)
}

/// Reads the manifest of `primary`, if there is one.
pub fn read_manifest(primary: &Path) -> Result<Option<Manifest>> {
    let path = manifest_path(primary);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
    ))
}

/// Checks that `primary` was produced for the dataset with hash `expected`.
/// A missing manifest is an error when `required`, otherwise a warning.
pub fn check_dataset(primary: &Path, expected: &str, required: bool) -> Result<()> {
    match read_manifest(primary)? {
        Some(m) => match &m.dataset_hash {
            Some(h) if h == expected => Ok(()),
            Some(h) => bail!(
                "{} was produced for dataset {h}, but the dataset in use has hash {expected}",
                primary.display()
            ),
            None => bail!(
                "{} has a manifest without a dataset hash",
                primary.display()
            ),
        },
        None if required => bail!(
            "{} has no manifest ({}); regenerate it with this tool",
            primary.display(),
            manifest_path(primary).display()
        ),
        None => {
            log::warn!(
                "{} has no manifest; dataset version cannot be checked",
                primary.display()
            );
            Ok(())
        }
    }
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Writes `bytes` to a temporary file in the target directory and renames
/// it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Renders into memory with `f`, then writes atomically.
pub fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_atomic(path, &buf)
}
