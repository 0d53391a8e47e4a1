use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{Params, Report};
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to rerun an analysis and check that its outputs are unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub subcommand: String,
    /// Every resolved parameter, defaults included.
    pub params: Params,
    /// File name to sha256 hex digest.
    pub outputs: BTreeMap<String, String>,
}

pub fn csv_bytes(report: &Report) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("writing CSV: {e}"));
    w.write_record(&report.table.headers).map_err(io)?;
    for row in &report.table.rows {
        w.write_record(row).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("writing CSV: {e}")))
}

pub fn json_bytes(report: &Report) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(&report.json).map_err(|e| CliError::Io(format!("writing JSON: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(dir.join(name), bytes).map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))
}

/// Writes `<name>.csv`, `<name>.json` and the manifest into an existing directory.
pub fn write_outputs(dir: &Path, name: &str, params: &Params, report: &Report) -> Result<RunManifest, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Io(format!("output directory {} does not exist", dir.display())));
    }
    let mut outputs = BTreeMap::new();
    for (file, bytes) in [(format!("{name}.csv"), csv_bytes(report)?), (format!("{name}.json"), json_bytes(report)?)] {
        write(dir, &file, &bytes)?;
        outputs.insert(file, digest(&bytes));
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        core_version: fibmap_core::VERSION.into(),
        subcommand: name.into(),
        params: params.clone(),
        outputs,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(format!("writing manifest: {e}")))?;
    bytes.push(b'\n');
    write(dir, MANIFEST_FILE, &bytes)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: not a run manifest: {e}", path.display())))
}

/// Names of outputs whose digests differ between two manifests.
pub fn mismatches(recorded: &RunManifest, replayed: &RunManifest) -> Vec<String> {
    let mut names: Vec<String> = recorded
        .outputs
        .iter()
        .filter(|(k, v)| replayed.outputs.get(*k) != Some(*v))
        .map(|(k, _)| k.clone())
        .collect();
    names.extend(replayed.outputs.keys().filter(|k| !recorded.outputs.contains_key(*k)).cloned());
    names
}
